//! Good/bad classification of blocks against a target measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    empirical_measure, weakstar_distance, CylinderDistribution, MetricConfig, TargetMeasure,
};
use crate::symbolic::Word;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockClassification {
    /// Indices of blocks within `eps` of the target.
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
    /// Distance of each block's empirical measure to the target.
    pub distances: Vec<f64>,
    /// Distance of the mean of all block distributions to the target.
    pub barycenter_distance: f64,
}

/// Splits `blocks` by whether their depth-`K` empirical measure is within
/// `eps` of `mu`.
pub fn classify_blocks(
    blocks: &[Word],
    mu: &TargetMeasure,
    eps: f64,
    depth: usize,
) -> Result<BlockClassification> {
    let target = mu.cylinders(depth)?;
    classify_against(blocks, &target, eps)
}

/// As [`classify_blocks`], with the target's cylinder data precomputed.
pub fn classify_against(
    blocks: &[Word],
    target: &CylinderDistribution,
    eps: f64,
) -> Result<BlockClassification> {
    if blocks.is_empty() {
        return Err(Error::InvalidArgument("no blocks to classify".into()));
    }
    let cfg = MetricConfig::new(target.max_depth());
    let mut good = Vec::new();
    let mut bad = Vec::new();
    let mut distances = Vec::with_capacity(blocks.len());
    let mut dists = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let emp = empirical_measure(b, cfg.depth)?;
        let d = weakstar_distance(&emp, target, &cfg)?;
        if d <= eps {
            good.push(i);
        } else {
            bad.push(i);
        }
        distances.push(d);
        dists.push(emp);
    }
    let barycenter_distance = weakstar_distance(&CylinderDistribution::mean(&dists)?, target, &cfg)?;
    Ok(BlockClassification {
        good,
        bad,
        distances,
        barycenter_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_word, stream};
    use crate::symbolic::Alphabet;

    #[test]
    fn classification_examples() {
        let fair = TargetMeasure::uniform(Alphabet::binary());
        let mut rng = stream(0xD0D0, "classify");
        let mut blocks: Vec<Word> = (0..99).map(|_| sample_word(&fair, 200, &mut rng).unwrap()).collect();
        blocks.insert(37, Word::constant(Alphabet::binary(), 0, 200).unwrap());

        let c = classify_blocks(&blocks, &fair, 0.1, 2).unwrap();
        assert_eq!(c.bad, vec![37]);
        assert_eq!(c.good.len(), 99);
        // depth-1 part of the zero block's distance: 0.5 * 0.5 + 0.25 * 0.5
        let zero_depth1 = classify_blocks(&blocks[37..38], &fair, 0.1, 1).unwrap();
        assert_eq!(zero_depth1.distances[0], 0.375);
        assert!(c.barycenter_distance < 0.02);

        let all = classify_blocks(&blocks, &fair, 1.0, 2).unwrap();
        assert!(all.bad.is_empty());

        let w = &blocks[0];
        let own = TargetMeasure::Empirical(empirical_measure(w, 2).unwrap());
        let c = classify_blocks(std::slice::from_ref(w), &own, 1e-9, 2).unwrap();
        assert_eq!(c.good, vec![0]);

        assert!(classify_blocks(&[Word::constant(Alphabet::binary(), 0, 1).unwrap()], &fair, 0.1, 2).is_err());
    }
}
