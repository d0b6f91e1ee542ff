//! Two-gap marker sequences from Beatty sequences of slope `L + 1/phi`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{weakstar_distance, CylinderDistribution, MetricConfig, TargetMeasure};
use crate::symbolic::{word_code, Word};

/// `floor(n / phi)` computed exactly as `floor((isqrt(5 n^2) - n) / 2)`.
pub fn floor_n_over_phi(n: u64) -> Option<u64> {
    let n = n as u128;
    let sq = n.checked_mul(n)?.checked_mul(5)?;
    Some(((sq.isqrt() - n) / 2) as u64)
}

/// `floor(n * beta)` for `beta = l + 1/phi`.
pub fn beatty(n: u64, l: usize) -> Option<u64> {
    n.checked_mul(l as u64)?.checked_add(floor_n_over_phi(n)?)
}

/// Increasing indices whose consecutive differences are `L` or `L + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkerSequence {
    l: usize,
    markers: Vec<usize>,
}

impl MarkerSequence {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn markers(&self) -> &[usize] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn gaps(&self) -> Vec<usize> {
        self.markers.windows(2).map(|p| p[1] - p[0]).collect()
    }

    /// Markers `offset + floor(N beta) - L` for `N = 1, 2, ..` below `end`,
    /// so the first marker is `offset`. Also returns the first marker `>= end`.
    pub fn window(l: usize, offset: usize, end: usize) -> Result<(MarkerSequence, usize)> {
        if l == 0 {
            return Err(Error::InvalidArgument("marker gap L must be at least 1".into()));
        }
        let mut markers = Vec::new();
        for n in 1u64.. {
            let a = beatty(n, l)
                .and_then(|b| usize::try_from(b).ok())
                .and_then(|b| (b - l).checked_add(offset))
                .ok_or(Error::Overflow("marker index"))?;
            if a >= end {
                return Ok((MarkerSequence { l, markers }, a));
            }
            markers.push(a);
        }
        unreachable!("markers grow without bound")
    }
}

/// The first `count` Beatty markers `floor(N beta)`, `N = 1..=count`.
pub fn marker_sequence(l: usize, count: usize) -> Result<MarkerSequence> {
    if l == 0 || count == 0 {
        return Err(Error::InvalidArgument("L and count must be at least 1".into()));
    }
    let markers = (1..=count as u64)
        .map(|n| {
            beatty(n, l)
                .and_then(|b| usize::try_from(b).ok())
                .ok_or(Error::Overflow("marker index"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarkerSequence { l, markers })
}

/// Distribution of the depth-`K` blocks read at the first `upto` markers.
pub fn marker_block_distribution(
    x: &Word,
    m: &MarkerSequence,
    depth: usize,
    upto: usize,
) -> Result<CylinderDistribution> {
    let alphabet = x.alphabet();
    let q = alphabet.size();
    if upto == 0 || upto > m.len() {
        return Err(Error::IndexOutOfRange { index: upto, len: m.len() });
    }
    let width = alphabet.word_count(depth).ok_or(Error::DepthTooLarge {
        depth,
        alphabet: q,
    })?;
    let mut top = vec![0.0; width];
    for &a in &m.markers[..upto] {
        if a + depth > x.len() {
            return Err(Error::IndexOutOfRange {
                index: a + depth - 1,
                len: x.len(),
            });
        }
        let code = word_code(&x.symbols()[a..a + depth], q).expect("fits");
        top[code as usize] += 1.0;
    }
    top.iter_mut().for_each(|v| *v /= upto as f64);
    CylinderDistribution::from_top_level(alphabet, depth, top)
}

/// Distance between the marker-sampled block distribution of `x` and `mu`.
pub fn relative_generation_distance(
    x: &Word,
    m: &MarkerSequence,
    mu: &TargetMeasure,
    depth: usize,
    upto: usize,
) -> Result<f64> {
    let d = marker_block_distribution(x, m, depth, upto)?;
    weakstar_distance(&d, &mu.cylinders(depth)?, &MetricConfig::new(depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_word, stream};
    use crate::symbolic::Alphabet;
    use proptest::prelude::*;

    #[test]
    fn marker_examples() {
        let m = marker_sequence(1, 5).unwrap();
        assert_eq!(m.markers(), &[1, 3, 4, 6, 8]);
        assert_eq!(m.gaps(), vec![2, 1, 2, 2]);
        let m = marker_sequence(2, 4).unwrap();
        assert_eq!(m.markers(), &[2, 5, 7, 10]);
        assert_eq!(m.gaps(), vec![3, 2, 3]);
        assert!(marker_sequence(0, 3).is_err());
    }

    #[test]
    fn floor_over_phi_matches_float_for_small_n() {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        for n in 0..100_000u64 {
            assert_eq!(floor_n_over_phi(n).unwrap(), (n as f64 * inv_phi).floor() as u64);
        }
        assert!(floor_n_over_phi(1 << 62).is_some());
        assert!(floor_n_over_phi(u64::MAX).is_none());
        assert!(beatty(u64::MAX, 2).is_none());
    }

    #[test]
    fn window_starts_at_offset() {
        let (m, next) = MarkerSequence::window(3, 100, 130).unwrap();
        assert_eq!(m.markers()[0], 100);
        assert!(m.markers().iter().all(|&a| a < 130));
        assert!(next >= 130 && next - m.markers().last().unwrap() <= 4);
        assert!(m.gaps().iter().all(|&g| g == 3 || g == 4));
    }

    #[test]
    fn relative_generation_examples() {
        let fair = TargetMeasure::uniform(Alphabet::binary());
        let m = marker_sequence(3, 10_000).unwrap();
        let x = sample_word(&fair, 40_000, &mut stream(11, "markers")).unwrap();
        assert!(relative_generation_distance(&x, &m, &fair, 2, 10_000).unwrap() <= 0.02);

        let zeros = Word::constant(Alphabet::binary(), 0, 40_000).unwrap();
        let point = TargetMeasure::point_mass(Alphabet::binary(), 0).unwrap();
        assert_eq!(relative_generation_distance(&zeros, &m, &point, 2, 10_000).unwrap(), 0.0);

        let one = relative_generation_distance(&x, &m, &fair, 2, 1).unwrap();
        let block = x.slice(m.markers()[0], m.markers()[0] + 2).unwrap();
        let mut top = vec![0.0; 4];
        top[block.code().unwrap() as usize] = 1.0;
        let point = CylinderDistribution::from_top_level(Alphabet::binary(), 2, top).unwrap();
        let direct = weakstar_distance(&point, &fair.cylinders(2).unwrap(), &MetricConfig::new(2)).unwrap();
        assert_eq!(one, direct);

        let short = x.prefix(100).unwrap();
        assert!(relative_generation_distance(&short, &m, &fair, 2, 10_000).is_err());
    }

    proptest! {
        #[test]
        fn gaps_take_two_values(l in 1usize..40, count in 2usize..3000) {
            let m = marker_sequence(l, count).unwrap();
            prop_assert!(m.gaps().iter().all(|&g| g == l || g == l + 1));
        }

        #[test]
        fn gaps_two_valued_far_out(l in 1usize..10, start in 1u64..(1u64 << 40)) {
            for n in start..start + 50 {
                let g = beatty(n + 1, l).unwrap() - beatty(n, l).unwrap();
                prop_assert!(g == l as u64 || g == l as u64 + 1);
            }
        }
    }
}
