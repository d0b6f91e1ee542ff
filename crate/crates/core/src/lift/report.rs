//! Prefix-scale distance reports shared by the constructions.

use serde::Serialize;

use crate::error::Result;
use crate::measures::{prefix_empiricals, weakstar_distance, CylinderDistribution, MetricConfig};
use crate::symbolic::Word;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleDistance {
    pub n: usize,
    pub distance: f64,
}

/// Powers of two in `[min, max]`.
pub fn power_of_two_scales(min: usize, max: usize) -> Vec<usize> {
    (0..usize::BITS)
        .map(|e| 1usize << e)
        .filter(|&n| n >= min.max(1) && n <= max)
        .collect()
}

/// Distance of each prefix `w[..n]` to `target`, at the target's depth.
pub fn prefix_distances(
    w: &Word,
    target: &CylinderDistribution,
    scales: &[usize],
) -> Result<Vec<ScaleDistance>> {
    let cfg = MetricConfig::new(target.max_depth());
    let emps = prefix_empiricals(w, cfg.depth, scales)?;
    scales
        .iter()
        .zip(&emps)
        .map(|(&n, d)| {
            Ok(ScaleDistance {
                n,
                distance: weakstar_distance(d, target, &cfg)?,
            })
        })
        .collect()
}

/// Change of a reported distance when the horizon `n` is replaced by the
/// equivalent horizon `n + isqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCheck {
    pub n: usize,
    pub shifted: usize,
    pub distance: f64,
    pub shifted_distance: f64,
    /// `2 isqrt(n) / n`.
    pub bound: f64,
    pub ok: bool,
}

/// Stability checks at every `n` for which the shifted horizon fits in `w`.
pub fn stability_checks(
    w: &Word,
    target: &CylinderDistribution,
    horizons: &[usize],
) -> Result<Vec<StabilityCheck>> {
    let mut pairs = Vec::new();
    for &n in horizons {
        let s = n.isqrt();
        if n >= target.max_depth() && n + s <= w.len() {
            pairs.push((n, n + s));
        }
    }
    let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let d = prefix_distances(w, target, &flat)?;
    Ok(pairs
        .iter()
        .zip(d.chunks(2))
        .map(|(&(n, shifted), pair)| {
            let bound = 2.0 * (shifted - n) as f64 / n as f64;
            StabilityCheck {
                n,
                shifted,
                distance: pair[0].distance,
                shifted_distance: pair[1].distance,
                bound,
                ok: (pair[0].distance - pair[1].distance).abs() <= bound,
            }
        })
        .collect())
}
