//! Rational approximation of conditional block distributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Symbol, Word};

/// Largest-remainder rounding of `denom * p`; ties go to the lower index.
/// The result sums to `denom` and each `out[i] / denom` is within
/// `1 / denom` of `p[i]`.
pub fn rational_allocation(p: &[f64], denom: usize) -> Result<Vec<usize>> {
    if denom == 0 {
        return Err(Error::InvalidArgument("denominator must be at least 1".into()));
    }
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidProbability("allocation weights must be nonnegative".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("allocation weights sum to {sum}")));
    }
    let scaled: Vec<f64> = p.iter().map(|&v| v * denom as f64).collect();
    let mut out: Vec<usize> = scaled.iter().map(|&v| v.floor() as usize).collect();
    // remainders are compared after rounding to 1e-9 so that float noise
    // does not break ties between mathematically equal entries
    let rem = |i: usize| ((scaled[i] - scaled[i].floor()) * 1e9).round() as i64;
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    if assigned <= denom {
        order.sort_by_key(|&i| (std::cmp::Reverse(rem(i)), i));
        for &i in order.iter().take(denom - assigned) {
            out[i] += 1;
        }
    } else {
        order.retain(|&i| out[i] > 0);
        order.sort_by_key(|&i| (rem(i), std::cmp::Reverse(i)));
        for &i in order.iter().take(assigned - denom) {
            out[i] -= 1;
        }
    }
    Ok(out)
}

/// Realized counts `r(B, C)` for one conditioning block `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationEntry {
    pub conditioning: Word,
    /// `m_C`: number of markers whose block is `C`.
    pub visits: usize,
    /// Blocks `B` with `r(B, C) > 0`, in lexicographic order.
    pub counts: Vec<(Word, usize)>,
    /// Conditional mass removed by the good-block restriction.
    pub bad_mass: f64,
    /// True when no good block had positive mass and the full conditional was used.
    pub fallback: bool,
}

/// All allocations of one stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub stage: usize,
    pub entries: Vec<AllocationEntry>,
}

impl Allocation {
    /// `sum_B r(B, C) = m_C` for every `C`.
    pub fn is_conserved(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.counts.iter().map(|(_, r)| r).sum::<usize>() == e.visits)
    }

    /// Realized frequency of each block `B` over all markers of the stage.
    pub fn block_frequencies(&self) -> Vec<(Word, f64)> {
        let total: usize = self.entries.iter().map(|e| e.visits).sum();
        let mut counts: std::collections::BTreeMap<Vec<Symbol>, (Word, usize)> = Default::default();
        for e in &self.entries {
            for (b, r) in &e.counts {
                counts.entry(b.symbols().to_vec()).or_insert_with(|| (b.clone(), 0)).1 += r;
            }
        }
        counts
            .into_values()
            .map(|(b, r)| (b, r as f64 / total as f64))
            .collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fixed hash of the pair `(B, C)`.
pub fn pair_hash(b: &[Symbol], c: &[Symbol]) -> u64 {
    b.iter()
        .chain(std::iter::once(&u32::MAX))
        .chain(c)
        .fold(0u64, |h, &s| splitmix(h ^ s as u64))
}

fn block_phase(b: &[Symbol], c: &[Symbol]) -> f64 {
    (pair_hash(b, c) >> 11) as f64 / (1u64 << 53) as f64
}

/// Order in which the allocated copies are handed to the occurrences of `C`.
///
/// Copy `j` of block `B` gets key `(j + u_B) / r(B, C)` with a fixed phase
/// `u_B` in `[0, 1)`; sorting by key spreads each block evenly over the
/// occurrences. Returns indices into `counts`.
pub fn interleave(conditioning: &[Symbol], counts: &[(Vec<Symbol>, usize)]) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(counts.iter().map(|c| c.1).sum());
    for (i, (b, r)) in counts.iter().enumerate() {
        let u = block_phase(b, conditioning);
        for j in 0..*r {
            keyed.push(((j as f64 + u) / *r as f64, i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}
