//! A point whose ergodic averages of a cylinder function oscillate between
//! the integrals of two measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{MetricConfig, TargetMeasure};
use crate::rng::{sample_word, stream};
use crate::symbolic::{connect, connection_gap, lead_in, lead_out, validate_word, Sft, Symbol, Word};

/// Ratio between consecutive block lengths.
pub const BLOCK_RATIO: usize = 8;
/// Samples drawn per block; the one closest to the target frequency is kept.
pub const SAMPLES_PER_BLOCK: usize = 32;

/// `f = a 1_B + c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineCylinderFunction {
    pub cylinder: Word,
    pub a: f64,
    pub c: f64,
}

impl AffineCylinderFunction {
    pub fn integral(&self, t: &TargetMeasure) -> Result<f64> {
        Ok(self.a * t.cylinder(self.cylinder.symbols())? + self.c)
    }

    /// `f(T^i x)` for `i = 0..count`; `x` must extend `|B| - 1` symbols further.
    pub fn values(&self, x: &[Symbol], count: usize) -> Vec<f64> {
        let b = self.cylinder.symbols();
        (0..count)
            .map(|i| self.c + if x[i..i + b.len()] == *b { self.a } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationCheckpoint {
    pub stage: usize,
    pub n: usize,
    /// `A_n(f, x)`.
    pub average: f64,
    /// True for blocks typical for the first measure, where `A_n > 1` is sought.
    pub high: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub function: AffineCylinderFunction,
    pub integral_mu: f64,
    pub integral_nu: f64,
    pub seed: u64,
    pub block_lengths: Vec<usize>,
    pub checkpoints: Vec<OscillationCheckpoint>,
    /// Sign changes between consecutive satisfied checkpoints.
    pub alternations: usize,
}

#[derive(Debug, Clone)]
pub struct OscillationOutcome {
    pub x: Word,
    pub report: OscillationReport,
}

/// First cylinder of depth `<= 3`, in metric enumeration order, maximizing
/// `mu(B) - nu(B)`.
pub fn separating_cylinder(mu: &TargetMeasure, nu: &TargetMeasure) -> Result<(Word, f64)> {
    let alphabet = mu.alphabet();
    if nu.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch {
            expected: alphabet.size(),
            found: nu.alphabet().size(),
        });
    }
    let mut best: Option<(Word, f64)> = None;
    for b in MetricConfig::new(3).enumerate(alphabet)? {
        let diff = mu.cylinder(b.symbols())? - nu.cylinder(b.symbols())?;
        if best.as_ref().is_none_or(|(_, d)| diff > *d) {
            best = Some((b, diff));
        }
    }
    match best {
        Some((b, d)) if d > 1e-12 => Ok((b, d)),
        _ => Err(Error::NotSeparated),
    }
}

fn typical_block<R: rand::Rng>(
    t: &TargetMeasure,
    len: usize,
    cylinder: &[Symbol],
    sft: &Sft,
    rng: &mut R,
) -> Result<Word> {
    let target = t.cylinder(cylinder)?;
    let mut best: Option<(f64, Word)> = None;
    for _ in 0..SAMPLES_PER_BLOCK {
        let w = sample_word(t, len, rng)?;
        if !validate_word(sft, &w)? {
            return Err(Error::Inadmissible);
        }
        let windows = len + 1 - cylinder.len();
        let hits = w.symbols().windows(cylinder.len()).filter(|s| *s == cylinder).count();
        let err = (hits as f64 / windows as f64 - target).abs();
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, w));
        }
    }
    Ok(best.expect("at least one sample").1)
}

/// Alternates blocks typical for `mu` (odd stages) and `nu` (even stages),
/// of lengths `8^j`, joined by fillers of length `g0`.
///
/// `f = a 1_B + c` has `int f dmu = 1.5` and `int f dnu = -1`.
pub fn oscillation_point(
    mu: &TargetMeasure,
    nu: &TargetMeasure,
    sft: &Sft,
    stages: usize,
    seed: u64,
) -> Result<OscillationOutcome> {
    let alphabet = sft.alphabet();
    if mu.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch {
            expected: alphabet.size(),
            found: mu.alphabet().size(),
        });
    }
    if stages == 0 {
        return Err(Error::InvalidArgument("at least one stage is required".into()));
    }
    let (cylinder, delta) = separating_cylinder(mu, nu)?;
    let mu_b = mu.cylinder(cylinder.symbols())?;
    let a = 2.5 / delta;
    let function = AffineCylinderFunction {
        c: 1.5 - a * mu_b,
        a,
        cylinder,
    };
    let g0 = connection_gap(sft)?.g0;

    let mut rng_mu = stream(seed, "oscillation/mu");
    let mut rng_nu = stream(seed, "oscillation/nu");
    let mut x: Vec<Symbol> = Vec::new();
    let mut ends = Vec::with_capacity(stages);
    let mut lengths = Vec::with_capacity(stages);
    for j in 1..=stages {
        let len = u32::try_from(j)
            .ok()
            .and_then(|e| BLOCK_RATIO.checked_pow(e))
            .ok_or(Error::Overflow("block length"))?;
        let (t, rng) = if j % 2 == 1 { (mu, &mut rng_mu) } else { (nu, &mut rng_nu) };
        let block = typical_block(t, len, function.cylinder.symbols(), sft, rng)?;
        let first = block.first().expect("nonempty");
        let filler = match x.last() {
            None => lead_in(sft, first, g0)?,
            Some(&prev) => connect(sft, prev, first, g0)?,
        };
        x.extend_from_slice(filler.symbols());
        x.extend_from_slice(block.symbols());
        ends.push(x.len());
        lengths.push(len);
    }
    let horizon = x.len();
    let extra = lead_out(sft, *x.last().expect("nonempty"), function.cylinder.len() - 1);
    x.extend_from_slice(extra.symbols());

    let values = function.values(&x, horizon);
    let mut checkpoints = Vec::with_capacity(stages);
    let mut sum = 0.0;
    let mut done = 0;
    for (i, &n) in ends.iter().enumerate() {
        sum += values[done..n].iter().sum::<f64>();
        done = n;
        let average = sum / n as f64;
        let high = i % 2 == 0;
        checkpoints.push(OscillationCheckpoint {
            stage: i + 1,
            n,
            average,
            high,
            satisfied: if high { average > 1.0 } else { average < 0.0 },
        });
    }
    let satisfied: Vec<bool> = checkpoints.iter().filter(|c| c.satisfied).map(|c| c.high).collect();
    let alternations = satisfied.windows(2).filter(|p| p[0] != p[1]).count();
    let report = OscillationReport {
        integral_mu: function.integral(mu)?,
        integral_nu: function.integral(nu)?,
        function,
        seed,
        block_lengths: lengths,
        checkpoints,
        alternations,
    };
    Ok(OscillationOutcome {
        x: Word::new(alphabet, x)?,
        report,
    })
}
