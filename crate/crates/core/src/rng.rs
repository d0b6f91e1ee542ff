//! Seeded randomness: named streams and samplers for target processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::TargetMeasure;
use crate::symbolic::{Symbol, Word};

fn fnv64(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent generator for one sampler role under a run seed.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv64(name));
    rng
}

/// Inverse-transform draw from unnormalized weights.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<Symbol> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i as Symbol);
            if u < acc {
                return last;
            }
        }
    }
    last
}

/// Draws a word of length `len` from the process of `t`.
///
/// Empirical targets of depth `K` are sampled as order-`(K-1)` Markov chains
/// fitted to their stored cylinder data.
pub fn sample_word<R: Rng + ?Sized>(t: &TargetMeasure, len: usize, rng: &mut R) -> Result<Word> {
    Word::new(t.alphabet(), sample_symbols(t, len, rng)?)
}

fn sample_symbols<R: Rng + ?Sized>(t: &TargetMeasure, len: usize, rng: &mut R) -> Result<Vec<Symbol>> {
    let bad = || Error::InvalidProbability("target has no mass to sample".into());
    match t {
        TargetMeasure::Bernoulli(p) => (0..len).map(|_| pick(p, rng).ok_or_else(bad)).collect(),
        TargetMeasure::Markov { stationary, matrix } => {
            let mut out = Vec::with_capacity(len);
            for i in 0..len {
                let s = if i == 0 {
                    pick(stationary, rng)
                } else {
                    pick(&matrix[out[i - 1] as usize], rng)
                };
                out.push(s.ok_or_else(bad)?);
            }
            Ok(out)
        }
        TargetMeasure::ProductJoining(mu, nu) => {
            let xs = sample_symbols(mu, len, rng)?;
            let ys = sample_symbols(nu, len, rng)?;
            let ny = nu.alphabet().size() as Symbol;
            Ok(xs.iter().zip(&ys).map(|(&x, &y)| x * ny + y).collect())
        }
        TargetMeasure::DiagonalJoining(base) => {
            let q = base.alphabet().size() as Symbol;
            Ok(sample_symbols(base, len, rng)?.into_iter().map(|x| x * q + x).collect())
        }
        TargetMeasure::Empirical(d) => {
            let q = d.alphabet().size();
            let k = d.max_depth();
            let marginal = d.level(1)?.to_vec();
            let mut out: Vec<Symbol> = Vec::with_capacity(len);
            let mut weights = vec![0.0; q];
            for i in 0..len {
                let ctx_len = (k - 1).min(i);
                let ctx = &out[i - ctx_len..];
                let mut word = ctx.to_vec();
                word.push(0);
                for (a, w) in weights.iter_mut().enumerate() {
                    *word.last_mut().expect("nonempty") = a as Symbol;
                    *w = d.get(&word)?;
                }
                let s = pick(&weights, rng).or_else(|| pick(&marginal, rng)).ok_or_else(bad)?;
                out.push(s);
            }
            Ok(out)
        }
    }
}
