//! Normal sequences, deterministic selection and base-`b` addition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::markers::floor_n_over_phi;
use crate::lift::{lift_pair, ScheduleConfig};
use crate::measures::{empirical_measure, TargetMeasure};
use crate::rng::{sample_word, stream};
use crate::symbolic::{Alphabet, Sft, Symbol, Word};

/// First `n` digits of `1 2 3 ..` written in base `b` and concatenated.
pub fn champernowne(b: usize, n: usize) -> Result<Word> {
    if b < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    let alphabet = Alphabet::new(b)?;
    let mut out = Vec::with_capacity(n);
    let mut digits = Vec::new();
    let mut k: u64 = 1;
    while out.len() < n {
        digits.clear();
        let mut v = k;
        while v > 0 {
            digits.push((v % b as u64) as Symbol);
            v /= b as u64;
        }
        out.extend(digits.iter().rev().take(n - out.len()));
        k += 1;
    }
    Word::new(alphabet, out)
}

/// Binary Sturmian word `s_N = floor((N+1)/phi) - floor(N/phi)`, `N = 1..=count`.
pub fn sturmian(count: usize) -> Result<Word> {
    let mut out = Vec::with_capacity(count);
    let mut prev = floor_n_over_phi(1).ok_or(Error::Overflow("sturmian index"))?;
    for n in 1..=count as u64 {
        let next = floor_n_over_phi(n + 1).ok_or(Error::Overflow("sturmian index"))?;
        out.push((next - prev) as Symbol);
        prev = next;
    }
    Word::new(Alphabet::binary(), out)
}

/// Which positions of a word to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// Binary word; keeps positions holding 1.
    Indicator(Word),
    /// Strictly increasing positions.
    Indices(Vec<usize>),
}

impl Selector {
    pub fn indices(&self) -> Result<Vec<usize>> {
        match self {
            Selector::Indicator(w) => {
                w.check_alphabet(Alphabet::binary())?;
                Ok(w.symbols()
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s == 1)
                    .map(|(i, _)| i)
                    .collect())
            }
            Selector::Indices(v) => {
                if v.windows(2).any(|p| p[0] >= p[1]) {
                    return Err(Error::InvalidArgument("selector indices must increase".into()));
                }
                Ok(v.clone())
            }
        }
    }
}

/// The subsequence of `x` at the selected positions.
pub fn select(x: &Word, sel: &Selector) -> Result<Word> {
    let idx = sel.indices()?;
    if let Some(&bad) = idx.iter().find(|&&i| i >= x.len()) {
        return Err(Error::IndexOutOfRange { index: bad, len: x.len() });
    }
    Word::new(x.alphabet(), idx.iter().map(|&i| x.symbols()[i]).collect())
}

/// `H_k / k` in bits, `H_k` the entropy of the depth-`k` block frequencies.
pub fn block_entropy(w: &Word, k: usize) -> Result<f64> {
    let d = empirical_measure(w, k)?;
    let h: f64 = d
        .level(k)?
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(h / k as f64)
}

/// Largest `|freq(B) - b^-j|` over blocks of length `j <= k`.
pub fn normality_deviation(w: &Word, k: usize) -> Result<f64> {
    let d = empirical_measure(w, k)?;
    let q = w.alphabet().size() as f64;
    let mut worst: f64 = 0.0;
    for j in 1..=k {
        let uniform = q.powi(-(j as i32));
        for &p in d.level(j)? {
            worst = worst.max((p - uniform).abs());
        }
    }
    Ok(worst)
}

/// Finite-block entropy reading of the "completely deterministic" property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyProxy {
    pub k: usize,
    pub entropy_rate: f64,
    pub threshold: f64,
    pub deterministic: bool,
}

/// Evaluates `H_k / k` at `k = floor(log_b n) / 2` against `threshold`.
pub fn entropy_proxy(w: &Word, threshold: f64) -> Result<EntropyProxy> {
    let b = w.alphabet().size().max(2) as f64;
    let k = (((w.len().max(1) as f64).log(b).floor() as usize) / 2).max(1);
    let entropy_rate = block_entropy(w, k)?;
    Ok(EntropyProxy {
        k,
        entropy_rate,
        threshold,
        deterministic: entropy_rate <= threshold,
    })
}

/// Digits of the fractional part of `0.x + 0.y`, with the positions an
/// incoming carry from beyond the truncation would change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseSum {
    pub digits: Word,
    /// The maximal run of `b - 1` digits ending at the last position.
    pub unresolved: Vec<usize>,
}

impl BaseSum {
    pub fn is_resolved(&self, i: usize) -> bool {
        self.unresolved.binary_search(&i).is_err()
    }
}

pub fn add_base_b(x: &Word, y: &Word, b: usize) -> Result<BaseSum> {
    if b < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let alphabet = Alphabet::new(b)?;
    x.check_alphabet(x.alphabet())?;
    for w in [x, y] {
        if let Some(&d) = w.symbols().iter().find(|&&d| d as usize >= b) {
            return Err(Error::SymbolOutOfRange { symbol: d, size: b });
        }
    }
    let n = x.len();
    let mut digits = vec![0 as Symbol; n];
    let mut carry = 0u64;
    for i in (0..n).rev() {
        let s = x.symbols()[i] as u64 + y.symbols()[i] as u64 + carry;
        digits[i] = (s % b as u64) as Symbol;
        carry = s / b as u64;
    }
    let top = (b - 1) as Symbol;
    let run = digits.iter().rev().take_while(|&&d| d == top).count();
    Ok(BaseSum {
        digits: Word::new(alphabet, digits)?,
        unresolved: (n - run..n).collect(),
    })
}

/// Selection of a fair-coin word along a Sturmian indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeissDemo {
    pub len: usize,
    pub selected_len: usize,
    pub depth: usize,
    pub selected_deviation: f64,
    pub selector_entropy: EntropyProxy,
}

pub fn weiss_demo(len: usize, depth: usize, seed: u64) -> Result<WeissDemo> {
    let fair = TargetMeasure::uniform(Alphabet::binary());
    let x = sample_word(&fair, len, &mut stream(seed, "weiss/x"))?;
    let sel = sturmian(len)?;
    let selected = select(&x, &Selector::Indicator(sel.clone()))?;
    Ok(WeissDemo {
        len,
        selected_len: selected.len(),
        depth,
        selected_deviation: normality_deviation(&selected, depth)?,
        selector_entropy: entropy_proxy(&sel, 0.05)?,
    })
}

/// A normal `x` lifted along the diagonal joining of a fair-coin indicator
/// `y`; selecting `x` along `y` picks mostly ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KamaeDemo {
    pub len: usize,
    pub horizon: usize,
    pub x_deviation: f64,
    pub selected_len: usize,
    pub selected_deviation: f64,
    pub agreement_with_selector: f64,
    pub selector_entropy: EntropyProxy,
}

/// Schedule used by [`kamae_demo`]: long blocks keep the filler share small.
pub fn kamae_schedule() -> ScheduleConfig {
    ScheduleConfig {
        first_block: 32,
        ..ScheduleConfig::default()
    }
}

pub fn kamae_demo(len: usize, seed: u64) -> Result<KamaeDemo> {
    let fair = TargetMeasure::uniform(Alphabet::binary());
    let y = sample_word(&fair, len, &mut stream(seed, "kamae/y"))?;
    let xi = TargetMeasure::diagonal(fair.clone());
    let checkpoints = [len / 10, len - len / 10];
    let out = lift_pair(&y, &checkpoints, &xi, &fair, &Sft::full(Alphabet::binary()), &kamae_schedule())?;
    let horizon = out.x.len();
    let indicator = y.prefix(horizon)?;
    let selected = select(&out.x, &Selector::Indicator(indicator.clone()))?;
    Ok(KamaeDemo {
        len,
        horizon,
        x_deviation: normality_deviation(&out.x, 2)?,
        selected_len: selected.len(),
        selected_deviation: normality_deviation(&selected, 1)?,
        agreement_with_selector: out.report.agreement_with_y.unwrap_or(0.0),
        selector_entropy: entropy_proxy(&indicator, 0.05)?,
    })
}
