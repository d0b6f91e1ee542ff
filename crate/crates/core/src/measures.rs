//! Finite cylinder representations of measures on shift spaces.
//!
//! A [`CylinderDistribution`] stores, for every depth `j <= K`, the mass of
//! each length-`j` cylinder in a dense table indexed by the word's base-`q`
//! code. [`TargetMeasure`] evaluates cylinder masses of the reference measures
//! (Bernoulli, Markov, joinings, stored empirical data).
//!
//! Distances use the weak* metric
//! `d(m1, m2) = sum_n 2^-n |m1(B_n) - m2(B_n)|`, where `B_1, B_2, ..` lists all
//! cylinders of depth `<= K`, depth-major and lexicographic within a depth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{decode_word, word_code, Alphabet, Symbol, Word};

/// Largest dense table allowed at a single depth.
pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

const SUM_TOLERANCE: f64 = 1e-9;

fn dense_len(alphabet: Alphabet, depth: usize) -> Result<usize> {
    alphabet
        .word_count(depth)
        .filter(|&n| n <= MAX_DENSE_ENTRIES)
        .ok_or(Error::DepthTooLarge {
            depth,
            alphabet: alphabet.size(),
        })
}

/// Block frequencies at depths `1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderDistribution {
    alphabet: Alphabet,
    levels: Vec<Vec<f64>>,
}

impl CylinderDistribution {
    /// Builds a distribution from dense per-depth tables (`levels[j-1]` has
    /// `q^j` entries). Each level must be nonnegative and sum to 1.
    pub fn new(alphabet: Alphabet, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidProbability("max depth must be at least 1".into()));
        }
        for (i, level) in levels.iter().enumerate() {
            let depth = i + 1;
            let expected = dense_len(alphabet, depth)?;
            if level.len() != expected {
                return Err(Error::InvalidProbability(format!(
                    "depth {depth} table has {} entries, expected {expected}",
                    level.len()
                )));
            }
            if level.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidProbability(format!(
                    "depth {depth} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = level.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidProbability(format!(
                    "depth {depth} sums to {sum}"
                )));
            }
        }
        Ok(Self { alphabet, levels })
    }

    /// Builds all depths from a top-level table by summing out trailing symbols.
    pub fn from_top_level(alphabet: Alphabet, depth: usize, top: Vec<f64>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidProbability("max depth must be at least 1".into()));
        }
        let q = alphabet.size();
        let mut levels = vec![top];
        for _ in 1..depth {
            let upper = levels.last().expect("nonempty");
            let lower: Vec<f64> = upper.chunks(q).map(|c| c.iter().sum()).collect();
            levels.push(lower);
        }
        levels.reverse();
        CylinderDistribution::new(alphabet, levels)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn max_depth(&self) -> usize {
        self.levels.len()
    }

    /// Dense table at depth `j` (1-based).
    pub fn level(&self, depth: usize) -> Result<&[f64]> {
        if depth == 0 || depth > self.max_depth() {
            return Err(Error::DepthShortfall {
                requested: depth,
                available: self.max_depth(),
            });
        }
        Ok(&self.levels[depth - 1])
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Mass of the cylinder given by `symbols`; the empty word has mass 1.
    pub fn get(&self, symbols: &[Symbol]) -> Result<f64> {
        if symbols.is_empty() {
            return Ok(1.0);
        }
        if let Some(&bad) = symbols.iter().find(|&&s| !self.alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                size: self.alphabet.size(),
            });
        }
        let level = self.level(symbols.len())?;
        let code = word_code(symbols, self.alphabet.size()).expect("dense index fits");
        Ok(level[code as usize])
    }

    pub fn truncate(&self, depth: usize) -> Result<Self> {
        if depth == 0 || depth > self.max_depth() {
            return Err(Error::DepthShortfall {
                requested: depth,
                available: self.max_depth(),
            });
        }
        Ok(Self {
            alphabet: self.alphabet,
            levels: self.levels[..depth].to_vec(),
        })
    }

    /// Marginal on one coordinate of a distribution over a product alphabet.
    pub fn coordinate_marginal(
        &self,
        x_alphabet: Alphabet,
        y_alphabet: Alphabet,
        coordinate: Coordinate,
    ) -> Result<Self> {
        let pair = x_alphabet.product(&y_alphabet)?;
        if pair != self.alphabet {
            return Err(Error::AlphabetMismatch {
                expected: pair.size(),
                found: self.alphabet.size(),
            });
        }
        let (target, ny) = match coordinate {
            Coordinate::First => (x_alphabet, y_alphabet.size() as Symbol),
            Coordinate::Second => (y_alphabet, y_alphabet.size() as Symbol),
        };
        let mut levels = Vec::with_capacity(self.max_depth());
        for (i, level) in self.levels.iter().enumerate() {
            let depth = i + 1;
            let mut out = vec![0.0; dense_len(target, depth)?];
            for (code, &mass) in level.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let symbols = decode_word(code as u64, pair.size(), depth);
                let projected: Vec<Symbol> = symbols
                    .iter()
                    .map(|&s| match coordinate {
                        Coordinate::First => s / ny,
                        Coordinate::Second => s % ny,
                    })
                    .collect();
                let idx = word_code(&projected, target.size()).expect("fits") as usize;
                out[idx] += mass;
            }
            levels.push(out);
        }
        CylinderDistribution::new(target, levels)
    }

    /// Arithmetic mean of distributions sharing alphabet and depth.
    pub fn mean(items: &[CylinderDistribution]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidArgument("mean of no distributions".into()))?;
        let mut levels: Vec<Vec<f64>> = first.levels.iter().map(|l| vec![0.0; l.len()]).collect();
        for d in items {
            if d.alphabet != first.alphabet || d.max_depth() != first.max_depth() {
                return Err(Error::InvalidArgument("mean over mismatched distributions".into()));
            }
            for (acc, level) in levels.iter_mut().zip(&d.levels) {
                for (a, v) in acc.iter_mut().zip(level) {
                    *a += v;
                }
            }
        }
        let n = items.len() as f64;
        for level in &mut levels {
            for v in level.iter_mut() {
                *v /= n;
            }
        }
        Ok(Self {
            alphabet: first.alphabet,
            levels,
        })
    }
}

/// Which coordinate of a pair alphabet to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    First,
    Second,
}

#[derive(Serialize, Deserialize)]
struct LevelFile {
    depth: usize,
    entries: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    alphabet_size: usize,
    max_depth: usize,
    levels: Vec<LevelFile>,
}

impl Serialize for CylinderDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let q = self.alphabet.size();
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, level)| {
                let depth = i + 1;
                let entries = level
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(code, &v)| {
                        let w = Word::new(self.alphabet, decode_word(code as u64, q, depth))
                            .expect("decoded symbols are in range");
                        (w.to_text(), v)
                    })
                    .collect();
                LevelFile { depth, entries }
            })
            .collect();
        DistributionFile {
            alphabet_size: q,
            max_depth: self.max_depth(),
            levels,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CylinderDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = DistributionFile::deserialize(deserializer)?;
        let alphabet = Alphabet::new(file.alphabet_size).map_err(D::Error::custom)?;
        let mut levels = Vec::with_capacity(file.max_depth);
        for depth in 1..=file.max_depth {
            let len = dense_len(alphabet, depth).map_err(D::Error::custom)?;
            let mut table = vec![0.0; len];
            let level = file
                .levels
                .iter()
                .find(|l| l.depth == depth)
                .ok_or_else(|| D::Error::custom(format!("missing depth {depth}")))?;
            for (key, &v) in &level.entries {
                let w = Word::parse(key, alphabet).map_err(D::Error::custom)?;
                if w.len() != depth {
                    return Err(D::Error::custom(format!("entry {key} listed at depth {depth}")));
                }
                table[w.code().expect("fits") as usize] = v;
            }
            levels.push(table);
        }
        CylinderDistribution::new(alphabet, levels).map_err(D::Error::custom)
    }
}

/// Reference measures whose cylinder masses can be evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum TargetMeasure {
    Bernoulli(Vec<f64>),
    Markov {
        stationary: Vec<f64>,
        matrix: Vec<Vec<f64>>,
    },
    /// Independent joining; pair symbols are `x * |Y| + y`.
    ProductJoining(Box<TargetMeasure>, Box<TargetMeasure>),
    /// Diagonal self-joining: both coordinates equal.
    DiagonalJoining(Box<TargetMeasure>),
    Empirical(CylinderDistribution),
}

impl TargetMeasure {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        let t = TargetMeasure::Bernoulli(p);
        t.validate()?;
        Ok(t)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let q = alphabet.size();
        TargetMeasure::Bernoulli(vec![1.0 / q as f64; q])
    }

    /// Point mass on the constant sequence `s s s ...`.
    pub fn point_mass(alphabet: Alphabet, s: Symbol) -> Result<Self> {
        let mut p = vec![0.0; alphabet.size()];
        *p.get_mut(s as usize).ok_or(Error::SymbolOutOfRange {
            symbol: s,
            size: alphabet.size(),
        })? = 1.0;
        Ok(TargetMeasure::Bernoulli(p))
    }

    pub fn markov(stationary: Vec<f64>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let t = TargetMeasure::Markov { stationary, matrix };
        t.validate()?;
        Ok(t)
    }

    /// Markov measure with the stationary vector computed from the matrix.
    pub fn markov_from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::EmptyAlphabet);
        }
        // power iteration on the lazy chain (I + P) / 2, which is aperiodic
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let mut next = vec![0.0; n];
            for i in 0..n {
                next[i] += 0.5 * pi[i];
                for j in 0..n {
                    next[j] += 0.5 * pi[i] * matrix[i].get(j).copied().unwrap_or(0.0);
                }
            }
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-15 {
                break;
            }
        }
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= s);
        TargetMeasure::markov(pi, matrix)
    }

    pub fn product(mu: TargetMeasure, nu: TargetMeasure) -> Self {
        TargetMeasure::ProductJoining(Box::new(mu), Box::new(nu))
    }

    pub fn diagonal(mu: TargetMeasure) -> Self {
        TargetMeasure::DiagonalJoining(Box::new(mu))
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            TargetMeasure::Bernoulli(p) => Alphabet::new(p.len()).unwrap_or(Alphabet::binary()),
            TargetMeasure::Markov { stationary, .. } => {
                Alphabet::new(stationary.len()).unwrap_or(Alphabet::binary())
            }
            TargetMeasure::ProductJoining(a, b) => a
                .alphabet()
                .product(&b.alphabet())
                .expect("validated product alphabet"),
            TargetMeasure::DiagonalJoining(base) => {
                let a = base.alphabet();
                a.product(&a).expect("validated product alphabet")
            }
            TargetMeasure::Empirical(d) => d.alphabet(),
        }
    }

    /// Checks well-formedness recursively.
    pub fn validate(&self) -> Result<()> {
        fn check_vector(p: &[f64], what: &str) -> Result<()> {
            if p.is_empty() {
                return Err(Error::EmptyAlphabet);
            }
            if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidProbability(format!("{what} has a negative entry")));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProbability(format!("{what} sums to {s}")));
            }
            Ok(())
        }
        match self {
            TargetMeasure::Bernoulli(p) => check_vector(p, "Bernoulli vector"),
            TargetMeasure::Markov { stationary, matrix } => {
                let n = stationary.len();
                check_vector(stationary, "stationary vector")?;
                if matrix.len() != n {
                    return Err(Error::InvalidProbability("matrix size mismatch".into()));
                }
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::InvalidProbability("matrix size mismatch".into()));
                    }
                    check_vector(row, &format!("matrix row {i}"))?;
                }
                for j in 0..n {
                    let v: f64 = (0..n).map(|i| stationary[i] * matrix[i][j]).sum();
                    if (v - stationary[j]).abs() > 1e-9 {
                        return Err(Error::InvalidProbability(format!(
                            "stationary vector is not invariant at state {j}"
                        )));
                    }
                }
                Ok(())
            }
            TargetMeasure::ProductJoining(a, b) => {
                a.validate()?;
                b.validate()?;
                a.alphabet().product(&b.alphabet()).map(|_| ())
            }
            TargetMeasure::DiagonalJoining(base) => base.validate(),
            TargetMeasure::Empirical(_) => Ok(()),
        }
    }

    /// Mass of the cylinder `[b]`.
    pub fn cylinder(&self, b: &[Symbol]) -> Result<f64> {
        let alphabet = self.alphabet();
        if let Some(&bad) = b.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                size: alphabet.size(),
            });
        }
        if b.is_empty() {
            return Ok(1.0);
        }
        match self {
            TargetMeasure::Bernoulli(p) => Ok(b.iter().map(|&s| p[s as usize]).product()),
            TargetMeasure::Markov { stationary, matrix } => {
                let mut m = stationary[b[0] as usize];
                for w in b.windows(2) {
                    if m == 0.0 {
                        break;
                    }
                    m *= matrix[w[0] as usize][w[1] as usize];
                }
                Ok(m)
            }
            TargetMeasure::ProductJoining(mu, nu) => {
                let ny = nu.alphabet().size() as Symbol;
                let xs: Vec<Symbol> = b.iter().map(|&s| s / ny).collect();
                let mx = mu.cylinder(&xs)?;
                if mx == 0.0 {
                    return Ok(0.0);
                }
                let ys: Vec<Symbol> = b.iter().map(|&s| s % ny).collect();
                Ok(mx * nu.cylinder(&ys)?)
            }
            TargetMeasure::DiagonalJoining(base) => {
                let q = base.alphabet().size() as Symbol;
                if b.iter().any(|&s| s / q != s % q) {
                    return Ok(0.0);
                }
                let xs: Vec<Symbol> = b.iter().map(|&s| s / q).collect();
                base.cylinder(&xs)
            }
            TargetMeasure::Empirical(d) => d.get(b),
        }
    }

    /// Cylinder masses at depths `1..=depth`.
    pub fn cylinders(&self, depth: usize) -> Result<CylinderDistribution> {
        if let TargetMeasure::Empirical(d) = self {
            return d.truncate(depth);
        }
        let alphabet = self.alphabet();
        let q = alphabet.size();
        let mut levels = Vec::with_capacity(depth);
        for j in 1..=depth {
            let len = dense_len(alphabet, j)?;
            let level = (0..len as u64)
                .map(|code| self.cylinder(&decode_word(code, q, j)))
                .collect::<Result<Vec<_>>>()?;
            levels.push(level);
        }
        CylinderDistribution::new(alphabet, levels)
    }

    /// The component alphabets when this is a structural joining.
    pub fn joining_factors(&self) -> Option<(Alphabet, Alphabet)> {
        match self {
            TargetMeasure::ProductJoining(a, b) => Some((a.alphabet(), b.alphabet())),
            TargetMeasure::DiagonalJoining(base) => Some((base.alphabet(), base.alphabet())),
            _ => None,
        }
    }
}

/// Sliding-window block frequencies of `w` at depths `1..=depth`.
pub fn empirical_measure(w: &Word, depth: usize) -> Result<CylinderDistribution> {
    if depth == 0 || depth > w.len() {
        return Err(Error::DepthShortfall {
            requested: depth,
            available: w.len(),
        });
    }
    let mut profile = PrefixProfile::new(w.alphabet(), depth)?;
    profile.extend(w.symbols());
    profile.snapshot()
}

/// Running sliding-window counts, snapshotted at chosen prefix lengths.
#[derive(Debug, Clone)]
pub struct PrefixProfile {
    alphabet: Alphabet,
    depth: usize,
    counts: Vec<Vec<u64>>,
    totals: Vec<u64>,
    window: Vec<Symbol>,
    seen: usize,
}

impl PrefixProfile {
    pub fn new(alphabet: Alphabet, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::DepthShortfall {
                requested: 0,
                available: 0,
            });
        }
        let counts = (1..=depth)
            .map(|j| dense_len(alphabet, j).map(|n| vec![0u64; n]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alphabet,
            depth,
            counts,
            totals: vec![0; depth],
            window: Vec::with_capacity(depth),
            seen: 0,
        })
    }

    pub fn push(&mut self, s: Symbol) {
        if self.window.len() == self.depth {
            self.window.remove(0);
        }
        self.window.push(s);
        self.seen += 1;
        let q = self.alphabet.size() as u64;
        // windows ending at this symbol, of every length up to the depth
        let mut code = 0u64;
        let mut scale = 1u64;
        for (j, &sym) in self.window.iter().rev().enumerate() {
            code += sym as u64 * scale;
            scale *= q;
            self.counts[j][code as usize] += 1;
            self.totals[j] += 1;
        }
    }

    /// Starts a new segment: later windows never reach back across the break.
    pub fn break_segment(&mut self) {
        self.window.clear();
    }

    pub fn extend(&mut self, symbols: &[Symbol]) {
        for &s in symbols {
            self.push(s);
        }
    }

    /// Number of symbols consumed so far.
    pub fn len(&self) -> usize {
        self.seen
    }

    pub fn is_empty(&self) -> bool {
        self.seen == 0
    }

    /// Empirical distribution of all windows counted so far.
    pub fn snapshot(&self) -> Result<CylinderDistribution> {
        if self.totals[self.depth - 1] == 0 {
            return Err(Error::DepthShortfall {
                requested: self.depth,
                available: self.seen,
            });
        }
        let levels = self
            .counts
            .iter()
            .zip(&self.totals)
            .map(|(c, &windows)| c.iter().map(|&n| n as f64 / windows as f64).collect())
            .collect();
        CylinderDistribution::new(self.alphabet, levels)
    }
}

/// Empirical distributions of the prefixes of `w` of each requested length.
pub fn prefix_empiricals(w: &Word, depth: usize, prefix_lengths: &[usize]) -> Result<Vec<CylinderDistribution>> {
    let mut order: Vec<usize> = (0..prefix_lengths.len()).collect();
    order.sort_by_key(|&i| prefix_lengths[i]);
    let mut out = vec![None; prefix_lengths.len()];
    let mut profile = PrefixProfile::new(w.alphabet(), depth)?;
    for i in order {
        let n = prefix_lengths[i];
        if n > w.len() {
            return Err(Error::IndexOutOfRange { index: n, len: w.len() });
        }
        let consumed = profile.len();
        profile.extend(&w.symbols()[consumed..n]);
        out[i] = Some(profile.snapshot()?);
    }
    Ok(out.into_iter().map(|d| d.expect("filled")).collect())
}

/// Mass of cylinder `b` under `t`.
pub fn measure_cylinder(t: &TargetMeasure, b: &Word) -> Result<f64> {
    b.check_alphabet(t.alphabet())?;
    t.cylinder(b.symbols())
}

/// Conditional probabilities `xi(B x C) / nu(C)` over the listed first-coordinate
/// blocks, where `nu(C) = sum_B xi(B x C)`.
pub fn conditional_joint(xi: &TargetMeasure, c: &Word, bs: &[Word]) -> Result<Vec<f64>> {
    let Some(first) = bs.first() else {
        return Ok(Vec::new());
    };
    let x_alphabet = first.alphabet();
    let pair = x_alphabet.product(&c.alphabet())?;
    if pair != xi.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: xi.alphabet().size(),
            found: pair.size(),
        });
    }
    let joint = bs
        .iter()
        .map(|b| {
            b.check_alphabet(x_alphabet)?;
            if b.len() != c.len() {
                return Err(Error::LengthMismatch(b.len(), c.len()));
            }
            let pair_word = Word::zip_pair(b, c)?;
            xi.cylinder(pair_word.symbols())
        })
        .collect::<Result<Vec<_>>>()?;
    let nu_c: f64 = joint.iter().sum();
    if nu_c <= 0.0 {
        return Err(Error::NullConditioningBlock);
    }
    Ok(joint.into_iter().map(|v| v / nu_c).collect())
}

/// First-coordinate blocks `B` (in lexicographic order) with `xi(B x C) > 0`,
/// together with those joint masses. Prefixes of zero mass are pruned.
pub fn conditional_support(
    xi: &TargetMeasure,
    x_alphabet: Alphabet,
    c: &Word,
    limit: usize,
) -> Result<Vec<(Vec<Symbol>, f64)>> {
    let pair = x_alphabet.product(&c.alphabet())?;
    if pair != xi.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: xi.alphabet().size(),
            found: pair.size(),
        });
    }
    let ny = c.alphabet().size() as Symbol;
    let cs = c.symbols();
    let q = x_alphabet.size() as Symbol;
    let mut out = Vec::new();
    let mut pair_prefix: Vec<Symbol> = Vec::with_capacity(cs.len());
    fn dfs(
        xi: &TargetMeasure,
        cs: &[Symbol],
        q: Symbol,
        ny: Symbol,
        limit: usize,
        pair_prefix: &mut Vec<Symbol>,
        out: &mut Vec<(Vec<Symbol>, f64)>,
    ) -> Result<()> {
        let i = pair_prefix.len();
        if i == cs.len() {
            let mass = xi.cylinder(pair_prefix)?;
            let block = pair_prefix.iter().map(|&s| s / ny).collect();
            out.push((block, mass));
            if out.len() > limit {
                return Err(Error::SupportTooLarge(out.len()));
            }
            return Ok(());
        }
        for x in 0..q {
            pair_prefix.push(x * ny + cs[i]);
            if xi.cylinder(pair_prefix)? > 0.0 {
                dfs(xi, cs, q, ny, limit, pair_prefix, out)?;
            }
            pair_prefix.pop();
        }
        Ok(())
    }
    dfs(xi, cs, q, ny, limit, &mut pair_prefix, &mut out)?;
    Ok(out)
}

/// Truncation depth of the weak* metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub depth: usize,
}

impl MetricConfig {
    pub fn new(depth: usize) -> Self {
        Self { depth }
    }

    /// Weight `2^-n` of the `n`-th enumerated cylinder (1-based).
    pub fn weight(n: usize) -> f64 {
        0.5f64.powi(n as i32)
    }

    /// Cylinders in enumeration order: depth-major, lexicographic within depth.
    pub fn enumerate(&self, alphabet: Alphabet) -> Result<Vec<Word>> {
        let q = alphabet.size();
        let mut out = Vec::new();
        for j in 1..=self.depth {
            for code in 0..dense_len(alphabet, j)? as u64 {
                out.push(Word::new(alphabet, decode_word(code, q, j))?);
            }
        }
        Ok(out)
    }
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { depth: 3 }
    }
}

/// Truncated weak* distance; always in `[0, 1)`.
pub fn weakstar_distance(
    d1: &CylinderDistribution,
    d2: &CylinderDistribution,
    cfg: &MetricConfig,
) -> Result<f64> {
    if d1.alphabet != d2.alphabet {
        return Err(Error::AlphabetMismatch {
            expected: d1.alphabet.size(),
            found: d2.alphabet.size(),
        });
    }
    let available = d1.max_depth().min(d2.max_depth());
    if cfg.depth == 0 || cfg.depth > available {
        return Err(Error::DepthShortfall {
            requested: cfg.depth,
            available,
        });
    }
    let mut weight = 1.0;
    let mut total = 0.0;
    for j in 0..cfg.depth {
        for (a, b) in d1.levels[j].iter().zip(&d2.levels[j]) {
            weight *= 0.5;
            total += weight * (a - b).abs();
        }
    }
    Ok(total)
}

/// Image of the distribution under the shift: the depth-`j` mass of `b` is the
/// sum over symbols `a` of the depth-`(j+1)` mass of `a b`.
pub fn shift_pushforward(d: &CylinderDistribution) -> Result<CylinderDistribution> {
    if d.max_depth() < 2 {
        return Err(Error::DepthShortfall {
            requested: 2,
            available: d.max_depth(),
        });
    }
    let q = d.alphabet.size();
    let levels = (1..d.max_depth())
        .map(|j| {
            let upper = &d.levels[j];
            let width = upper.len() / q;
            (0..width)
                .map(|b| (0..q).map(|a| upper[a * width + b]).sum())
                .collect()
        })
        .collect();
    Ok(CylinderDistribution {
        alphabet: d.alphabet,
        levels,
    })
}

/// Mean of `d, T d, .., T^(n-1) d`, truncated to depth `K - n + 1`.
pub fn cesaro_average(d: &CylinderDistribution, n: usize) -> Result<CylinderDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("averaging length must be at least 1".into()));
    }
    if d.max_depth() < n {
        return Err(Error::DepthShortfall {
            requested: n,
            available: d.max_depth(),
        });
    }
    let out_depth = d.max_depth() - n + 1;
    let mut terms = Vec::with_capacity(n);
    let mut current = d.clone();
    for i in 0..n {
        terms.push(current.truncate(out_depth)?);
        if i + 1 < n {
            current = shift_pushforward(&current)?;
        }
    }
    CylinderDistribution::mean(&terms)
}

/// Distance between `d` and its shift image, at the metric's depth.
pub fn invariance_defect(d: &CylinderDistribution, cfg: &MetricConfig) -> Result<f64> {
    if d.max_depth() < cfg.depth + 1 {
        return Err(Error::DepthShortfall {
            requested: cfg.depth + 1,
            available: d.max_depth(),
        });
    }
    let pushed = shift_pushforward(d)?.truncate(cfg.depth)?;
    weakstar_distance(&pushed, &d.truncate(cfg.depth)?, cfg)
}

/// Distance from the empirical distribution of `w` to the target.
pub fn distance_to_target(w: &Word, target: &TargetMeasure, cfg: &MetricConfig) -> Result<f64> {
    let emp = empirical_measure(w, cfg.depth)?;
    weakstar_distance(&emp, &target.cylinders(cfg.depth)?, cfg)
}
