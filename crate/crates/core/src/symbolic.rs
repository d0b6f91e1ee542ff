//! Alphabets, words and one-sided subshifts of finite type.
//!
//! An [`Sft`] is given by a 0/1 transition matrix. Mixing (primitive) SFTs
//! have the specification property with a constant gap: any two symbols can
//! be joined by an admissible filler of every length `g >= g0`, which makes
//! shadowing exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u32;

/// Finite alphabet `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { size })
    }

    pub const fn binary() -> Self {
        Self { size: 2 }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as usize) < self.size
    }

    /// Alphabet of pairs `(x, y)` encoded as `x * |Y| + y`.
    pub fn product(&self, other: &Alphabet) -> Result<Alphabet> {
        let size = self
            .size
            .checked_mul(other.size)
            .ok_or(Error::Overflow("product alphabet size"))?;
        Alphabet::new(size)
    }

    /// Number of words of length `len`, if it fits in a `usize`.
    pub fn word_count(&self, len: usize) -> Option<usize> {
        self.size.checked_pow(u32::try_from(len).ok()?)
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.size
    }
}

/// A finite word over an [`Alphabet`]; the symbolic stand-in for an orbit segment.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                size: alphabet.size(),
            });
        }
        Ok(Self { alphabet, symbols })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            symbols: Vec::new(),
        }
    }

    pub fn constant(alphabet: Alphabet, symbol: Symbol, len: usize) -> Result<Self> {
        Word::new(alphabet, vec![symbol; len])
    }

    /// Parses a word from its text form: digit characters for alphabets of
    /// size at most 10, otherwise a JSON array of integers.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('[') {
            let symbols: Vec<Symbol> = serde_json::from_str(text)
                .map_err(|e| Error::InvalidArgument(format!("word array: {e}")))?;
            return Word::new(alphabet, symbols);
        }
        let symbols = text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::InvalidArgument(format!("invalid word character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(alphabet, symbols)
    }

    pub fn to_text(&self) -> String {
        if self.alphabet.size() <= 10 {
            self.symbols
                .iter()
                .map(|&s| char::from_digit(s, 10).expect("digit"))
                .collect()
        } else {
            serde_json::to_string(&self.symbols).expect("serializable")
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Symbol> {
        self.symbols.get(i).copied()
    }

    pub fn first(&self) -> Option<Symbol> {
        self.symbols.first().copied()
    }

    pub fn last(&self) -> Option<Symbol> {
        self.symbols.last().copied()
    }

    /// Subword `self[start..end]`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Word> {
        if start > end || end > self.len() {
            return Err(Error::IndexOutOfRange {
                index: end,
                len: self.len(),
            });
        }
        Ok(Word {
            alphabet: self.alphabet,
            symbols: self.symbols[start..end].to_vec(),
        })
    }

    pub fn prefix(&self, len: usize) -> Result<Word> {
        self.slice(0, len)
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.check_alphabet(other.alphabet)?;
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word {
            alphabet: self.alphabet,
            symbols,
        })
    }

    pub fn check_alphabet(&self, alphabet: Alphabet) -> Result<()> {
        if self.alphabet != alphabet {
            return Err(Error::AlphabetMismatch {
                expected: alphabet.size(),
                found: self.alphabet.size(),
            });
        }
        Ok(())
    }

    /// Pairs two equal-length words into a word over the product alphabet.
    pub fn zip_pair(x: &Word, y: &Word) -> Result<Word> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        let alphabet = x.alphabet.product(&y.alphabet)?;
        let ny = y.alphabet.size() as Symbol;
        let symbols = x
            .symbols
            .iter()
            .zip(&y.symbols)
            .map(|(&a, &b)| a * ny + b)
            .collect();
        Ok(Word { alphabet, symbols })
    }

    /// Splits a product-alphabet word into its two coordinates.
    pub fn unzip_pair(&self, x_alphabet: Alphabet, y_alphabet: Alphabet) -> Result<(Word, Word)> {
        self.check_alphabet(x_alphabet.product(&y_alphabet)?)?;
        let ny = y_alphabet.size() as Symbol;
        let (xs, ys) = self.symbols.iter().map(|&s| (s / ny, s % ny)).unzip();
        Ok((
            Word {
                alphabet: x_alphabet,
                symbols: xs,
            },
            Word {
                alphabet: y_alphabet,
                symbols: ys,
            },
        ))
    }

    /// Base-`|A|` code of the word, first symbol most significant. Code order
    /// equals lexicographic order among words of equal length.
    pub fn code(&self) -> Option<u64> {
        word_code(&self.symbols, self.alphabet.size())
    }
}

pub(crate) fn word_code(symbols: &[Symbol], q: usize) -> Option<u64> {
    let q = q as u64;
    symbols.iter().try_fold(0u64, |acc, &s| {
        acc.checked_mul(q)?.checked_add(s as u64)
    })
}

/// Inverse of [`word_code`] for a fixed length.
pub(crate) fn decode_word(mut code: u64, q: usize, len: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % q as u64) as Symbol;
        code /= q as u64;
    }
    out
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({:?})", self.to_text())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Words serialize as their text form; reading one back needs the alphabet,
/// so deserialization goes through [`Word::parse`].
impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

/// One-sided subshift of finite type given by a 0/1 transition matrix.
///
/// Boolean powers of the matrix are precomputed up to the primitivity
/// exponent, so connecting-word queries are table lookups.
#[derive(Clone)]
pub struct Sft {
    alphabet: Alphabet,
    transitions: Vec<bool>,
    /// `powers[t]` is the support of `A^t`; `powers[0]` is the identity.
    powers: Vec<Vec<bool>>,
    /// Least `t` with `A^t > 0`, when the matrix is primitive.
    exponent: Option<usize>,
}

impl Sft {
    pub fn new(alphabet: Alphabet, transitions: Vec<Vec<bool>>) -> Result<Self> {
        let n = alphabet.size();
        if transitions.len() != n || transitions.iter().any(|row| row.len() != n) {
            return Err(Error::MalformedMatrix(format!("expected a {n}x{n} matrix")));
        }
        let flat: Vec<bool> = transitions.into_iter().flatten().collect();
        for i in 0..n {
            if !(0..n).any(|j| flat[i * n + j]) {
                return Err(Error::MalformedMatrix(format!("symbol {i} has no successor")));
            }
            if !(0..n).any(|j| flat[j * n + i]) {
                return Err(Error::MalformedMatrix(format!("symbol {i} has no predecessor")));
            }
        }

        let mut identity = vec![false; n * n];
        for i in 0..n {
            identity[i * n + i] = true;
        }
        let mut powers = vec![identity];
        let mut exponent = None;
        // Wielandt: a primitive n x n matrix has A^t > 0 for t = (n-1)^2 + 1.
        let bound = (n - 1) * (n - 1) + 1;
        for t in 1..=bound {
            let next = bool_mul(&powers[t - 1], &flat, n);
            let positive = next.iter().all(|&b| b);
            powers.push(next);
            if positive {
                exponent = Some(t);
                break;
            }
        }
        Ok(Self {
            alphabet,
            transitions: flat,
            powers,
            exponent,
        })
    }

    pub fn full(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Sft::new(alphabet, vec![vec![true; n]; n]).expect("full shift is well formed")
    }

    /// Binary shift forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Sft::new(
            Alphabet::binary(),
            vec![vec![true, true], vec![true, false]],
        )
        .expect("golden mean shift is well formed")
    }

    pub fn from_01(alphabet_size: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let alphabet = Alphabet::new(alphabet_size)?;
        let mut matrix = Vec::with_capacity(rows.len());
        for row in rows {
            let mut out = Vec::with_capacity(row.len());
            for &v in row {
                match v {
                    0 => out.push(false),
                    1 => out.push(true),
                    other => {
                        return Err(Error::MalformedMatrix(format!(
                            "entries must be 0 or 1, found {other}"
                        )))
                    }
                }
            }
            matrix.push(out);
        }
        Sft::new(alphabet, matrix)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        let n = self.alphabet.size();
        self.transitions[a as usize * n + b as usize]
    }

    pub fn transition_rows(&self) -> Vec<Vec<u8>> {
        let n = self.alphabet.size();
        (0..n)
            .map(|i| (0..n).map(|j| self.transitions[i * n + j] as u8).collect())
            .collect()
    }

    pub fn is_primitive(&self) -> bool {
        self.exponent.is_some()
    }

    pub fn is_full(&self) -> bool {
        self.transitions.iter().all(|&b| b)
    }

    /// Whether a path of exactly `steps` transitions leads from `a` to `b`.
    /// Requires a primitive matrix for `steps` beyond the stored powers.
    fn reaches(&self, steps: usize, a: Symbol, b: Symbol) -> bool {
        let n = self.alphabet.size();
        match self.powers.get(steps) {
            Some(p) => p[a as usize * n + b as usize],
            None => self.exponent.is_some(),
        }
    }

    fn require_mixing(&self) -> Result<usize> {
        self.exponent.ok_or(Error::NotMixing)
    }
}

impl fmt::Debug for Sft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sft")
            .field("alphabet_size", &self.alphabet.size())
            .field("transitions", &self.transition_rows())
            .finish()
    }
}

impl PartialEq for Sft {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.transitions == other.transitions
    }
}

fn bool_mul(a: &[bool], b: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    out[i * n + j] |= b[k * n + j];
                }
            }
        }
    }
    out
}

/// JSON form of an SFT definition file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SftFile {
    pub alphabet_size: usize,
    pub transitions: Vec<Vec<u8>>,
}

impl TryFrom<SftFile> for Sft {
    type Error = Error;
    fn try_from(f: SftFile) -> Result<Self> {
        Sft::from_01(f.alphabet_size, &f.transitions)
    }
}

impl From<&Sft> for SftFile {
    fn from(s: &Sft) -> Self {
        SftFile {
            alphabet_size: s.alphabet.size(),
            transitions: s.transition_rows(),
        }
    }
}

impl Serialize for Sft {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SftFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sft {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = SftFile::deserialize(deserializer)?;
        Sft::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Uniform connection gap of a mixing SFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionGap {
    pub g0: usize,
}

impl ConnectionGap {
    /// Re-checks the finite certificate: every symbol pair has a filler of
    /// every length in `[g0, g0 + |A|]`.
    pub fn verify(&self, sft: &Sft) -> bool {
        let n = sft.alphabet.size() as Symbol;
        (self.g0..=self.g0 + n as usize).all(|g| {
            (0..n).all(|a| (0..n).all(|b| connect(sft, a, b, g).is_ok()))
        })
    }
}

/// True iff every adjacent pair of `w` is an allowed transition.
pub fn validate_word(sft: &Sft, w: &Word) -> Result<bool> {
    w.check_alphabet(sft.alphabet)?;
    Ok(w.symbols().windows(2).all(|p| sft.allows(p[0], p[1])))
}

/// Smallest `g0` such that every pair of symbols is joined by admissible
/// fillers of every length `g >= g0`.
pub fn connection_gap(sft: &Sft) -> Result<ConnectionGap> {
    let exponent = sft.require_mixing()?;
    // A filler of length g from a to b is a path with g + 1 transitions.
    // Once A^t > 0 all higher powers are positive (every row has a 1).
    Ok(ConnectionGap { g0: exponent - 1 })
}

/// Lexicographically least word `w` of length `g` with `a w b` admissible.
pub fn connect(sft: &Sft, a: Symbol, b: Symbol, g: usize) -> Result<Word> {
    let alphabet = sft.alphabet;
    for s in [a, b] {
        if !alphabet.contains(s) {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                size: alphabet.size(),
            });
        }
    }
    sft.require_mixing()?;
    if !sft.reaches(g + 1, a, b) {
        return Err(Error::NoFiller { from: a, to: b, gap: g });
    }
    let n = alphabet.size() as Symbol;
    let mut out = Vec::with_capacity(g);
    let mut prev = a;
    for i in 0..g {
        let remaining = g - i;
        let c = (0..n)
            .find(|&c| sft.allows(prev, c) && sft.reaches(remaining, c, b))
            .expect("reachability table guarantees a continuation");
        out.push(c);
        prev = c;
    }
    Ok(Word {
        alphabet,
        symbols: out,
    })
}

/// Lexicographically least admissible word of length `len` that can be
/// followed by `next`.
pub fn lead_in(sft: &Sft, next: Symbol, len: usize) -> Result<Word> {
    sft.require_mixing()?;
    let n = sft.alphabet.size() as Symbol;
    let mut out: Vec<Symbol> = Vec::with_capacity(len);
    for i in 0..len {
        let remaining = len - i;
        let c = (0..n)
            .find(|&c| {
                out.last().is_none_or(|&p| sft.allows(p, c)) && sft.reaches(remaining, c, next)
            })
            .ok_or(Error::NoFiller {
                from: next,
                to: next,
                gap: len,
            })?;
        out.push(c);
    }
    Ok(Word {
        alphabet: sft.alphabet,
        symbols: out,
    })
}

/// Lexicographically least admissible continuation of length `len` after `prev`.
pub fn lead_out(sft: &Sft, prev: Symbol, len: usize) -> Word {
    let n = sft.alphabet.size() as Symbol;
    let mut out = Vec::with_capacity(len);
    let mut p = prev;
    for _ in 0..len {
        let c = (0..n)
            .find(|&c| sft.allows(p, c))
            .expect("every symbol has a successor");
        out.push(c);
        p = c;
    }
    Word {
        alphabet: sft.alphabet,
        symbols: out,
    }
}
