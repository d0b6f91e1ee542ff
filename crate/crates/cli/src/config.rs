//! Run configurations and the word/SFT sources they reference.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use genlift::experiments::{champernowne, sturmian};
use genlift::lift::ScheduleConfig;
use genlift::rng::{sample_word, stream};
use genlift::symbolic::SftFile;
use genlift::{Alphabet, Sft, TargetMeasure, Word};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0xD0D0;

fn binary() -> usize {
    2
}

/// An SFT given inline or as a path to an SFT file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SftSource {
    Inline(SftFile),
    Path(PathBuf),
}

impl Default for SftSource {
    fn default() -> Self {
        SftSource::Inline(SftFile::from(&Sft::full(Alphabet::binary())))
    }
}

impl SftSource {
    pub fn load(&self) -> Result<Sft> {
        let file = match self {
            SftSource::Inline(f) => f.clone(),
            SftSource::Path(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing SFT file {}", p.display()))?
            }
        };
        Ok(Sft::try_from(file)?)
    }

    fn rebase(&mut self, dir: &Path) {
        if let SftSource::Path(p) = self {
            *p = dir.join(&*p);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WordSource {
    File {
        path: PathBuf,
        #[serde(default = "binary")]
        alphabet_size: usize,
    },
    Sturmian {
        len: usize,
    },
    Champernowne {
        base: usize,
        len: usize,
    },
    /// Sampled from a measure with the run seed; `stream` names the RNG stream.
    Sample {
        measure: TargetMeasure,
        len: usize,
        #[serde(default)]
        stream: Option<String>,
    },
    Constant {
        symbol: u32,
        len: usize,
        #[serde(default = "binary")]
        alphabet_size: usize,
    },
    Concat {
        parts: Vec<WordSource>,
    },
}

impl WordSource {
    pub fn load(&self, seed: u64, role: &str) -> Result<Word> {
        Ok(match self {
            WordSource::File { path, alphabet_size } => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Word::parse(&text, Alphabet::new(*alphabet_size)?)
                    .with_context(|| format!("parsing word file {}", path.display()))?
            }
            WordSource::Sturmian { len } => sturmian(*len)?,
            WordSource::Champernowne { base, len } => champernowne(*base, *len)?,
            WordSource::Sample { measure, len, stream: name } => {
                let name = name.clone().unwrap_or_else(|| role.to_string());
                sample_word(measure, *len, &mut stream(seed, &name))?
            }
            WordSource::Constant { symbol, len, alphabet_size } => {
                Word::constant(Alphabet::new(*alphabet_size)?, *symbol, *len)?
            }
            WordSource::Concat { .. } => {
                let parts = self.load_parts(seed, role)?;
                let Some((first, rest)) = parts.split_first() else {
                    bail!("concat needs at least one part");
                };
                let mut w = first.clone();
                for p in rest {
                    w = w.concat(p)?;
                }
                w
            }
        })
    }

    /// The parts of a concatenation, or the word itself.
    pub fn load_parts(&self, seed: u64, role: &str) -> Result<Vec<Word>> {
        match self {
            WordSource::Concat { parts } => parts
                .iter()
                .enumerate()
                .map(|(i, p)| p.load(seed, &format!("{role}/{i}")))
                .collect(),
            _ => Ok(vec![self.load(seed, role)?]),
        }
    }

    fn rebase(&mut self, dir: &Path) {
        match self {
            WordSource::File { path, .. } => *path = dir.join(&*path),
            WordSource::Concat { parts } => parts.iter_mut().for_each(|p| p.rebase(dir)),
            _ => {}
        }
    }
}

/// The joining `xi` on pairs `(x, y)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JoiningSpec {
    /// `mu x nu`; without `nu`, the empirical measure of `y` at `nu_depth`.
    Product {
        #[serde(default)]
        nu: Option<TargetMeasure>,
        #[serde(default)]
        nu_depth: Option<usize>,
    },
    Diagonal,
    Measure {
        measure: TargetMeasure,
    },
}

/// `None` disables a check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftTolerances {
    /// Largest pair distance to `xi` at the last adjusted checkpoint.
    pub pair: Option<f64>,
    /// Largest distance of `x` to `mu` over the report scales.
    pub x: Option<f64>,
    /// Smallest fraction of positions where `x` and `y` agree.
    pub agreement: Option<f64>,
}

impl Default for LiftTolerances {
    fn default() -> Self {
        Self {
            pair: Some(0.08),
            x: Some(0.05),
            agreement: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    #[serde(default)]
    pub sft: SftSource,
    pub y: WordSource,
    #[serde(default)]
    pub mu: Option<TargetMeasure>,
    pub joining: JoiningSpec,
    pub checkpoints: Vec<usize>,
    #[serde(default = "ScheduleConfig::lift_default")]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: LiftTolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenericizeTolerances {
    /// Largest output distance to `mu` over the report scales.
    pub distance: Option<f64>,
    /// Smallest density of the agreement set at each checkpoint.
    pub agreement: Option<f64>,
}

impl Default for GenericizeTolerances {
    fn default() -> Self {
        Self {
            distance: Some(0.1),
            agreement: Some(0.8),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericizeConfig {
    #[serde(default)]
    pub sft: SftSource,
    pub x0: WordSource,
    #[serde(default)]
    pub mu: Option<TargetMeasure>,
    /// Defaults to the ends of the parts of a concatenated `x0` that are
    /// listed in `typical_parts`.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default)]
    pub typical_parts: Option<Vec<usize>>,
    #[serde(default = "ScheduleConfig::genericize_default")]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: GenericizeTolerances,
}

fn six() -> usize {
    6
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillateConfig {
    #[serde(default)]
    pub sft: SftSource,
    pub mu: TargetMeasure,
    pub nu: TargetMeasure,
    #[serde(default = "six")]
    pub stages: usize,
    /// Fail unless every block end shows the sought sign of `A_n - 1` or `A_n`.
    #[serde(default = "yes")]
    pub require_alternation: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkersConfig {
    pub block_lengths: Vec<usize>,
    pub count: usize,
    /// Measure sampled for the relative-generation check.
    pub measure: TargetMeasure,
    pub depth: usize,
    pub tolerance: Option<f64>,
}

impl Default for MarkersConfig {
    fn default() -> Self {
        Self {
            block_lengths: vec![1, 2, 3, 5],
            count: 10_000,
            measure: TargetMeasure::uniform(Alphabet::binary()),
            depth: 2,
            tolerance: Some(0.02),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalityConfig {
    pub len: usize,
    pub weiss_depth: usize,
    pub weiss_tolerance: Option<f64>,
    pub kamae: bool,
    pub kamae_selected_min: Option<f64>,
    pub kamae_x_max: Option<f64>,
    /// Bases whose Champernowne words are reported, without tolerance.
    pub champernowne_bases: Vec<usize>,
    pub depths: Vec<usize>,
}

impl Default for NormalityConfig {
    fn default() -> Self {
        Self {
            len: 1_000_000,
            weiss_depth: 3,
            weiss_tolerance: Some(0.01),
            kamae: true,
            kamae_selected_min: Some(0.2),
            kamae_x_max: Some(0.02),
            champernowne_bases: vec![2, 10],
            depths: vec![1, 2, 3],
        }
    }
}

/// Reads a config file as JSON. A report written by a previous run is
/// accepted too: its embedded configuration and seed are returned.
pub fn load_value(path: &Path) -> Result<(serde_json::Value, Option<u64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut seed = None;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("resolved_config") && obj.contains_key("seed") {
            seed = obj.get("seed").and_then(|s| s.as_u64());
            value = obj.remove("resolved_config").expect("checked");
        }
    }
    Ok((value, seed))
}

/// Deserializes a config and resolves its file references against `dir`.
pub fn parse<T: serde::de::DeserializeOwned + Rebase>(value: serde_json::Value, dir: &Path) -> Result<T> {
    let mut cfg: T = serde_json::from_value(value).context("invalid config")?;
    let dir = std::path::absolute(dir).with_context(|| format!("resolving {}", dir.display()))?;
    cfg.rebase(&dir);
    Ok(cfg)
}

/// Resolves relative file references against the config's directory.
pub trait Rebase {
    fn rebase(&mut self, dir: &Path);
}

impl Rebase for LiftConfig {
    fn rebase(&mut self, dir: &Path) {
        self.sft.rebase(dir);
        self.y.rebase(dir);
    }
}

impl Rebase for GenericizeConfig {
    fn rebase(&mut self, dir: &Path) {
        self.sft.rebase(dir);
        self.x0.rebase(dir);
    }
}

impl Rebase for OscillateConfig {
    fn rebase(&mut self, dir: &Path) {
        self.sft.rebase(dir);
    }
}

impl Rebase for MarkersConfig {
    fn rebase(&mut self, _dir: &Path) {}
}

impl Rebase for NormalityConfig {
    fn rebase(&mut self, _dir: &Path) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_sources() {
        let src: WordSource = serde_json::from_str(
            r#"{"kind":"concat","parts":[{"kind":"sturmian","len":8},{"kind":"constant","symbol":0,"len":3}]}"#,
        )
        .unwrap();
        assert_eq!(src.load(1, "w").unwrap().to_text(), "10110101000");
        assert_eq!(src.load_parts(1, "w").unwrap().len(), 2);
        let s: WordSource = serde_json::from_str(
            r#"{"kind":"sample","measure":{"kind":"Bernoulli","params":[0.5,0.5]},"len":20}"#,
        )
        .unwrap();
        assert_eq!(s.load(3, "a").unwrap(), s.load(3, "a").unwrap());
        assert_ne!(s.load(3, "a").unwrap(), s.load(4, "a").unwrap());
    }

    #[test]
    fn sft_sources() {
        let s: SftSource = serde_json::from_str(r#"{"alphabet_size":2,"transitions":[[1,1],[1,0]]}"#).unwrap();
        assert_eq!(s.load().unwrap().transition_rows(), Sft::golden_mean().transition_rows());
        let p: SftSource = serde_json::from_str(r#""missing.json""#).unwrap();
        assert!(p.load().is_err());
        assert!(SftSource::default().load().unwrap().is_full());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<MarkersConfig, _> = serde_json::from_str(r#"{"count": 5, "bogus": 1}"#);
        assert!(r.is_err());
        let m: MarkersConfig = serde_json::from_str(r#"{"count": 5}"#).unwrap();
        assert_eq!(m.block_lengths, vec![1, 2, 3, 5]);
    }
}
