//! Specifications: admissible words pinned at prescribed positions, and their
//! exact shadowing by a single admissible word on a mixing SFT.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{CylinderDistribution, PrefixProfile};
use crate::symbolic::{connect, lead_in, lead_out, validate_word, Sft, Word};

/// One specified orbit segment: `word` occupies `start .. start + len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub word: Word,
}

impl Segment {
    pub fn new(start: usize, word: Word) -> Self {
        Self { start, word }
    }

    /// Last index covered (inclusive).
    pub fn end(&self) -> usize {
        self.start + self.word.len() - 1
    }
}

/// Ordered, disjoint segments of admissible words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Specification {
    sft: Sft,
    segments: Vec<Segment>,
}

impl Specification {
    pub fn new(sft: Sft, segments: Vec<Segment>) -> Result<Self> {
        for (i, seg) in segments.iter().enumerate() {
            seg.word.check_alphabet(sft.alphabet())?;
            if seg.word.is_empty() {
                return Err(Error::InvalidSpecification(format!("segment {i} is empty")));
            }
            if !validate_word(&sft, &seg.word)? {
                return Err(Error::InvalidSpecification(format!(
                    "segment {i} is not admissible"
                )));
            }
            if i > 0 && seg.start <= segments[i - 1].end() {
                return Err(Error::InvalidSpecification(format!(
                    "segment {i} overlaps or precedes segment {}",
                    i - 1
                )));
            }
        }
        Ok(Self { sft, segments })
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Gaps `g_N = a_{N+1} - b_N - 1` between consecutive segments.
    pub fn gaps(&self) -> Vec<usize> {
        self.segments
            .windows(2)
            .map(|p| p[1].start - p[0].end() - 1)
            .collect()
    }

    /// Size of the domain `D`.
    pub fn domain_size(&self) -> usize {
        self.segments.iter().map(|s| s.word.len()).sum()
    }

    /// Number of domain indices in `[0, n)`.
    pub fn domain_count_below(&self, n: usize) -> usize {
        let k = self.segments.partition_point(|s| s.end() < n);
        let full: usize = self.segments[..k].iter().map(|s| s.word.len()).sum();
        let partial = self
            .segments
            .get(k)
            .map_or(0, |s| n.saturating_sub(s.start).min(s.word.len()));
        full + partial
    }

    pub fn contains(&self, n: usize) -> bool {
        let k = self.segments.partition_point(|s| s.end() < n);
        self.segments.get(k).is_some_and(|s| s.start <= n)
    }

    /// The specification restricted to indices `< n`; a straddling segment is cut.
    pub fn truncated(&self, n: usize) -> Result<Specification> {
        let mut segments = Vec::new();
        for s in &self.segments {
            if s.start >= n {
                break;
            }
            let keep = (n - s.start).min(s.word.len());
            segments.push(Segment::new(s.start, s.word.prefix(keep)?));
        }
        Ok(Specification {
            sft: self.sft.clone(),
            segments,
        })
    }
}

#[derive(Deserialize)]
struct SegmentFile {
    start: usize,
    word: String,
}

#[derive(Deserialize)]
struct SpecificationFile {
    sft: Sft,
    segments: Vec<SegmentFile>,
}

impl<'de> Deserialize<'de> for Specification {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = SpecificationFile::deserialize(deserializer)?;
        let alphabet = file.sft.alphabet();
        let segments = file
            .segments
            .into_iter()
            .map(|s| Word::parse(&s.word, alphabet).map(|w| Segment::new(s.start, w)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Specification::new(file.sft, segments).map_err(D::Error::custom)
    }
}

/// Required gaps and tolerances per stage of a specification.
///
/// Stage `k` covers gaps `g_N` with `N` in `(N_{k-1}, N_k]` (1-based, `N_0 = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSchedule {
    pub boundaries: Vec<usize>,
    pub min_gaps: Vec<usize>,
    pub tolerances: Vec<f64>,
}

impl GapSchedule {
    pub fn new(boundaries: Vec<usize>, min_gaps: Vec<usize>, tolerances: Vec<f64>) -> Result<Self> {
        let s = Self {
            boundaries,
            min_gaps,
            tolerances,
        };
        s.validate()?;
        Ok(s)
    }

    /// A single stage with gap `g` covering `gap_count` gaps, tolerance `eps1`.
    pub fn constant(g: usize, gap_count: usize) -> Self {
        Self {
            boundaries: vec![gap_count],
            min_gaps: vec![g],
            tolerances: vec![0.5],
        }
    }

    /// Stages with default tolerances `eps1 * 2^(1-k)`.
    pub fn staged(boundaries: Vec<usize>, min_gaps: Vec<usize>, eps1: f64) -> Result<Self> {
        let tolerances = (0..boundaries.len()).map(|k| eps1 * 0.5f64.powi(k as i32)).collect();
        GapSchedule::new(boundaries, min_gaps, tolerances)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.boundaries.len();
        if self.min_gaps.len() != n || self.tolerances.len() != n {
            return Err(Error::InvalidSchedule("stage arrays differ in length".into()));
        }
        if self.boundaries.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidSchedule("stage boundaries must increase".into()));
        }
        if self.tolerances.iter().any(|&e| e.is_nan() || e <= 0.0) {
            return Err(Error::InvalidSchedule("tolerances must be positive".into()));
        }
        if self.tolerances.iter().sum::<f64>().is_infinite() {
            return Err(Error::InvalidSchedule("tolerances must be summable".into()));
        }
        Ok(())
    }

    /// Stage index (0-based) containing gap `N` (1-based).
    pub fn stage_of(&self, n: usize) -> Option<usize> {
        let k = self.boundaries.partition_point(|&b| b < n);
        (k < self.boundaries.len()).then_some(k)
    }
}

/// Outcome of [`validate_gaps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapCheck {
    pub ok: bool,
    /// Least violating gap index `N` (1-based).
    pub first_violation: Option<usize>,
}

/// Checks `g_N >= m_k` for every gap, stage by stage.
pub fn validate_gaps(s: &Specification, sched: &GapSchedule) -> Result<GapCheck> {
    if s.is_empty() {
        return Err(Error::InvalidSpecification("no segments".into()));
    }
    sched.validate()?;
    for (i, g) in s.gaps().into_iter().enumerate() {
        let n = i + 1;
        let k = sched.stage_of(n).ok_or_else(|| {
            Error::InvalidSchedule(format!("gap {n} lies beyond the last stage boundary"))
        })?;
        if g < sched.min_gaps[k] {
            return Ok(GapCheck {
                ok: false,
                first_violation: Some(n),
            });
        }
    }
    Ok(GapCheck {
        ok: true,
        first_violation: None,
    })
}

/// Pooled sliding-window frequencies over segments; windows stay inside a segment.
pub fn spec_empirical(s: &Specification, depth: usize) -> Result<CylinderDistribution> {
    if let Some(short) = s.segments.iter().find(|seg| seg.word.len() < depth) {
        return Err(Error::DepthShortfall {
            requested: depth,
            available: short.word.len(),
        });
    }
    let mut profile = PrefixProfile::new(s.sft.alphabet(), depth)?;
    for seg in &s.segments {
        profile.break_segment();
        profile.extend(seg.word.symbols());
    }
    profile.snapshot()
}

/// A single admissible word of length `horizon + 1` that equals every segment
/// on its interval; gaps are filled by [`connect`], the ends by the
/// lexicographically least admissible lead-in and continuation.
pub fn shadow(s: &Specification, horizon: usize) -> Result<Word> {
    let sft = &s.sft;
    let alphabet = sft.alphabet();
    let Some(first) = s.segments.first() else {
        let mut w = lead_in(sft, 0, horizon)?.into_symbols();
        w.push(0);
        return Word::new(alphabet, w);
    };
    let last = s.segments.last().expect("nonempty");
    if horizon < last.end() {
        return Err(Error::IndexOutOfRange {
            index: last.end(),
            len: horizon + 1,
        });
    }
    let mut out = Vec::with_capacity(horizon + 1);
    let head = first.word.first().expect("segments are nonempty");
    out.extend_from_slice(lead_in(sft, head, first.start)?.symbols());
    for (i, seg) in s.segments.iter().enumerate() {
        if i > 0 {
            let prev = &s.segments[i - 1];
            let g = seg.start - prev.end() - 1;
            let a = prev.word.last().expect("nonempty");
            let b = seg.word.first().expect("nonempty");
            out.extend_from_slice(connect(sft, a, b, g)?.symbols());
        }
        out.extend_from_slice(seg.word.symbols());
    }
    let tail = lead_out(sft, last.word.last().expect("nonempty"), horizon - last.end());
    out.extend_from_slice(tail.symbols());
    Word::new(alphabet, out)
}
