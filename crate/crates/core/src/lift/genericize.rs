//! Turning a point that is quasi-generic along checkpoints into a generic
//! one, while copying it on a set of large upper density.

use std::collections::BTreeMap;

use serde::Serialize;

use super::blocks::classify_against;
use super::report::{power_of_two_scales, prefix_distances, stability_checks, ScaleDistance, StabilityCheck};
use super::schedule::{LiftSchedule, ScheduleConfig};
use crate::error::{Error, Result};
use crate::measures::TargetMeasure;
use crate::specification::{shadow, Segment, Specification};
use crate::symbolic::{connection_gap, validate_word, Sft, Symbol, Word};

/// Index set stored as sorted, disjoint half-open ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AgreementSet {
    ranges: Vec<(usize, usize)>,
}

impl AgreementSet {
    pub fn full(len: usize) -> Self {
        Self {
            ranges: if len > 0 { vec![(0, len)] } else { Vec::new() },
        }
    }

    fn push(&mut self, start: usize, end: usize) {
        if start >= end {
            return;
        }
        match self.ranges.last_mut() {
            Some(last) if last.1 == start => last.1 = end,
            _ => self.ranges.push((start, end)),
        }
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    pub fn contains(&self, n: usize) -> bool {
        let k = self.ranges.partition_point(|r| r.1 <= n);
        self.ranges.get(k).is_some_and(|r| r.0 <= n)
    }

    /// Number of members below `n`.
    pub fn count_below(&self, n: usize) -> usize {
        self.ranges
            .iter()
            .map(|&(a, b)| b.min(n).saturating_sub(a))
            .sum()
    }

    pub fn density_below(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.count_below(n) as f64 / n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericizeStage {
    pub k: usize,
    pub checkpoint: usize,
    pub segment_len: usize,
    pub segments: usize,
    pub bad_segments: usize,
    pub threshold: f64,
    pub replacement: Word,
    pub barycenter_distance: f64,
    pub input_distance: f64,
    pub output_distance: f64,
    pub agreement_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericizeReport {
    pub horizon: usize,
    pub g0: usize,
    pub metric_depth: usize,
    pub schedule: Option<LiftSchedule>,
    pub stages: Vec<GenericizeStage>,
    pub scales: Vec<ScaleDistance>,
    pub stability: Vec<StabilityCheck>,
    pub agreement_density: f64,
    pub exact_on_agreement: bool,
}

#[derive(Debug, Clone)]
pub struct GenericizeOutcome {
    pub word: Word,
    pub agreement: AgreementSet,
    pub report: GenericizeReport,
}

struct Piece {
    start: usize,
    end: usize,
    full: bool,
}

/// Segments `x0` stage by stage, drops the first `g0` symbols of every
/// segment, replaces segments that are far from `mu` by the
/// most frequent close one, and shadows the result.
pub fn genericize(
    x0: &Word,
    checkpoints: &[usize],
    mu: &TargetMeasure,
    config: &ScheduleConfig,
    sft: &Sft,
) -> Result<GenericizeOutcome> {
    let alphabet = sft.alphabet();
    x0.check_alphabet(alphabet)?;
    if mu.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch {
            expected: alphabet.size(),
            found: mu.alphabet().size(),
        });
    }
    let depth = config.metric_depth;
    if alphabet.size() == 1 {
        return Ok(GenericizeOutcome {
            word: x0.clone(),
            agreement: AgreementSet::full(x0.len()),
            report: GenericizeReport {
                horizon: x0.len(),
                g0: 0,
                metric_depth: depth,
                schedule: None,
                stages: Vec::new(),
                scales: Vec::new(),
                stability: Vec::new(),
                agreement_density: 1.0,
                exact_on_agreement: true,
            },
        });
    }
    let g0 = connection_gap(sft)?.g0;
    if !validate_word(sft, x0)? {
        return Err(Error::Inadmissible);
    }
    let usable: Vec<usize> = checkpoints.iter().copied().filter(|&n| n <= x0.len()).collect();
    if usable.len() != checkpoints.len() {
        return Err(Error::IndexOutOfRange {
            index: checkpoints.iter().copied().max().unwrap_or(0),
            len: x0.len(),
        });
    }
    let sched = LiftSchedule::build(config.clone(), g0, &usable, alphabet.size())?;
    let target = mu.cylinders(depth)?;

    let input = prefix_distances(
        x0,
        &target,
        &sched.stages.iter().map(|s| s.checkpoint).collect::<Vec<_>>(),
    )?;
    for (s, d) in sched.stages.iter().zip(&input) {
        if d.distance > config.input_tolerance {
            return Err(Error::NotQuasiGeneric {
                checkpoint: s.checkpoint,
                distance: d.distance,
                tolerance: config.input_tolerance,
            });
        }
    }

    let mut segments = Vec::new();
    let mut agreement = AgreementSet::default();
    let mut stage_info = Vec::new();
    let mut start = 0usize;
    let last_stage = sched.stages.len() - 1;
    for (i, stage) in sched.stages.iter().enumerate() {
        let seg_len = stage.padded_len;
        let end = if i == last_stage {
            x0.len()
        } else {
            let span = stage.checkpoint.saturating_sub(start);
            (start + span.div_ceil(seg_len) * seg_len).min(x0.len())
        };
        let mut pieces = Vec::new();
        let mut p = start;
        while p < end {
            let q = (p + seg_len).min(end);
            if p + g0 < q {
                pieces.push(Piece {
                    start: p + g0,
                    end: q,
                    full: q - p == seg_len,
                });
            }
            p = q;
        }
        let classifiable: Vec<usize> = (0..pieces.len())
            .filter(|&j| pieces[j].end - pieces[j].start >= depth)
            .collect();
        let words: Vec<Word> = classifiable
            .iter()
            .map(|&j| x0.slice(pieces[j].start, pieces[j].end))
            .collect::<Result<_>>()?;
        let threshold = 2.0 * stage.epsilon;
        let class = if words.is_empty() {
            None
        } else {
            Some(classify_against(&words, &target, threshold)?)
        };
        let mut is_bad = vec![false; pieces.len()];
        let mut replacement: Option<Word> = None;
        let mut barycenter = 0.0;
        if let Some(class) = &class {
            barycenter = class.barycenter_distance;
            for &b in &class.bad {
                is_bad[classifiable[b]] = true;
            }
            // most frequent good full-length piece; ties: closer to mu, then lexicographic
            let mut tally: BTreeMap<&[Symbol], (usize, f64)> = BTreeMap::new();
            for &g in &class.good {
                if pieces[classifiable[g]].full {
                    let e = tally.entry(words[g].symbols()).or_insert((0, class.distances[g]));
                    e.0 += 1;
                }
            }
            let best = tally
                .iter()
                .min_by(|a, b| {
                    b.1 .0
                        .cmp(&a.1 .0)
                        .then(a.1 .1.total_cmp(&b.1 .1))
                        .then(a.0.cmp(b.0))
                })
                .map(|(w, _)| w.to_vec());
            replacement = best.map(|s| Word::new(alphabet, s)).transpose()?;
        }
        let bad_count = is_bad.iter().filter(|&&b| b).count();
        if bad_count > 0 && replacement.is_none() {
            return Err(Error::NoGoodSegment { stage: stage.k });
        }
        for (j, piece) in pieces.iter().enumerate() {
            let word = if is_bad[j] {
                let r = replacement.as_ref().expect("checked above");
                let len = piece.end - piece.start;
                if len == r.len() {
                    r.clone()
                } else {
                    // partial final piece; an unfinished replacement would be a
                    // shorter admissible word
                    r.prefix(len)?
                }
            } else {
                agreement.push(piece.start, piece.end);
                x0.slice(piece.start, piece.end)?
            };
            segments.push(Segment::new(piece.start, word));
        }
        stage_info.push((i, pieces.len(), bad_count, threshold, replacement, barycenter));
        start = end;
    }

    let spec = Specification::new(sft.clone(), segments)?;
    let word = shadow(&spec, x0.len() - 1)?;
    let exact_on_agreement = agreement
        .ranges()
        .iter()
        .all(|&(a, b)| word.symbols()[a..b] == x0.symbols()[a..b]);

    let checkpoints_used: Vec<usize> = sched.stages.iter().map(|s| s.checkpoint).collect();
    let output = prefix_distances(&word, &target, &checkpoints_used)?;
    let mut stages = Vec::new();
    for (i, segs, bad, threshold, replacement, barycenter) in stage_info {
        let st = &sched.stages[i];
        stages.push(GenericizeStage {
            k: st.k,
            checkpoint: st.checkpoint,
            segment_len: st.padded_len,
            segments: segs,
            bad_segments: bad,
            threshold,
            replacement: replacement.unwrap_or_else(|| Word::empty(alphabet)),
            barycenter_distance: barycenter,
            input_distance: input[i].distance,
            output_distance: output[i].distance,
            agreement_density: agreement.density_below(st.checkpoint),
        });
    }
    let scale_list = power_of_two_scales(config.min_report_scale.max(depth), word.len());
    let scales = prefix_distances(&word, &target, &scale_list)?;
    let stability = stability_checks(&word, &target, &checkpoints_used)?;
    Ok(GenericizeOutcome {
        report: GenericizeReport {
            horizon: word.len(),
            g0,
            metric_depth: depth,
            schedule: Some(sched),
            stages,
            scales,
            stability,
            agreement_density: agreement.density_below(word.len()),
            exact_on_agreement,
        },
        word,
        agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_word, stream};
    use crate::symbolic::Alphabet;

    #[test]
    fn agreement_set_counts() {
        let mut m = AgreementSet::default();
        m.push(0, 4);
        m.push(4, 6);
        m.push(10, 12);
        assert_eq!(m.ranges(), &[(0, 6), (10, 12)]);
        assert_eq!(m.count_below(11), 7);
        assert!(m.contains(5) && !m.contains(6) && m.contains(10));
    }

    #[test]
    fn generic_input_is_mostly_kept() {
        let fair = TargetMeasure::uniform(Alphabet::binary());
        let x0 = sample_word(&fair, 12_000, &mut stream(3, "genericize")).unwrap();
        let out = genericize(
            &x0,
            &[1_000, 10_000],
            &fair,
            &ScheduleConfig::genericize_default(),
            &Sft::full(Alphabet::binary()),
        )
        .unwrap();
        let last = out.report.stages.last().unwrap();
        assert!(last.agreement_density >= 0.9);
        assert!(last.output_distance <= 0.05);
        assert!(out.report.exact_on_agreement);
        assert_eq!(out.word.len(), x0.len());
    }

    #[test]
    fn constant_stretch_is_replaced_on_golden_mean() {
        let sft = Sft::golden_mean();
        let mu = TargetMeasure::markov_from_matrix(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let mut rng = stream(5, "golden");
        let mut parts = sample_word(&mu, 4_000, &mut rng).unwrap().into_symbols();
        parts.extend(std::iter::repeat_n(0, 1_000));
        parts.extend(sample_word(&mu, 20_000, &mut rng).unwrap().into_symbols());
        let x0 = Word::new(Alphabet::binary(), parts).unwrap();
        let out = genericize(&x0, &[4_000, 20_000], &mu, &ScheduleConfig::genericize_default(), &sft).unwrap();
        assert!(validate_word(&sft, &out.word).unwrap());
        assert!(out.report.stages[1].bad_segments > 0);
        assert!(out.report.scales.iter().all(|s| s.distance <= 0.1));
        assert!(out.report.exact_on_agreement);
    }

    #[test]
    fn unary_alphabet_is_untouched() {
        let unary = Alphabet::new(1).unwrap();
        let x0 = Word::constant(unary, 0, 50).unwrap();
        let out = genericize(
            &x0,
            &[10, 40],
            &TargetMeasure::uniform(unary),
            &ScheduleConfig::default(),
            &Sft::full(unary),
        )
        .unwrap();
        assert_eq!(out.word, x0);
        assert_eq!(out.agreement.count_below(50), 50);
    }

    #[test]
    fn far_input_is_rejected() {
        let fair = TargetMeasure::uniform(Alphabet::binary());
        let zeros = Word::constant(Alphabet::binary(), 0, 5_000).unwrap();
        let err = genericize(
            &zeros,
            &[1_000, 4_000],
            &fair,
            &ScheduleConfig::genericize_default(),
            &Sft::full(Alphabet::binary()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotQuasiGeneric { .. }));

        let loose = ScheduleConfig {
            input_tolerance: 1.0,
            ..ScheduleConfig::genericize_default()
        };
        let err = genericize(&zeros, &[1_000, 4_000], &fair, &loose, &Sft::full(Alphabet::binary())).unwrap_err();
        // the constant block passes the loose first stage and fails the second
        assert_eq!(err.to_string(), "stage 2 admits no μ-typical segment");
    }
}
