//! Lifting a quasi-generic `y` to a pair `(x, y)` that quasi-generates a
//! prescribed joining, with `x` generic for the first marginal.

use std::collections::BTreeMap;

use serde::Serialize;

use super::allocation::{interleave, pair_hash, rational_allocation, Allocation, AllocationEntry};
use super::markers::{relative_generation_distance, MarkerSequence};
use super::report::{power_of_two_scales, prefix_distances, stability_checks, ScaleDistance, StabilityCheck};
use super::schedule::{LiftSchedule, ScheduleConfig};
use crate::error::{Error, Result};
use crate::measures::{
    conditional_support, empirical_measure, weakstar_distance, Coordinate, CylinderDistribution,
    MetricConfig, TargetMeasure,
};
use crate::specification::{shadow, spec_empirical, Segment, Specification};
use crate::symbolic::{connection_gap, validate_word, Sft, Symbol, Word};

/// Marker layout of one stage.
///
/// Segment `N` of the stage is a block of length `l_k` placed at
/// `a_N + g0`; the conditioning block is read from `y` at the same place.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePlan {
    pub k: usize,
    pub markers: MarkerSequence,
    /// First marker of the next stage; the adjusted checkpoint.
    pub next: usize,
    /// Right shift applied at the junction with the previous stage.
    pub shift: usize,
}

/// Lays out markers stage by stage: stage `k` uses gap `L_k`, starts at the
/// first marker not taken by stage `k - 1`, and keeps markers below `n_k`.
pub fn plan_markers(sched: &LiftSchedule) -> Result<Vec<StagePlan>> {
    let g0 = sched.g0;
    let mut plans: Vec<StagePlan> = Vec::with_capacity(sched.stages.len());
    let mut offset = 0usize;
    for stage in &sched.stages {
        // least shift making the junction gap at least g0
        let shift = match plans.last() {
            None => 0,
            Some(prev) => {
                let prev_end = prev.markers.markers().last().expect("nonempty stage")
                    + sched.stages[prev.k - 1].padded_len;
                (0..=stage.block_len)
                    .find(|&j| offset + j + g0 >= prev_end + g0)
                    .ok_or_else(|| {
                        Error::InvalidSchedule(format!("stage {} cannot be joined", stage.k))
                    })?
            }
        };
        let start = offset + shift;
        if start >= stage.checkpoint {
            return Err(Error::InvalidSchedule(format!(
                "stage {} starts after its checkpoint",
                stage.k
            )));
        }
        let (markers, next) = MarkerSequence::window(stage.padded_len, start, stage.checkpoint)?;
        plans.push(StagePlan {
            k: stage.k,
            markers,
            next,
            shift,
        });
        offset = next;
    }
    Ok(plans)
}

/// Per-stage counters gathered while assembling.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageAssembly {
    pub markers: usize,
    pub distinct_conditioning_blocks: usize,
    pub largest_support: usize,
    /// Mean conditional mass removed by the good-block restriction.
    pub bad_mass_fraction: f64,
    /// Markers whose conditioning block had no good candidate.
    pub fallback_markers: usize,
    /// Markers with `B_N = C_N`.
    pub diagonal_markers: usize,
}

/// Output of [`build_lift_spec`].
#[derive(Debug, Clone)]
pub struct LiftSpec {
    pub specification: Specification,
    /// The pair segments `(B_N, C_N)`, same positions as the specification.
    pub pair_segments: Vec<Segment>,
    pub allocations: Vec<Allocation>,
    pub assembly: Vec<StageAssembly>,
}

/// Chooses the blocks `B_N` stage by stage so that, for each conditioning
/// block `C`, their counts realize `xi(. | C)` restricted to blocks within
/// `eps_k` of `mu`, rounded to multiples of `1 / m_C`.
pub fn build_lift_spec(
    y: &Word,
    xi: &TargetMeasure,
    mu: &TargetMeasure,
    sched: &LiftSchedule,
    sft: &Sft,
    plans: &[StagePlan],
) -> Result<LiftSpec> {
    let x_alphabet = sft.alphabet();
    let y_alphabet = y.alphabet();
    let pair_alphabet = x_alphabet.product(&y_alphabet)?;
    if xi.alphabet() != pair_alphabet {
        return Err(Error::AlphabetMismatch {
            expected: pair_alphabet.size(),
            found: xi.alphabet().size(),
        });
    }
    let depth = sched.metric_depth();
    let cfg = MetricConfig::new(depth);
    let target = mu.cylinders(depth)?;
    let g0 = sched.g0;

    let mut segments = Vec::new();
    let mut pair_segments = Vec::new();
    let mut allocations = Vec::new();
    let mut assembly = Vec::new();
    for (stage, plan) in sched.stages.iter().zip(plans) {
        let l = stage.block_len;
        let mut by_block: BTreeMap<&[Symbol], Vec<usize>> = BTreeMap::new();
        for &a in plan.markers.markers() {
            let s = a + g0;
            if s + l > y.len() {
                return Err(Error::IndexOutOfRange {
                    index: s + l - 1,
                    len: y.len(),
                });
            }
            by_block.entry(&y.symbols()[s..s + l]).or_default().push(s);
        }
        let mut good_cache: BTreeMap<Vec<Symbol>, bool> = BTreeMap::new();
        let mut entries = Vec::new();
        let mut stats = StageAssembly {
            markers: plan.markers.len(),
            distinct_conditioning_blocks: by_block.len(),
            ..StageAssembly::default()
        };
        let mut bad_mass_total = 0.0;
        let mut placed: Vec<(usize, Vec<Symbol>, &[Symbol])> = Vec::with_capacity(plan.markers.len());
        for (c_symbols, starts) in &by_block {
            let c = Word::new(y_alphabet, c_symbols.to_vec())?;
            let mut support = conditional_support(xi, x_alphabet, &c, sched.config.support_limit)?;
            support.sort_by_cached_key(|(b, _)| (pair_hash(b, c_symbols), b.clone()));
            let nu_c: f64 = support.iter().map(|(_, m)| m).sum();
            if nu_c.is_nan() || nu_c <= 0.0 {
                return Err(Error::NullConditioningBlock);
            }
            stats.largest_support = stats.largest_support.max(support.len());
            let mut good_mass = 0.0;
            let mut good = Vec::with_capacity(support.len());
            for (b, m) in &support {
                let ok = match good_cache.get(b) {
                    Some(&ok) => ok,
                    None => {
                        let w = Word::new(x_alphabet, b.clone())?;
                        if !validate_word(sft, &w)? {
                            return Err(Error::Inadmissible);
                        }
                        let d = weakstar_distance(&empirical_measure(&w, depth)?, &target, &cfg)?;
                        let ok = d <= stage.epsilon;
                        good_cache.insert(b.clone(), ok);
                        ok
                    }
                };
                good.push(ok);
                if ok {
                    good_mass += m;
                }
            }
            let fallback = good_mass.is_nan() || good_mass <= 0.0;
            let bad_mass = if fallback { 1.0 } else { 1.0 - good_mass / nu_c };
            let norm = if fallback { nu_c } else { good_mass };
            let p: Vec<f64> = support
                .iter()
                .zip(&good)
                .map(|((_, m), &ok)| if ok || fallback { m / norm } else { 0.0 })
                .collect();
            let counts = rational_allocation(&p, starts.len())?;
            let mut positive: Vec<(Vec<Symbol>, usize)> = support
                .iter()
                .zip(&counts)
                .filter(|(_, &r)| r > 0)
                .map(|((b, _), &r)| (b.clone(), r))
                .collect();
            positive.sort();
            let order = interleave(c_symbols, &positive);
            for (&s, &i) in starts.iter().zip(&order) {
                placed.push((s, positive[i].0.clone(), c_symbols));
            }
            bad_mass_total += bad_mass * starts.len() as f64;
            if fallback {
                stats.fallback_markers += starts.len();
            }
            entries.push(AllocationEntry {
                conditioning: c,
                visits: starts.len(),
                counts: positive
                    .into_iter()
                    .map(|(b, r)| Ok((Word::new(x_alphabet, b)?, r)))
                    .collect::<Result<_>>()?,
                bad_mass,
                fallback,
            });
        }
        placed.sort_by_key(|p| p.0);
        for (s, b, c) in placed {
            if b == c {
                stats.diagonal_markers += 1;
            }
            let pair: Vec<Symbol> = b
                .iter()
                .zip(c)
                .map(|(&x, &y)| x * y_alphabet.size() as Symbol + y)
                .collect();
            pair_segments.push(Segment::new(s, Word::new(pair_alphabet, pair)?));
            segments.push(Segment::new(s, Word::new(x_alphabet, b)?));
        }
        stats.bad_mass_fraction = if stats.markers > 0 {
            bad_mass_total / stats.markers as f64
        } else {
            0.0
        };
        allocations.push(Allocation {
            stage: stage.k,
            entries,
        });
        assembly.push(stats);
    }
    Ok(LiftSpec {
        specification: Specification::new(sft.clone(), segments)?,
        pair_segments,
        allocations,
        assembly,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftStageReport {
    pub k: usize,
    pub block_len: usize,
    pub padded_len: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub checkpoint: usize,
    pub adjusted_checkpoint: usize,
    pub shift: usize,
    /// `N_k`: markers used up to and including this stage.
    pub boundary: usize,
    pub assembly: StageAssembly,
    pub input_distance: f64,
    pub relative_generation_distance: f64,
    pub pair_distance: f64,
    pub x_distance: f64,
    pub domain_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftReport {
    pub horizon: usize,
    pub g0: usize,
    pub metric_depth: usize,
    pub schedule: LiftSchedule,
    pub stages: Vec<LiftStageReport>,
    pub x_scales: Vec<ScaleDistance>,
    pub pair_scales: Vec<ScaleDistance>,
    pub stability: Vec<StabilityCheck>,
    pub domain_density: f64,
    /// Largest difference between the first marginal of the pair statistics
    /// on the domain and the statistics of `x` on the domain.
    pub marginal_coherence_error: f64,
    /// Fraction of positions where `x` equals `y`, when the alphabets agree.
    pub agreement_with_y: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub x: Word,
    pub report: LiftReport,
    pub allocations: Vec<Allocation>,
    pub specification: Specification,
}

fn max_abs_diff(a: &CylinderDistribution, b: &CylinderDistribution) -> f64 {
    a.levels()
        .iter()
        .flatten()
        .zip(b.levels().iter().flatten())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// Builds `x` of length at least the last checkpoint such that `x` is close
/// to `mu` at every reported scale and `(x, y)` is close to `xi` at the
/// adjusted checkpoints.
pub fn lift_pair(
    y: &Word,
    checkpoints: &[usize],
    xi: &TargetMeasure,
    mu: &TargetMeasure,
    sft: &Sft,
    config: &ScheduleConfig,
) -> Result<LiftOutcome> {
    let x_alphabet = sft.alphabet();
    if mu.alphabet() != x_alphabet {
        return Err(Error::AlphabetMismatch {
            expected: x_alphabet.size(),
            found: mu.alphabet().size(),
        });
    }
    let y_alphabet = y.alphabet();
    let pair_alphabet = x_alphabet.product(&y_alphabet)?;
    if xi.alphabet() != pair_alphabet {
        return Err(Error::AlphabetMismatch {
            expected: pair_alphabet.size(),
            found: xi.alphabet().size(),
        });
    }
    let g0 = connection_gap(sft)?.g0;
    let sched = LiftSchedule::build(config.clone(), g0, checkpoints, pair_alphabet.size())?;
    if sched.stages.len() < 2 {
        return Err(Error::InvalidSchedule(
            "checkpoint list too short: at least two stages are required".into(),
        ));
    }
    let depth = sched.metric_depth();

    // first marginal of xi against mu
    let check_depth = sched.stages[0].block_len.min(3);
    let xi_cyl = xi.cylinders(check_depth)?;
    let x_marginal = xi_cyl.coordinate_marginal(x_alphabet, y_alphabet, Coordinate::First)?;
    let gap = max_abs_diff(&x_marginal, &mu.cylinders(check_depth)?);
    if gap > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "first marginal of the joining differs from mu by {gap}"
        )));
    }

    let xi_target = xi.cylinders(depth)?;
    let nu_target = xi_target.coordinate_marginal(x_alphabet, y_alphabet, Coordinate::Second)?;
    let stage_checkpoints: Vec<usize> = sched.stages.iter().map(|s| s.checkpoint).collect();
    if let Some(&n) = stage_checkpoints.iter().find(|&&n| n > y.len()) {
        return Err(Error::IndexOutOfRange { index: n, len: y.len() });
    }
    let input = prefix_distances(y, &nu_target, &stage_checkpoints)?;
    for (s, d) in sched.stages.iter().zip(&input) {
        if d.distance > config.input_tolerance {
            return Err(Error::NotQuasiGeneric {
                checkpoint: s.checkpoint,
                distance: d.distance,
                tolerance: config.input_tolerance,
            });
        }
    }

    let plans = plan_markers(&sched)?;
    let horizon = plans.last().expect("two stages").next;
    if horizon > y.len() {
        return Err(Error::IndexOutOfRange {
            index: horizon,
            len: y.len(),
        });
    }
    let built = build_lift_spec(y, xi, mu, &sched, sft, &plans)?;
    let x = shadow(&built.specification, horizon - 1)?;
    let y_part = y.prefix(horizon)?;
    let pair = Word::zip_pair(&x, &y_part)?;

    let mu_target = mu.cylinders(depth)?;
    let adjusted: Vec<usize> = plans.iter().map(|p| p.next).collect();
    let pair_at = prefix_distances(&pair, &xi_target, &adjusted)?;
    let x_at = prefix_distances(&x, &mu_target, &adjusted)?;
    let nu_dist = TargetMeasure::Empirical(nu_target.clone());

    let spec = &built.specification;
    let mut stages = Vec::new();
    let mut boundary = 0;
    for (i, (stage, plan)) in sched.stages.iter().zip(&plans).enumerate() {
        boundary += plan.markers.len();
        let rel = if y.len() >= plan.markers.markers().last().expect("nonempty") + depth {
            relative_generation_distance(y, &plan.markers, &nu_dist, depth, plan.markers.len())?
        } else {
            f64::NAN
        };
        stages.push(LiftStageReport {
            k: stage.k,
            block_len: stage.block_len,
            padded_len: stage.padded_len,
            epsilon: stage.epsilon,
            delta: stage.delta,
            gamma: stage.gamma,
            checkpoint: stage.checkpoint,
            adjusted_checkpoint: plan.next,
            shift: plan.shift,
            boundary,
            assembly: built.assembly[i].clone(),
            input_distance: input[i].distance,
            relative_generation_distance: rel,
            pair_distance: pair_at[i].distance,
            x_distance: x_at[i].distance,
            domain_density: spec.domain_count_below(plan.next) as f64 / plan.next as f64,
        });
    }

    let scale_list = power_of_two_scales(config.min_report_scale.max(depth), horizon);
    let x_scales = prefix_distances(&x, &mu_target, &scale_list)?;
    let pair_scales = prefix_distances(&pair, &xi_target, &scale_list)?;
    let stability = stability_checks(&x, &mu_target, &adjusted)?;

    let pair_spec = Specification::new(Sft::full(pair_alphabet), built.pair_segments.clone())?;
    let coherence = max_abs_diff(
        &spec_empirical(&pair_spec, depth)?.coordinate_marginal(x_alphabet, y_alphabet, Coordinate::First)?,
        &spec_empirical(spec, depth)?,
    );
    let agreement_with_y = (x_alphabet == y_alphabet).then(|| {
        let same = x.symbols().iter().zip(y_part.symbols()).filter(|(a, b)| a == b).count();
        same as f64 / horizon as f64
    });

    Ok(LiftOutcome {
        report: LiftReport {
            horizon,
            g0,
            metric_depth: depth,
            schedule: sched,
            stages,
            x_scales,
            pair_scales,
            stability,
            domain_density: spec.domain_size() as f64 / horizon as f64,
            marginal_coherence_error: coherence,
            agreement_with_y,
        },
        x,
        allocations: built.allocations,
        specification: built.specification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sturmian;
    use crate::symbolic::Alphabet;
    use crate::rng::{sample_word, stream};

    fn fair() -> TargetMeasure {
        TargetMeasure::uniform(Alphabet::binary())
    }

    #[test]
    fn plans_chain_with_zero_shift() {
        let sched = LiftSchedule::build(ScheduleConfig::lift_default(), 1, &[1_000, 5_000], 4).unwrap();
        let plans = plan_markers(&sched).unwrap();
        assert_eq!(plans[0].markers.markers()[0], 0);
        assert_eq!(plans[1].markers.markers()[0], plans[0].next);
        assert!(plans.iter().all(|p| p.shift == 0));
        for (p, s) in plans.iter().zip(&sched.stages) {
            assert!(p.markers.gaps().iter().all(|&g| g == s.padded_len || g == s.padded_len + 1));
            assert!(p.next >= s.checkpoint && p.next <= s.checkpoint + s.padded_len + 1);
        }
    }

    #[test]
    fn product_joining_allocation_ignores_conditioning() {
        let y = sturmian(30_000).unwrap();
        let nu = TargetMeasure::Empirical(empirical_measure(&y, 12).unwrap());
        let xi = TargetMeasure::product(fair(), nu);
        let sft = Sft::full(Alphabet::binary());
        let sched = LiftSchedule::build(ScheduleConfig::lift_default(), 0, &[3_000, 20_000], 4).unwrap();
        let plans = plan_markers(&sched).unwrap();
        let built = build_lift_spec(&y, &xi, &fair(), &sched, &sft, &plans).unwrap();
        for alloc in &built.allocations {
            assert!(alloc.is_conserved());
            for e in &alloc.entries {
                // every allocated block is good and the shares follow the good-block law
                let n = e.counts.len();
                assert!(n > 0);
                for (_, r) in &e.counts {
                    assert!((*r as f64) <= e.visits as f64 / n as f64 + 2.0);
                }
            }
        }
        assert!(built.assembly.iter().all(|a| a.fallback_markers == 0));
    }

    #[test]
    fn diagonal_joining_copies_conditioning_blocks() {
        let y = sample_word(&fair(), 30_000, &mut stream(9, "diag")).unwrap();
        let xi = TargetMeasure::diagonal(fair());
        let sft = Sft::full(Alphabet::binary());
        let sched = LiftSchedule::build(ScheduleConfig::lift_default(), 0, &[3_000, 20_000], 4).unwrap();
        let plans = plan_markers(&sched).unwrap();
        let built = build_lift_spec(&y, &xi, &fair(), &sched, &sft, &plans).unwrap();
        for (a, s) in built.assembly.iter().zip(built.allocations.iter()) {
            assert_eq!(a.diagonal_markers, a.markers);
            assert!(s.is_conserved());
        }
    }

    #[test]
    fn lift_rejects_bad_inputs() {
        let y = sturmian(20_000).unwrap();
        let nu = TargetMeasure::Empirical(empirical_measure(&y, 8).unwrap());
        let xi = TargetMeasure::product(fair(), nu.clone());
        let sft = Sft::full(Alphabet::binary());
        let cfg = ScheduleConfig::lift_default();
        assert!(matches!(
            lift_pair(&y, &[10_000], &xi, &fair(), &sft, &cfg),
            Err(Error::InvalidSchedule(_))
        ));
        let period2 = Sft::from_01(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let err = lift_pair(&y, &[1_000, 10_000], &xi, &fair(), &period2, &cfg).unwrap_err();
        assert!(err.to_string().contains("not mixing"));
        let biased = TargetMeasure::bernoulli(vec![0.3, 0.7]).unwrap();
        assert!(lift_pair(&y, &[1_000, 10_000], &xi, &biased, &sft, &cfg).is_err());
    }

    #[test]
    fn small_product_lift() {
        let y = sturmian(40_000).unwrap();
        let nu = TargetMeasure::Empirical(empirical_measure(&y, 12).unwrap());
        let xi = TargetMeasure::product(fair(), nu);
        let sft = Sft::full(Alphabet::binary());
        let out = lift_pair(&y, &[3_000, 30_000], &xi, &fair(), &sft, &ScheduleConfig::lift_default()).unwrap();
        let r = &out.report;
        assert_eq!(out.x.len(), r.horizon);
        assert!(r.marginal_coherence_error < 1e-12);
        assert!(r.stages.last().unwrap().pair_distance < 0.1);
        assert!(r.stability.iter().all(|s| s.ok));
        for seg in out.specification.segments() {
            assert_eq!(out.x.slice(seg.start, seg.end() + 1).unwrap(), seg.word);
        }
    }

    #[test]
    fn unary_first_coordinate() {
        let unary = Alphabet::new(1).unwrap();
        let y = sample_word(&fair(), 20_000, &mut stream(2, "unary")).unwrap();
        let mu = TargetMeasure::uniform(unary);
        let xi = TargetMeasure::product(mu.clone(), fair());
        let out = lift_pair(&y, &[2_000, 10_000], &xi, &mu, &Sft::full(unary), &ScheduleConfig::lift_default())
            .unwrap();
        assert!(out.x.symbols().iter().all(|&s| s == 0));
        assert!(out.report.x_scales.iter().all(|s| s.distance == 0.0));
        assert!(out.report.stages.iter().all(|s| s.x_distance == 0.0));
    }
}
