//! End-to-end properties of the constructions, checked against quantities
//! recomputed from the output words.

use genlift::experiments::{select, sturmian, Selector};
use genlift::lift::allocation::interleave;
use genlift::lift::{
    build_lift_spec, genericize, lift_pair, marker_sequence, plan_markers, rational_allocation,
    Allocation, AllocationEntry, LiftSchedule, ScheduleConfig,
};
use genlift::rng::{sample_word, stream};
use genlift::{
    empirical_measure, spec_empirical, validate_word, weakstar_distance, Alphabet, MetricConfig,
    Segment, Sft, Specification, Symbol, TargetMeasure, Word,
};
use proptest::prelude::*;

fn fair() -> TargetMeasure {
    TargetMeasure::uniform(Alphabet::binary())
}

fn all_words(len: usize) -> Vec<Vec<Symbol>> {
    (0..1u32 << len)
        .map(|c| (0..len).rev().map(|i| (c >> i) & 1).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realized_block_frequencies_transfer_to_the_specification(
        p in 0.1f64..0.9,
        l in 2usize..6,
        k in 1i32..4,
        g0 in 0usize..3,
    ) {
        let mu = TargetMeasure::bernoulli(vec![p, 1.0 - p]).unwrap();
        let eps = 0.5 * 0.5f64.powi(k - 1);
        let delta = eps / 2.0;
        let blocks = all_words(l);
        let probs: Vec<f64> = blocks.iter().map(|b| mu.cylinder(b).unwrap()).collect();
        let visits = (blocks.len() as f64 / delta).ceil() as usize;
        let counts = rational_allocation(&probs, visits).unwrap();
        let positive: Vec<(Vec<Symbol>, usize)> = blocks
            .iter()
            .zip(&counts)
            .filter(|(_, &r)| r > 0)
            .map(|(b, &r)| (b.clone(), r))
            .collect();
        let alloc = Allocation {
            stage: 1,
            entries: vec![AllocationEntry {
                conditioning: Word::empty(Alphabet::binary()),
                visits,
                counts: positive.iter().map(|(b, r)| (Word::new(Alphabet::binary(), b.clone()).unwrap(), *r)).collect(),
                bad_mass: 0.0,
                fallback: false,
            }],
        };
        prop_assert!(alloc.is_conserved());
        for (b, f) in alloc.block_frequencies() {
            let target = mu.cylinder(b.symbols()).unwrap();
            prop_assert!((f - target).abs() <= delta / blocks.len() as f64);
        }
        let order = interleave(&[], &positive);
        let markers = marker_sequence(l + g0, visits).unwrap();
        let segs: Vec<Segment> = markers
            .markers()
            .iter()
            .zip(&order)
            .map(|(&a, &j)| Segment::new(a + g0, Word::new(Alphabet::binary(), positive[j].0.clone()).unwrap()))
            .collect();
        let stage_len = segs.last().unwrap().end() + 1;
        let s = Specification::new(Sft::full(Alphabet::binary()), segs).unwrap();
        let cfg = MetricConfig::new(2);
        let d = weakstar_distance(&spec_empirical(&s, 2).unwrap(), &mu.cylinders(2).unwrap(), &cfg).unwrap();
        prop_assert!(d <= eps + 2.0 * s.len() as f64 / stage_len as f64);
    }
}

#[test]
fn diagonal_lift_copies_every_conditioning_block() {
    let y = sample_word(&fair(), 60_000, &mut stream(11, "pipeline/diagonal")).unwrap();
    let xi = TargetMeasure::diagonal(fair());
    let sft = Sft::full(Alphabet::binary());
    let sched = LiftSchedule::build(ScheduleConfig::lift_default(), 0, &[5_000, 50_000], 4).unwrap();
    let plans = plan_markers(&sched).unwrap();
    let built = build_lift_spec(&y, &xi, &fair(), &sched, &sft, &plans).unwrap();
    for seg in built.specification.segments() {
        assert_eq!(&y.symbols()[seg.start..=seg.end()], seg.word.symbols());
    }
    for alloc in &built.allocations {
        for e in &alloc.entries {
            assert_eq!(e.counts.len(), 1);
            assert_eq!(e.counts[0].0, e.conditioning);
        }
    }
}

#[test]
fn product_lift_pairs_follow_the_joining() {
    let y = sturmian(60_000).unwrap();
    let nu = TargetMeasure::Empirical(empirical_measure(&y, 12).unwrap());
    let xi = TargetMeasure::product(fair(), nu);
    let sft = Sft::full(Alphabet::binary());
    let out = lift_pair(&y, &[5_000, 50_000], &xi, &fair(), &sft, &ScheduleConfig::lift_default()).unwrap();
    assert!(validate_word(&sft, &out.x).unwrap());
    for seg in out.specification.segments() {
        assert_eq!(&out.x.symbols()[seg.start..=seg.end()], seg.word.symbols());
    }
    let cfg = MetricConfig::new(2);
    for st in &out.report.stages {
        let n = st.adjusted_checkpoint;
        let pair = Word::zip_pair(&out.x.prefix(n).unwrap(), &y.prefix(n).unwrap()).unwrap();
        let d = weakstar_distance(&empirical_measure(&pair, 2).unwrap(), &xi.cylinders(2).unwrap(), &cfg).unwrap();
        assert!((d - st.pair_distance).abs() < 1e-12);
        assert!(st.relative_generation_distance < 0.1);
    }
    // selecting x along the ones of y leaves x's statistics unchanged
    let n = out.x.len();
    let selected = select(&out.x, &Selector::Indicator(y.prefix(n).unwrap())).unwrap();
    let d = weakstar_distance(&empirical_measure(&selected, 1).unwrap(), &fair().cylinders(1).unwrap(), &MetricConfig::new(1)).unwrap();
    assert!(d < 0.05, "{d}");
}

#[test]
fn genericize_repairs_a_quasi_generic_point() {
    let mut rng = stream(5, "pipeline/genericize");
    let mut symbols = sample_word(&fair(), 20_000, &mut rng).unwrap().into_symbols();
    symbols.extend(std::iter::repeat_n(0, 20_000));
    symbols.extend(sample_word(&fair(), 200_000, &mut rng).unwrap().symbols());
    let x0 = Word::new(Alphabet::binary(), symbols).unwrap();
    let sft = Sft::full(Alphabet::binary());
    let out = genericize(&x0, &[20_000, 240_000], &fair(), &ScheduleConfig::genericize_default(), &sft).unwrap();
    assert_eq!(out.word.len(), x0.len());
    for &(a, b) in out.agreement.ranges() {
        assert_eq!(out.word.symbols()[a..b], x0.symbols()[a..b]);
    }
    // the zero run is rewritten
    let zeros = out.word.symbols()[20_000..40_000].iter().filter(|&&s| s == 0).count();
    assert!(zeros < 12_000, "{zeros}");
    let cfg = MetricConfig::new(2);
    let target = fair().cylinders(2).unwrap();
    for n in [40_000usize, 100_000, 240_000] {
        let d = weakstar_distance(&empirical_measure(&out.word.prefix(n).unwrap(), 2).unwrap(), &target, &cfg).unwrap();
        assert!(d <= 0.1, "n = {n}: {d}");
    }
}

#[test]
fn specifications_round_trip_through_json() {
    let text = r#"{"sft":{"alphabet_size":2,"transitions":[[1,1],[1,0]]},"segments":[{"start":0,"word":"010"},{"start":5,"word":"10"}]}"#;
    let s: Specification = serde_json::from_str(text).unwrap();
    assert_eq!(s.len(), 2);
    let back = serde_json::to_string(&s).unwrap();
    let again: Specification = serde_json::from_str(&back).unwrap();
    assert_eq!(again.segments(), s.segments());
    let bad = r#"{"sft":{"alphabet_size":2,"transitions":[[1,1],[1,0]]},"segments":[{"start":0,"word":"0110"}]}"#;
    assert!(serde_json::from_str::<Specification>(bad).is_err());
}
