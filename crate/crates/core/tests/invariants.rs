//! Property tests over the detection, sampling, and explanation
//! invariants.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sagaze_core::gaze::{
    detect_blinks, detect_fixations, detect_saccades, GazeSample, NOMINAL_DT,
};
use sagaze_core::gbdt::goss_sample;
use sagaze_core::shap::{brute_force_shap, shap_values};

fn stationary_trace(run_samples: usize) -> Vec<GazeSample> {
    // saccade - run - saccade so the middle run is bounded on both sides
    let mut samples = Vec::new();
    let push = |x: f64, n: usize, samples: &mut Vec<GazeSample>| {
        for _ in 0..n {
            let t = samples.len() as f64 * NOMINAL_DT;
            samples.push(GazeSample { t, x, y: 100.0, pupil_area: 900.0, valid: true });
        }
    };
    push(100.0, 400, &mut samples);
    for k in 1..=40usize {
        let t = samples.len() as f64 * NOMINAL_DT;
        samples.push(GazeSample { t, x: 100.0 + 400.0 * k as f64 / 40.0, y: 100.0, pupil_area: 900.0, valid: true });
    }
    push(500.0, run_samples, &mut samples);
    for k in 1..=40usize {
        let t = samples.len() as f64 * NOMINAL_DT;
        samples.push(GazeSample { t, x: 500.0 + 400.0 * k as f64 / 40.0, y: 100.0, pupil_area: 900.0, valid: true });
    }
    push(900.0, 400, &mut samples);
    samples
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The 40 ms fixation floor is boundary-inclusive: the bounded middle
    /// run becomes a fixation exactly when it spans 80 sample periods.
    /// The incoming saccade's landing sample joins the run and the run's
    /// last sample launches the outgoing saccade, so a hold of `run`
    /// samples spans exactly `run` periods.
    #[test]
    fn fixation_floor_is_boundary_inclusive(run in 40usize..140) {
        let samples = stationary_trace(run);
        let saccades = detect_saccades(&samples);
        prop_assert_eq!(saccades.len(), 2);
        let fixations = detect_fixations(&samples, &saccades, &[], &[]);
        let expected_middle = run >= 80;
        prop_assert_eq!(fixations.len(), 2 + usize::from(expected_middle));
    }

    /// Blink ceiling at 200 ms, inclusive; longer runs are gaps.
    #[test]
    fn blink_ceiling_is_boundary_inclusive(len in 300usize..500) {
        let mut samples = stationary_trace(0);
        // append an invalid run and a valid tail
        for _ in 0..len {
            let t = samples.len() as f64 * NOMINAL_DT;
            samples.push(GazeSample { t, x: 900.0, y: 100.0, pupil_area: 0.0, valid: false });
        }
        for _ in 0..200 {
            let t = samples.len() as f64 * NOMINAL_DT;
            samples.push(GazeSample { t, x: 900.0, y: 100.0, pupil_area: 900.0, valid: true });
        }
        let (blinks, gaps) = detect_blinks(&samples);
        if len <= 400 {
            prop_assert_eq!((blinks.len(), gaps.len()), (1, 0));
        } else {
            prop_assert_eq!((blinks.len(), gaps.len()), (0, 1));
        }
    }

    /// Events of one kind never overlap, and fixations never overlap
    /// saccades, blinks, or invalid gaps.
    #[test]
    fn event_spans_are_disjoint(run in 80usize..400, blink in 120usize..500) {
        let mut samples = stationary_trace(run);
        let split = samples.len() / 2;
        for s in samples.iter_mut().skip(split).take(blink) {
            s.pupil_area = 0.0;
            s.valid = false;
        }
        let (blinks, gaps) = detect_blinks(&samples);
        let saccades = detect_saccades(&samples);
        let fixations = detect_fixations(&samples, &saccades, &blinks, &gaps);

        let disjoint_within = |spans: Vec<(usize, usize)>| -> bool {
            let mut sorted = spans;
            sorted.sort();
            sorted.windows(2).all(|w| w[0].1 < w[1].0)
        };
        prop_assert!(disjoint_within(fixations.iter().map(|f| (f.span.start, f.span.end)).collect()));
        prop_assert!(disjoint_within(saccades.iter().map(|s| (s.span.start, s.span.end)).collect()));
        prop_assert!(disjoint_within(blinks.iter().map(|b| (b.span.start, b.span.end)).collect()));
        prop_assert!(disjoint_within(gaps.iter().map(|g| (g.span.start, g.span.end)).collect()));

        // fixations claim nothing owned by any other event kind
        let mut other = vec![false; samples.len()];
        for (start, end) in saccades
            .iter()
            .map(|s| (s.span.start, s.span.end))
            .chain(blinks.iter().map(|b| (b.span.start, b.span.end)))
            .chain(gaps.iter().map(|g| (g.span.start, g.span.end)))
        {
            for slot in other.iter_mut().take(end + 1).skip(start) {
                *slot = true;
            }
        }
        for f in &fixations {
            for (i, owned) in other.iter().enumerate().take(f.span.end + 1).skip(f.span.start) {
                prop_assert!(!owned, "fixation sample {i} owned by another event");
            }
        }
    }

    /// GOSS bookkeeping: kept count, weights, and top-set membership.
    #[test]
    fn goss_counts_and_weights(seed in 0u64..1000, n in 50usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grads: Vec<f64> = (0..n).map(|i| ((i as f64 * 1.37 + seed as f64).sin()) * 2.0).collect();
        let (rows, weights) = goss_sample(&grads, 0.2, 0.1, &mut rng);
        let top_n = (0.2 * n as f64).ceil() as usize;
        let rand_n = (0.1 * n as f64).ceil() as usize;
        prop_assert_eq!(rows.len(), top_n + rand_n);
        let small_weight = (1.0 - 0.2) / 0.1;
        let n_top = weights.iter().filter(|&&w| w == 1.0).count();
        let n_small = weights.iter().filter(|&&w| (w - small_weight).abs() < 1e-12).count();
        prop_assert_eq!((n_top, n_small), (top_n, rand_n));
        // rows ascend (deterministic histogram order)
        prop_assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }

    /// Tree-algorithm Shapley values equal the subset-enumeration oracle
    /// and reconstruct the prediction, on random small ensembles.
    #[test]
    fn shap_matches_brute_force(seed in 0u64..10_000) {
        let p = 2 + (seed % 9) as usize; // 2..=10 features
        let n_trees = 1 + (seed % 5) as usize;
        let ensemble = common::random_ensemble(seed, p, n_trees, 4);
        let row = common::random_instance(seed.wrapping_mul(31) + 7, p);

        let fast = shap_values(&ensemble, &row).unwrap();
        let slow = brute_force_shap(&ensemble, &row).unwrap();
        prop_assert!((fast.base_value - slow.base_value).abs() <= 1e-9);
        for f in 0..p {
            prop_assert!(
                (fast.contributions[f] - slow.contributions[f]).abs() <= 1e-9,
                "feature {} differs: {} vs {}", f, fast.contributions[f], slow.contributions[f]
            );
        }
        let prediction = ensemble.predict_row(&row);
        prop_assert!((fast.total() - prediction).abs() <= 1e-9);
    }
}

/// Scripted synthetic trials partition their timeline: the detected
/// event durations sum to the trial duration (no unclassified time by
/// construction).
#[test]
fn synthetic_trials_partition_the_timeline() {
    use sagaze_core::gaze::{AoiLayout, TrialEvents};
    use sagaze_core::synth::{plan_study, SynthParams};

    let plan = plan_study(&SynthParams { n_participants: 2, n_trials: 6, seed: 21, noise_sd: 0.02 }).unwrap();
    let layout = AoiLayout::driving_default();
    for trial in &plan.trials {
        let samples = plan.render(trial);
        let events = TrialEvents::detect(&samples, &layout).unwrap();
        let total: f64 = events.fixations.iter().map(|f| f.duration).sum::<f64>()
            + events.saccades.iter().map(|s| s.duration).sum::<f64>()
            + events.blinks.iter().map(|b| b.duration).sum::<f64>()
            + events.gaps.iter().map(|g| g.duration).sum::<f64>();
        let trial_span = samples.last().unwrap().t - samples[0].t;
        assert!(
            (total - trial_span).abs() <= NOMINAL_DT + 1e-9,
            "trial ({}, {}): events sum to {total}, span {trial_span}",
            trial.participant_id,
            trial.trial_id
        );
    }
}

/// Dataset CSV round trip: values, masks, and labels survive exactly.
#[test]
fn dataset_round_trip_property() {
    use sagaze_core::features::Dataset;

    use proptest::strategy::ValueTree;
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = proptest::collection::vec(
        proptest::collection::vec(proptest::option::weighted(0.85, -1e6f64..1e6), 4),
        1..40,
    );
    for _ in 0..32 {
        let rows = strategy.new_tree(&mut runner).unwrap().current();
        let mut ds = Dataset::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        for (r, row) in rows.iter().enumerate() {
            ds.push_row(1, r as u32, row, if r % 3 == 0 { None } else { Some(0.5) }).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        ds.write_csv(&path).unwrap();
        let loaded = Dataset::load_csv(&path).unwrap();
        assert_eq!(ds, loaded);
    }
}
