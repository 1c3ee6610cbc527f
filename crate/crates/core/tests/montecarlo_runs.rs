use eigensense::montecarlo::{report, run, wilson_interval, ExperimentSpec};
use eigensense::signal::Hypothesis;
use eigensense::DetectorId;
use proptest::prelude::*;

fn comparison(trials: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec::detector_comparison("cmp", 10, vec![20, 40], -5.0, true, trials, seed)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = comparison(200, 42);
    let one = run(&spec, 1).unwrap();
    let four = run(&spec, 4).unwrap();
    assert_eq!(one, four);
    assert_eq!(report::to_csv(&one), report::to_csv(&four));

    let conv = ExperimentSpec::ratio_convergence("conv", 0.5, vec![10, 50], Hypothesis::H1, 100, 7);
    assert_eq!(run(&conv, 1).unwrap(), run(&conv, 3).unwrap());
}

#[test]
fn seed_changes_results() {
    let a = run(&comparison(100, 1), 1).unwrap();
    let b = run(&comparison(100, 2), 1).unwrap();
    assert_ne!(a.points[0].summary, b.points[0].summary);
}

#[test]
fn truth_is_balanced_and_scores_decompose() {
    let summary = run(&comparison(301, 9), 1).unwrap();
    for point in &summary.points {
        for score in &point.summary.scores {
            assert_eq!(score.trials, 301);
            assert_eq!(score.h0_trials, 151);
            assert_eq!(score.h1_trials, 150);
            let spec = score.specificity.unwrap();
            let sens = score.sensitivity.unwrap();
            let blended = (spec * score.h0_trials as f64 + sens * score.h1_trials as f64)
                / score.trials as f64;
            assert!((blended - score.proportion_correct).abs() < 1e-12);
            assert!(
                score.ci_low <= score.proportion_correct
                    && score.proportion_correct <= score.ci_high
            );
        }
        let ids: Vec<_> = point.summary.scores.iter().map(|s| s.detector).collect();
        assert_eq!(ids, [DetectorId::EigRatio, DetectorId::EnergyVote]);
    }
}

#[test]
fn convergence_ratio_approaches_asymptote() {
    let spec =
        ExperimentSpec::ratio_convergence("conv", 0.5, vec![50, 400], Hypothesis::H0, 200, 3);
    let s = run(&spec, 0).unwrap();
    let (small, large) = (&s.points[0], &s.points[1]);
    assert!(small.ratio_to_asymptote.unwrap() < large.ratio_to_asymptote.unwrap());
    assert!(large.ratio_to_asymptote.unwrap() < 1.0);
    assert!(s.notes.is_empty());
}

#[test]
fn wilson_reference_values() {
    let (lo, hi) = wilson_interval(95, 100);
    assert!((lo - 0.888_249_530_768_080_8).abs() < 1e-12);
    assert!((hi - 0.978_456_320_845_631_9).abs() < 1e-12);
}

proptest! {
    #[test]
    fn wilson_brackets_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64).floor() as usize;
        let (lo, hi) = wilson_interval(successes, trials);
        let p = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}
