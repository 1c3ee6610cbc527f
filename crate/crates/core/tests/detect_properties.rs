use eigensense::detect::{
    energy_test, energy_vote, ratio_test, rmt_detect_blind, rmt_detect_known_variance,
    support_test, vote, DetectorId,
};
use eigensense::linalg::{eigvalsh_tridiagonal, gram, ComplexMatrix, EigenSpectrum};
use eigensense::rmt::mp_support;
use eigensense::signal::{
    synthesize, Fading, Hypothesis, NoiseKind, SampleField, ScenarioConfig, SignalKind,
};
use eigensense::Complex64;
use proptest::prelude::*;

fn scenario(k: usize, n: usize, sigma2: f64, hypothesis: Hypothesis, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        k,
        n,
        sigma2,
        hypothesis,
        noise: NoiseKind::Gaussian,
        signal: SignalKind::Gaussian,
        fading: Fading::unit_energy(k),
        field: SampleField::Complex,
        seed,
    }
}

fn decision(label: Hypothesis) -> eigensense::Decision {
    eigensense::Decision {
        label,
        statistic: 0.0,
        threshold: 1.0,
        detector: DetectorId::Energy,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blind_test_is_scale_invariant(seed in 0u64..1_000_000, c in 0.001f64..1000.0) {
        let y = synthesize(&scenario(5, 40, 1.0, Hypothesis::H1, seed)).unwrap().y;
        let base = rmt_detect_blind(&y).unwrap();
        let scaled = rmt_detect_blind(&y.scaled(c)).unwrap();
        prop_assert_eq!(base.label, scaled.label);
        prop_assert!((base.statistic - scaled.statistic).abs() <= 1e-8 * base.statistic);
    }

    #[test]
    fn vote_ignores_order(labels in proptest::collection::vec(any::<bool>(), 1..30), rot in 0usize..30) {
        let ds: Vec<_> = labels.iter().map(|&h| decision(if h { Hypothesis::H1 } else { Hypothesis::H0 })).collect();
        let mut shuffled = ds.clone();
        shuffled.rotate_left(rot % ds.len());
        shuffled.reverse();
        let a = vote(&ds).unwrap();
        let b = vote(&shuffled).unwrap();
        prop_assert_eq!(a, b);
        let h1 = labels.iter().filter(|&&h| h).count();
        prop_assert_eq!(a.label == Hypothesis::H1, 2 * h1 >= labels.len());
    }

    #[test]
    fn widening_slack_never_adds_detections(seed in 0u64..1_000_000, s1 in 0.0f64..0.5, extra in 0.0f64..0.5) {
        let y = synthesize(&scenario(8, 80, 1.0, Hypothesis::H0, seed)).unwrap().y;
        let tight = rmt_detect_known_variance(&y, 1.0, s1).unwrap();
        let loose = rmt_detect_known_variance(&y, 1.0, s1 + extra).unwrap();
        if loose.label == Hypothesis::H1 {
            prop_assert_eq!(tight.label, Hypothesis::H1);
        }
    }

    #[test]
    fn ratio_test_threshold_boundary(alpha in 0.01f64..0.9, lo in 0.1f64..2.0) {
        let t = eigensense::rmt::ratio_threshold(alpha).unwrap();
        let at = EigenSpectrum::from_values(vec![lo, lo * t]).unwrap();
        let above = EigenSpectrum::from_values(vec![lo, lo * t * (1.0 + 1e-9)]).unwrap();
        prop_assert!(ratio_test(&above, alpha).unwrap().label == Hypothesis::H1);
        // Exact equality is H0; rounding in lo·t may land on either side by one ulp.
        let d = ratio_test(&at, alpha).unwrap();
        if d.statistic <= d.threshold {
            prop_assert_eq!(d.label, Hypothesis::H0);
        }
    }
}

#[test]
fn support_test_decisions() {
    let s = mp_support(1.0, 0.25).unwrap();
    let inside = EigenSpectrum::from_values(vec![0.3, 1.0, 2.0]).unwrap();
    assert_eq!(
        support_test(&inside, &s, 0.0).unwrap().label,
        Hypothesis::H0
    );
    let above = EigenSpectrum::from_values(vec![0.3, 1.0, 2.6]).unwrap();
    let d = support_test(&above, &s, 0.0).unwrap();
    assert_eq!(d.label, Hypothesis::H1);
    assert!((d.statistic - 0.35).abs() < 1e-12);
    assert_eq!(support_test(&above, &s, 0.2).unwrap().label, Hypothesis::H0);
}

#[test]
fn energy_under_h0_fires_about_half_the_time() {
    let (n, trials) = (50, 10_000);
    let mut fired = 0;
    for t in 0..trials {
        let y = synthesize(&scenario(1, n, 1.0, Hypothesis::H0, 90_000 + t))
            .unwrap()
            .y;
        if energy_test(y.row(0), 1.0).unwrap().label == Hypothesis::H1 {
            fired += 1;
        }
    }
    let p = fired as f64 / trials as f64;
    assert!((p - 0.5).abs() < 0.05, "{p}");
}

#[test]
fn energy_vote_counts_rows() {
    let y = ComplexMatrix::from_rows(&[
        vec![Complex64::new(2.0, 0.0); 4],
        vec![Complex64::new(0.1, 0.0); 4],
        vec![Complex64::new(0.0, 3.0); 4],
    ])
    .unwrap();
    let f = energy_vote(&y, 1.0).unwrap();
    assert_eq!((f.votes_h1, f.votes_total, f.label), (2, 3, Hypothesis::H1));
}

#[test]
fn support_test_detects_strong_spike() {
    // ρ = 1 (0 dB), α = 0.1: b' = 2.2 is well clear of b ≈ 1.73.
    let (k, n, trials) = (200, 2000, 1000);
    let support = mp_support(1.0, 0.1).unwrap();
    let mut hits = 0;
    for t in 0..trials {
        let y = synthesize(&scenario(k, n, 1.0, Hypothesis::H1, 5_000 + t))
            .unwrap()
            .y;
        let s = eigvalsh_tridiagonal(&gram(&y)).unwrap();
        if support_test(&s, &support, 0.0).unwrap().label == Hypothesis::H1 {
            hits += 1;
        }
    }
    assert!(hits as f64 >= 0.99 * trials as f64, "{hits}/{trials}");
}

#[test]
fn blind_examples() {
    let mut h0 = 0;
    for t in 0..101 {
        let y = synthesize(&scenario(10, 100, 1.0, Hypothesis::H0, 300 + t))
            .unwrap()
            .y;
        if rmt_detect_blind(&y).unwrap().label == Hypothesis::H0 {
            h0 += 1;
        }
    }
    assert!(h0 > 50, "{h0}/101");

    let mut h1 = 0;
    for t in 0..200 {
        let y = synthesize(&scenario(100, 1000, 1.0, Hypothesis::H1, 700 + t))
            .unwrap()
            .y;
        if rmt_detect_blind(&y).unwrap().label == Hypothesis::H1 {
            h1 += 1;
        }
    }
    assert!(h1 >= 198, "{h1}/200");
}

#[test]
fn pipelines_reject_wide_matrices() {
    let y = ComplexMatrix::zeros(5, 3).unwrap();
    assert!(matches!(
        rmt_detect_blind(&y),
        Err(eigensense::Error::UnsupportedRegime(_))
    ));
    assert!(rmt_detect_known_variance(&y, 1.0, 0.0).is_err());
}
