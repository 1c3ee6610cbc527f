//! Decision procedures.
//!
//! | id           | statistic                         | H1 when                      |
//! |--------------|-----------------------------------|------------------------------|
//! | `mp-support` | largest excursion outside `[a,b]` | any `λᵢ ∉ [a(1−s), b(1+s)]`  |
//! | `eig-ratio`  | `λ_max/λ_min`                     | `> (1+√α)²/(1−√α)²`          |
//! | `energy`     | `(1/N)Σ|y(k)|²` of one sensor     | `≥ V_T`                      |
//! | `energy-vote`| per-sensor energy tests           | at least half the sensors    |
//!
//! The ratio test stays H0 on equality and the energy test fires on equality.
//! An even split in the vote decides H1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, EigenMethod, EigenSpectrum};
use crate::rmt::{self, MpSupport};
use crate::signal::Hypothesis;

/// Tolerance when matching a spectrum's `K/N` against a support's `α`.
const ALPHA_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorId {
    MpSupport,
    EigRatio,
    Energy,
    EnergyVote,
}

impl DetectorId {
    pub const ALL: [DetectorId; 4] = [
        DetectorId::MpSupport,
        DetectorId::EigRatio,
        DetectorId::Energy,
        DetectorId::EnergyVote,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorId::MpSupport => "mp-support",
            DetectorId::EigRatio => "eig-ratio",
            DetectorId::Energy => "energy",
            DetectorId::EnergyVote => "energy-vote",
        }
    }

    /// Whether the detector needs the noise variance.
    pub fn needs_variance(self) -> bool {
        !matches!(self, DetectorId::EigRatio)
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown detector `{s}` (expected mp-support, eig-ratio, energy or energy-vote)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Hypothesis,
    pub statistic: f64,
    pub threshold: f64,
    pub detector: DetectorId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionDecision {
    pub label: Hypothesis,
    pub votes_h1: usize,
    pub votes_total: usize,
}

/// Known-variance test: H0 iff every eigenvalue lies in the (optionally
/// widened) Marchenko–Pastur support.
///
/// The statistic is the largest signed excursion `max(a − λ, λ − b)` over the
/// spectrum, negative when everything is strictly inside; the threshold is 0.
pub fn support_test(spectrum: &EigenSpectrum, support: &MpSupport, slack: f64) -> Result<Decision> {
    if !(slack >= 0.0) {
        return Err(Error::domain("slack must be non-negative"));
    }
    if let Some(alpha) = spectrum.aspect_ratio() {
        if (alpha - support.alpha()).abs() > ALPHA_MATCH_TOL {
            return Err(Error::config(format!(
                "spectrum has K/N = {alpha} but support was built for alpha = {}",
                support.alpha()
            )));
        }
    }
    let (lo, hi) = (support.a() * (1.0 - slack), support.b() * (1.0 + slack));
    let outside = spectrum.values().iter().any(|&l| l < lo || l > hi);
    let statistic = spectrum
        .values()
        .iter()
        .map(|&l| (support.a() - l).max(l - support.b()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Decision {
        label: if outside {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        },
        statistic,
        threshold: 0.0,
        detector: DetectorId::MpSupport,
    })
}

/// Variance-free test on `λ_max/λ_min`.
///
/// `alpha` may be exactly 1 (`K = N`): the noise-only ratio then diverges and
/// the threshold is `+∞`. A zero `λ_min` (after the PSD clamp) yields the
/// sentinel statistic `+∞` and a forced H1.
pub fn ratio_test(spectrum: &EigenSpectrum, alpha: f64) -> Result<Decision> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha must be in (0,1]"));
    }
    let threshold = if alpha == 1.0 {
        f64::INFINITY
    } else {
        rmt::ratio_threshold(alpha)?
    };
    let statistic = spectrum.condition_ratio();
    let label = if statistic == f64::INFINITY || statistic > threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Ok(Decision {
        label,
        statistic,
        threshold,
        detector: DetectorId::EigRatio,
    })
}

/// Single-sensor energy detector.
pub fn energy_test(samples: &[Complex64], vt: f64) -> Result<Decision> {
    if samples.is_empty() {
        return Err(Error::domain("energy test needs at least one sample"));
    }
    if !(vt > 0.0) {
        return Err(Error::domain("energy threshold must be positive"));
    }
    let statistic = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len() as f64;
    Ok(Decision {
        label: if statistic >= vt {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        },
        statistic,
        threshold: vt,
        detector: DetectorId::Energy,
    })
}

/// Majority fusion of binary decisions; ties go to H1.
pub fn vote(decisions: &[Decision]) -> Result<FusionDecision> {
    if decisions.is_empty() {
        return Err(Error::domain("vote needs at least one decision"));
    }
    let votes_h1 = decisions
        .iter()
        .filter(|d| d.label == Hypothesis::H1)
        .count();
    let votes_total = decisions.len();
    Ok(FusionDecision {
        label: if 2 * votes_h1 >= votes_total {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        },
        votes_h1,
        votes_total,
    })
}

/// One energy test per sensor (row of `y`), fused by [`vote`].
pub fn energy_vote(y: &ComplexMatrix, vt: f64) -> Result<FusionDecision> {
    let decisions = (0..y.rows())
        .map(|i| energy_test(y.row(i), vt))
        .collect::<Result<Vec<_>>>()?;
    vote(&decisions)
}

fn spectrum_of(y: &ComplexMatrix) -> Result<EigenSpectrum> {
    if y.rows() > y.cols() {
        return Err(Error::UnsupportedRegime(format!(
            "K = {} exceeds N = {}",
            y.rows(),
            y.cols()
        )));
    }
    linalg::eigenvalues(&linalg::gram(y), EigenMethod::default())
}

/// Gram, eigenvalues, then [`support_test`] against the support for the
/// given noise variance.
pub fn rmt_detect_known_variance(y: &ComplexMatrix, sigma2: f64, slack: f64) -> Result<Decision> {
    let spectrum = spectrum_of(y)?;
    let support = rmt::mp_support(sigma2, y.rows() as f64 / y.cols() as f64)?;
    support_test(&spectrum, &support, slack)
}

/// Gram, eigenvalues, then [`ratio_test`] with `α = K/N`. Uses nothing but `y`.
pub fn rmt_detect_blind(y: &ComplexMatrix) -> Result<Decision> {
    let spectrum = spectrum_of(y)?;
    ratio_test(&spectrum, y.rows() as f64 / y.cols() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(values: &[f64]) -> EigenSpectrum {
        EigenSpectrum::from_values(values.to_vec()).unwrap()
    }

    fn decision(label: Hypothesis) -> Decision {
        Decision {
            label,
            statistic: 0.0,
            threshold: 0.0,
            detector: DetectorId::Energy,
        }
    }

    #[test]
    fn detector_ids_round_trip() {
        for d in DetectorId::ALL {
            assert_eq!(d.as_str().parse::<DetectorId>().unwrap(), d);
        }
        assert!("matched-filter".parse::<DetectorId>().is_err());
        assert!(!DetectorId::EigRatio.needs_variance());
    }

    #[test]
    fn support_interior_and_excursion() {
        let s = rmt::mp_support(1.0, 0.25).unwrap();
        let d = support_test(&spectrum(&[0.5, 1.0, 2.0]), &s, 0.0).unwrap();
        assert_eq!(d.label, Hypothesis::H0);
        assert!(d.statistic < 0.0);
        let d = support_test(&spectrum(&[0.5, 1.0, 2.25 * 1.5]), &s, 0.0).unwrap();
        assert_eq!(d.label, Hypothesis::H1);
        assert!((d.statistic - 1.125).abs() < 1e-12);
        // Slack widens the accepted interval.
        let d = support_test(&spectrum(&[0.5, 1.0, 2.5]), &s, 0.2).unwrap();
        assert_eq!(d.label, Hypothesis::H0);
        assert!(support_test(&spectrum(&[1.0]), &s, -0.1).is_err());
    }

    #[test]
    fn support_alpha_mismatch() {
        let s = rmt::mp_support(1.0, 0.25).unwrap();
        let spec = spectrum(&[1.0, 1.0]).with_samples(4);
        assert!(matches!(
            support_test(&spec, &s, 0.0),
            Err(Error::Config(_))
        ));
        let spec = spectrum(&[1.0, 1.0]).with_samples(8);
        assert!(support_test(&spec, &s, 0.0).is_ok());
    }

    #[test]
    fn ratio_cases() {
        let d = ratio_test(&spectrum(&[1.0, 1.0, 1.0]), 0.3).unwrap();
        assert_eq!((d.label, d.statistic), (Hypothesis::H0, 1.0));

        let d = ratio_test(&spectrum(&[1.0, 34.0]), 0.5).unwrap();
        assert_eq!(d.label, Hypothesis::H1);
        assert!((d.threshold - 33.970_562_748).abs() < 1e-6);

        let t = rmt::ratio_threshold(0.5).unwrap();
        let d = ratio_test(&spectrum(&[1.0, t]), 0.5).unwrap();
        assert_eq!(d.label, Hypothesis::H0, "boundary stays H0");

        let base = spectrum(&[0.3, 1.0, 9.0]);
        let a = ratio_test(&base, 0.1).unwrap();
        let b = ratio_test(&base.scaled(7.3), 0.1).unwrap();
        assert_eq!(a.label, b.label);
    }

    #[test]
    fn ratio_degenerate_cases() {
        let d = ratio_test(&spectrum(&[0.0, 0.0]), 0.5).unwrap();
        assert_eq!((d.label, d.statistic), (Hypothesis::H1, f64::INFINITY));
        let d = ratio_test(&spectrum(&[0.01, 100.0]), 1.0).unwrap();
        assert_eq!((d.label, d.threshold), (Hypothesis::H0, f64::INFINITY));
        assert!(ratio_test(&spectrum(&[1.0]), 0.0).is_err());
        assert!(ratio_test(&spectrum(&[1.0]), 1.5).is_err());
    }

    #[test]
    fn energy_cases() {
        let zeros = vec![Complex64::new(0.0, 0.0); 4];
        let d = energy_test(&zeros, 1.0).unwrap();
        assert_eq!((d.label, d.statistic), (Hypothesis::H0, 0.0));
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        let d = energy_test(&ones, 1.0).unwrap();
        assert_eq!((d.label, d.statistic), (Hypothesis::H1, 1.0));
        assert!(energy_test(&[], 1.0).is_err());
        assert!(energy_test(&ones, 0.0).is_err());
    }

    #[test]
    fn vote_cases() {
        use Hypothesis::*;
        let v = vote(&[decision(H1), decision(H1), decision(H0)]).unwrap();
        assert_eq!((v.label, v.votes_h1, v.votes_total), (H1, 2, 3));
        assert_eq!(vote(&[decision(H0); 3]).unwrap().label, H0);
        assert_eq!(vote(&[decision(H1), decision(H0)]).unwrap().label, H1);
        assert!(vote(&[]).is_err());
    }

    #[test]
    fn blind_pipeline_rejects_wide_matrices() {
        let y = ComplexMatrix::zeros(4, 2).unwrap();
        assert!(matches!(
            rmt_detect_blind(&y),
            Err(Error::UnsupportedRegime(_))
        ));
    }
}
