//! Monte Carlo experiments.
//!
//! Two experiment families are supported:
//!
//! * **ratio convergence**: `λ_max/λ_min` of pure-noise or spiked matrices
//!   with fixed `α = K/N` and growing `N`, normalized by its asymptote
//!   (`(1+√α)²/(1−√α)²` under H0, `b'/a` under H1);
//! * **detector comparison**: fixed `K`, growing `N`, alternating H0/H1
//!   trials with Rayleigh fading, scored as the proportion of correct decisions.
//!
//! Trial `t` of sweep point `p` draws from its own substream
//! `derive_seed(master_seed, p, t)`. Records are collected in trial order and
//! reduced on one thread, so summaries are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{self, DetectorId};
use crate::error::{Error, Result};
use crate::linalg::{self, EigenMethod};
use crate::rmt;
use crate::signal::{self, Fading, Hypothesis, NoiseKind, SampleField, ScenarioConfig, SignalKind};

/// Trials per sweep point when none are given.
pub const DEFAULT_TRIALS: usize = 2000;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// How the SNR of a detector comparison fixes the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrReference {
    /// `ρ = E[Σ|hᵢ|²]/σ²`, so `σ² = 1/ρ`.
    #[default]
    Total,
    /// `ρ = E[|hᵢ|²]/σ²` at each sensor, so `σ² = 1/(Kρ)`.
    PerSensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `K = α·N`; under H1 the channel is fixed with `Σ|hᵢ|² = 1` and
    /// `σ² = 1/ρ`. Under H0 `σ² = 1`.
    RatioConvergence {
        alpha: f64,
        hypothesis: Hypothesis,
        rho_db: f64,
    },
    /// Fixed `K`, Rayleigh fading with `E|hᵢ|² = 1/K`, balanced H0/H1 trials.
    DetectorComparison {
        k: usize,
        rho_db: f64,
        snr_reference: SnrReference,
        known_variance: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    /// Swept sample counts.
    pub ns: Vec<usize>,
    pub detectors: Vec<DetectorId>,
    pub trials: usize,
    pub master_seed: u64,
    pub noise: NoiseKind,
    pub signal: SignalKind,
    pub field: SampleField,
    /// Relative widening of the support used by `mp-support`.
    pub slack: f64,
}

impl ExperimentSpec {
    /// Ratio-convergence study at `ρ = −5 dB` (used only under H1) with
    /// real-valued Gaussian samples.
    pub fn ratio_convergence(
        name: impl Into<String>,
        alpha: f64,
        ns: Vec<usize>,
        hypothesis: Hypothesis,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            name: name.into(),
            kind: ExperimentKind::RatioConvergence {
                alpha,
                hypothesis,
                rho_db: -5.0,
            },
            ns,
            detectors: vec![DetectorId::EigRatio],
            trials,
            master_seed,
            noise: NoiseKind::Gaussian,
            signal: SignalKind::Gaussian,
            field: SampleField::Real,
            slack: 0.0,
        }
    }

    /// Detector comparison with complex samples and a per-sensor SNR. The
    /// energy vote joins the blind ratio test only when the variance is known.
    pub fn detector_comparison(
        name: impl Into<String>,
        k: usize,
        ns: Vec<usize>,
        rho_db: f64,
        known_variance: bool,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        let mut detectors = vec![DetectorId::EigRatio];
        if known_variance {
            detectors.push(DetectorId::EnergyVote);
        }
        Self {
            name: name.into(),
            kind: ExperimentKind::DetectorComparison {
                k,
                rho_db,
                snr_reference: SnrReference::PerSensor,
                known_variance,
            },
            ns,
            detectors,
            trials,
            master_seed,
            noise: NoiseKind::Gaussian,
            signal: SignalKind::Gaussian,
            field: SampleField::Complex,
            slack: 0.0,
        }
    }

    /// `(K, N)` of every sweep point.
    pub fn sweep(&self) -> Result<Vec<(usize, usize)>> {
        self.ns
            .iter()
            .map(|&n| {
                let k = match self.kind {
                    ExperimentKind::RatioConvergence { alpha, .. } => {
                        let k = alpha * n as f64;
                        let rounded = k.round();
                        if (k - rounded).abs() > 1e-9 || rounded < 1.0 {
                            return Err(Error::Sweep(format!(
                                "alpha * N = {alpha} * {n} is not a positive integer"
                            )));
                        }
                        rounded as usize
                    }
                    ExperimentKind::DetectorComparison { k, .. } => k,
                };
                if k > n {
                    return Err(Error::Sweep(format!("K = {k} exceeds N = {n}")));
                }
                Ok((k, n))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.ns.is_empty() {
            return Err(Error::config("sweep needs at least one N"));
        }
        if self.detectors.is_empty() {
            return Err(Error::config("at least one detector is required"));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::config("slack must be non-negative"));
        }
        match self.kind {
            ExperimentKind::RatioConvergence { alpha, rho_db, .. } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::config("alpha must be in (0,1)"));
                }
                if !rho_db.is_finite() {
                    return Err(Error::config("rho_db must be finite"));
                }
            }
            ExperimentKind::DetectorComparison {
                k,
                rho_db,
                known_variance,
                ..
            } => {
                if k == 0 {
                    return Err(Error::config("k must be at least 1"));
                }
                if !rho_db.is_finite() {
                    return Err(Error::config("rho_db must be finite"));
                }
                if !known_variance {
                    if let Some(d) = self.detectors.iter().find(|d| d.needs_variance()) {
                        return Err(Error::config(format!(
                            "detector `{d}` needs the noise variance, which this experiment withholds"
                        )));
                    }
                }
            }
        }
        let sweep = self.sweep()?;
        if self.detectors.contains(&DetectorId::MpSupport) {
            if let Some((k, n)) = sweep.iter().find(|(k, n)| k == n) {
                return Err(Error::config(format!(
                    "mp-support needs K < N, sweep has K = N = {k}/{n}"
                )));
            }
        }
        Ok(())
    }

    /// Noise variance used at every sweep point.
    pub fn sigma2(&self) -> f64 {
        match self.kind {
            ExperimentKind::RatioConvergence {
                hypothesis: Hypothesis::H0,
                ..
            } => 1.0,
            ExperimentKind::RatioConvergence { rho_db, .. } => 1.0 / rmt::from_db(rho_db),
            ExperimentKind::DetectorComparison {
                k,
                rho_db,
                snr_reference,
                ..
            } => match snr_reference {
                SnrReference::Total => 1.0 / rmt::from_db(rho_db),
                SnrReference::PerSensor => 1.0 / (k as f64 * rmt::from_db(rho_db)),
            },
        }
    }

    /// `α` for convergence studies, `K` for comparisons.
    pub fn alpha_or_k(&self) -> f64 {
        match self.kind {
            ExperimentKind::RatioConvergence { alpha, .. } => alpha,
            ExperimentKind::DetectorComparison { k, .. } => k as f64,
        }
    }
}

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub truth: Hypothesis,
    pub labels: Vec<(DetectorId, Hypothesis)>,
    /// Smallest eigenvalue after the PSD clamp.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max/λ_min`, `+∞` when `λ_min` is zero.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorScore {
    pub detector: DetectorId,
    pub trials: usize,
    pub correct: usize,
    pub proportion_correct: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub h0_trials: usize,
    pub h1_trials: usize,
    /// Correct fraction over H0 trials.
    pub specificity: Option<f64>,
    /// Correct fraction over H1 trials.
    pub sensitivity: Option<f64>,
}

/// Aggregates of one sweep point, as produced by [`summarize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub trials: usize,
    pub mean_ratio: f64,
    pub ratio_stderr: f64,
    pub scores: Vec<DetectorScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub sigma2: f64,
    /// Limiting `λ_max/λ_min` (convergence experiments only).
    pub asymptote: Option<f64>,
    pub ratio_to_asymptote: Option<f64>,
    #[serde(flatten)]
    pub summary: PointSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub spec: ExperimentSpec,
    pub points: Vec<SweepPoint>,
    /// Caveats about the run, e.g. normalizing by `b'/a` outside the
    /// detectable region.
    pub notes: Vec<String>,
}

/// Wilson score interval for `successes` out of `trials` at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Means, standard error and per-detector scores of one sweep point.
///
/// Detectors are taken from the first record, in order.
pub fn summarize(records: &[TrialRecord]) -> Result<PointSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::domain("cannot summarize zero trials"))?;
    let n = records.len();
    let mean_ratio = records.iter().map(|r| r.ratio).sum::<f64>() / n as f64;
    let ratio_stderr = if n > 1 && mean_ratio.is_finite() {
        let var = records
            .iter()
            .map(|r| (r.ratio - mean_ratio).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };

    let h0_trials = records.iter().filter(|r| r.truth == Hypothesis::H0).count();
    let h1_trials = n - h0_trials;
    let scores = first
        .labels
        .iter()
        .enumerate()
        .map(|(slot, &(detector, _))| {
            let (mut ok0, mut ok1) = (0, 0);
            for r in records {
                let (id, label) = r.labels[slot];
                debug_assert_eq!(id, detector);
                if label == r.truth {
                    match r.truth {
                        Hypothesis::H0 => ok0 += 1,
                        Hypothesis::H1 => ok1 += 1,
                    }
                }
            }
            let correct = ok0 + ok1;
            let (ci_low, ci_high) = wilson_interval(correct, n);
            let frac = |ok: usize, total: usize| (total > 0).then(|| ok as f64 / total as f64);
            DetectorScore {
                detector,
                trials: n,
                correct,
                proportion_correct: correct as f64 / n as f64,
                ci_low,
                ci_high,
                h0_trials,
                h1_trials,
                specificity: frac(ok0, h0_trials),
                sensitivity: frac(ok1, h1_trials),
            }
        })
        .collect();

    Ok(PointSummary {
        trials: n,
        mean_ratio,
        ratio_stderr,
        scores,
    })
}

struct PointSetup<'a> {
    spec: &'a ExperimentSpec,
    index: usize,
    k: usize,
    n: usize,
    sigma2: f64,
}

impl PointSetup<'_> {
    fn truth(&self, trial: usize) -> Hypothesis {
        match self.spec.kind {
            ExperimentKind::RatioConvergence { hypothesis, .. } => hypothesis,
            ExperimentKind::DetectorComparison { .. } => {
                if trial % 2 == 0 {
                    Hypothesis::H0
                } else {
                    Hypothesis::H1
                }
            }
        }
    }

    fn fading(&self) -> Fading {
        match self.spec.kind {
            ExperimentKind::RatioConvergence { .. } => Fading::unit_energy(self.k),
            ExperimentKind::DetectorComparison { .. } => Fading::Rayleigh,
        }
    }

    fn run_trial(&self, trial: usize) -> Result<TrialRecord> {
        let spec = self.spec;
        let truth = self.truth(trial);
        let scenario = ScenarioConfig {
            k: self.k,
            n: self.n,
            sigma2: self.sigma2,
            hypothesis: truth,
            noise: spec.noise,
            signal: spec.signal,
            fading: self.fading(),
            field: spec.field,
            seed: signal::derive_seed(spec.master_seed, self.index as u64, trial as u64),
        };
        let obs = signal::synthesize(&scenario)?;
        let spectrum = linalg::eigenvalues(&linalg::gram(&obs.y), EigenMethod::Tridiagonal)?;
        let alpha = self.k as f64 / self.n as f64;

        let labels = spec
            .detectors
            .iter()
            .map(|&d| {
                let label = match d {
                    DetectorId::EigRatio => detect::ratio_test(&spectrum, alpha)?.label,
                    DetectorId::MpSupport => {
                        let support = rmt::mp_support(self.sigma2, alpha)?;
                        detect::support_test(&spectrum, &support, spec.slack)?.label
                    }
                    DetectorId::Energy => detect::energy_test(obs.y.row(0), self.sigma2)?.label,
                    DetectorId::EnergyVote => detect::energy_vote(&obs.y, self.sigma2)?.label,
                };
                Ok((d, label))
            })
            .collect::<Result<Vec<_>>>()?;

        let (lambda_min, lambda_max) = spectrum.extremes();
        Ok(TrialRecord {
            trial_index: trial,
            truth,
            labels,
            lambda_min,
            lambda_max,
            ratio: spectrum.condition_ratio(),
        })
    }
}

/// Runs every trial of one sweep point, in parallel on the current rayon pool.
fn run_point(setup: &PointSetup<'_>) -> Result<Vec<TrialRecord>> {
    (0..setup.spec.trials)
        .into_par_iter()
        .map(|t| setup.run_trial(t))
        .collect()
}

/// Runs an experiment on `threads` worker threads (0 = rayon default).
pub fn run(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentSummary> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;

    let sigma2 = spec.sigma2();
    let mut notes = Vec::new();
    let mut points = Vec::new();
    for (index, (k, n)) in spec.sweep()?.into_iter().enumerate() {
        let setup = PointSetup {
            spec,
            index,
            k,
            n,
            sigma2,
        };
        let records = pool.install(|| run_point(&setup))?;
        let summary = summarize(&records)?;
        let alpha = k as f64 / n as f64;

        let asymptote = match spec.kind {
            ExperimentKind::RatioConvergence {
                hypothesis: Hypothesis::H0,
                ..
            } => Some(rmt::ratio_threshold(alpha)?),
            ExperimentKind::RatioConvergence { .. } => {
                let model = rmt::spiked_top_eigenvalue(1.0, sigma2, alpha)?;
                if !model.detectable {
                    let note = format!(
                        "alpha = {alpha}: rho = {:.6} does not exceed sqrt(alpha) = {:.6}; \
                         b'/a normalization lies outside the detectable region",
                        model.rho,
                        alpha.sqrt()
                    );
                    if !notes.contains(&note) {
                        notes.push(note);
                    }
                }
                Some(model.ratio())
            }
            ExperimentKind::DetectorComparison { .. } => None,
        };

        points.push(SweepPoint {
            k,
            n,
            alpha,
            sigma2,
            asymptote,
            ratio_to_asymptote: asymptote.map(|a| summary.mean_ratio / a),
            summary,
        });
    }

    Ok(ExperimentSummary {
        spec: spec.clone(),
        points,
        notes,
    })
}

/// Ratio-convergence study with the defaults of
/// [`ExperimentSpec::ratio_convergence`].
pub fn run_ratio_convergence(
    alpha: f64,
    ns: &[usize],
    hypothesis: Hypothesis,
    trials: usize,
    seed: u64,
) -> Result<ExperimentSummary> {
    let spec = ExperimentSpec::ratio_convergence(
        "ratio-convergence",
        alpha,
        ns.to_vec(),
        hypothesis,
        trials,
        seed,
    );
    run(&spec, 0)
}

/// Detector comparison with the defaults of
/// [`ExperimentSpec::detector_comparison`].
pub fn run_detector_comparison(
    k: usize,
    ns: &[usize],
    rho_db: f64,
    known_variance: bool,
    trials: usize,
    seed: u64,
) -> Result<ExperimentSummary> {
    let spec = ExperimentSpec::detector_comparison(
        "detector-comparison",
        k,
        ns.to_vec(),
        rho_db,
        known_variance,
        trials,
        seed,
    );
    run(&spec, 0)
}

pub mod report {
    //! CSV, gnuplot and manifest renderings of an [`ExperimentSummary`].

    use super::*;

    pub const CSV_HEADER: &str = "experiment,alpha_or_K,N,detector,trials,proportion_correct,\
                                  ci_low,ci_high,mean_ratio,ratio_to_asymptote,seed";

    /// `x` with `digits` significant digits, `%g` style: fixed notation for
    /// decimal exponents in `[-5, digits)`, scientific otherwise, trailing
    /// zeros removed.
    pub fn format_sig(x: f64, digits: usize) -> String {
        if x.is_nan() {
            return "nan".into();
        }
        if x.is_infinite() {
            return if x > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if x == 0.0 {
            return "0".into();
        }
        let digits = digits.max(1);
        let sci = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = sci.split_once('e').expect("exponent present");
        let exp: i32 = exp.parse().expect("integer exponent");
        if exp < -5 || exp >= digits as i32 {
            let mantissa = trim_zeros(mantissa);
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", exp.abs())
        } else {
            let decimals = (digits as i32 - 1 - exp).max(0) as usize;
            trim_zeros(&format!("{x:.decimals$}")).to_string()
        }
    }

    fn trim_zeros(s: &str) -> &str {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            s
        }
    }

    fn opt(x: Option<f64>) -> String {
        x.map(|v| format_sig(v, 9)).unwrap_or_default()
    }

    /// One row per (sweep point, detector).
    pub fn to_csv(summary: &ExperimentSummary) -> String {
        let spec = &summary.spec;
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let key = match spec.kind {
            ExperimentKind::RatioConvergence { alpha, .. } => format_sig(alpha, 9),
            ExperimentKind::DetectorComparison { k, .. } => k.to_string(),
        };
        for p in &summary.points {
            let ratio_cols = match spec.kind {
                ExperimentKind::RatioConvergence { .. } => (
                    format_sig(p.summary.mean_ratio, 9),
                    opt(p.ratio_to_asymptote),
                ),
                // Mixed H0/H1 trials: the mean ratio has no asymptote to compare to.
                ExperimentKind::DetectorComparison { .. } => (String::new(), String::new()),
            };
            for s in &p.summary.scores {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    spec.name,
                    key,
                    p.n,
                    s.detector,
                    s.trials,
                    format_sig(s.proportion_correct, 9),
                    format_sig(s.ci_low, 9),
                    format_sig(s.ci_high, 9),
                    ratio_cols.0,
                    ratio_cols.1,
                    spec.master_seed
                ));
            }
        }
        out
    }

    /// Whitespace-separated table for gnuplot: one line per sweep point.
    pub fn to_dat(summary: &ExperimentSummary) -> String {
        let mut out = format!(
            "# {}\n# N K mean_ratio ratio_to_asymptote",
            summary.spec.name
        );
        for d in &summary.spec.detectors {
            out.push_str(&format!(" {d}"));
        }
        out.push('\n');
        for p in &summary.points {
            out.push_str(&format!(
                "{} {} {} {}",
                p.n,
                p.k,
                format_sig(p.summary.mean_ratio, 9),
                p.ratio_to_asymptote
                    .map_or("nan".into(), |v| format_sig(v, 9))
            ));
            for s in &p.summary.scores {
                out.push_str(&format!(" {}", format_sig(s.proportion_correct, 9)));
            }
            out.push('\n');
        }
        out
    }

    #[derive(Serialize)]
    struct Manifest<'a> {
        tool: &'static str,
        version: &'static str,
        master_seed: u64,
        experiment: &'a ExperimentSpec,
        notes: &'a [String],
    }

    /// Spec echo, seed and library version as pretty JSON.
    pub fn manifest_json(summary: &ExperimentSummary) -> String {
        let manifest = Manifest {
            tool: "eigensense",
            version: crate::VERSION,
            master_seed: summary.spec.master_seed,
            experiment: &summary.spec,
            notes: &summary.notes,
        };
        serde_json::to_string_pretty(&manifest).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::report::format_sig;
    use super::*;

    fn record(truth: Hypothesis, label: Hypothesis, ratio: f64) -> TrialRecord {
        TrialRecord {
            trial_index: 0,
            truth,
            labels: vec![(DetectorId::EigRatio, label)],
            lambda_min: 1.0,
            lambda_max: ratio,
            ratio,
        }
    }

    #[test]
    fn wilson_reference_values() {
        // statsmodels proportion_confint(method="wilson")
        let (lo, hi) = wilson_interval(95, 100);
        assert!((lo - 0.888_249_530_768_080_8).abs() < 1e-12);
        assert!((hi - 0.978_456_320_845_631_9).abs() < 1e-12);
        let (lo, hi) = wilson_interval(100, 100);
        assert!((lo - 0.963_006_501_793_014_3).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(1, 1);
        assert!((lo - 0.206_549_314_377_237_4).abs() < 1e-12);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn summarize_all_correct_and_half() {
        use Hypothesis::*;
        let all: Vec<_> = (0..100).map(|_| record(H1, H1, 2.0)).collect();
        let s = summarize(&all).unwrap();
        assert_eq!(s.scores[0].proportion_correct, 1.0);
        assert_eq!(s.scores[0].ci_high, 1.0);
        assert_eq!(s.mean_ratio, 2.0);
        assert_eq!(s.ratio_stderr, 0.0);

        let half: Vec<_> = (0..100)
            .map(|i| record(if i % 2 == 0 { H0 } else { H1 }, H0, 1.0 + i as f64))
            .collect();
        let s = summarize(&half).unwrap();
        let score = &s.scores[0];
        assert_eq!(score.proportion_correct, 0.5);
        assert_eq!(
            (score.specificity, score.sensitivity),
            (Some(1.0), Some(0.0))
        );
        assert!(score.ci_low <= 0.5 && 0.5 <= score.ci_high);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn sweep_requires_integral_k() {
        let spec = ExperimentSpec::ratio_convergence("x", 0.5, vec![10, 11], Hypothesis::H0, 1, 0);
        assert!(matches!(spec.sweep(), Err(Error::Sweep(_))));
        let spec = ExperimentSpec::ratio_convergence("x", 0.1, vec![10, 20], Hypothesis::H0, 1, 0);
        assert_eq!(spec.sweep().unwrap(), vec![(1, 10), (2, 20)]);
    }

    #[test]
    fn validation_rejects_variance_detectors_when_blind() {
        let mut spec = ExperimentSpec::detector_comparison("x", 4, vec![8], -5.0, false, 2, 0);
        assert!(spec.validate().is_ok());
        spec.detectors.push(DetectorId::EnergyVote);
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::detector_comparison("x", 4, vec![4], -5.0, true, 2, 0);
        spec.detectors.push(DetectorId::MpSupport);
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::detector_comparison("x", 4, vec![8], -5.0, true, 2, 0);
        spec.trials = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sigma2_conventions() {
        let spec = ExperimentSpec::detector_comparison("x", 10, vec![20], -5.0, true, 2, 0);
        assert!((spec.sigma2() - 0.1 / rmt::from_db(-5.0)).abs() < 1e-15);
        let mut total = spec.clone();
        if let ExperimentKind::DetectorComparison { snr_reference, .. } = &mut total.kind {
            *snr_reference = SnrReference::Total;
        }
        assert!((total.sigma2() - 1.0 / rmt::from_db(-5.0)).abs() < 1e-15);
        let conv = ExperimentSpec::ratio_convergence("x", 0.5, vec![20], Hypothesis::H1, 1, 0);
        assert!((conv.sigma2() - rmt::from_db(5.0)).abs() < 1e-12);
    }

    #[test]
    fn single_trial_runs() {
        let spec = ExperimentSpec::detector_comparison("one", 4, vec![8, 16], -5.0, true, 1, 7);
        let summary = run(&spec, 1).unwrap();
        for p in &summary.points {
            for s in &p.summary.scores {
                assert_eq!(s.trials, 1);
                assert!(s.ci_low <= s.proportion_correct && s.proportion_correct <= s.ci_high);
                assert!(s.sensitivity.is_none());
            }
        }
    }

    #[test]
    fn spiked_note_recorded() {
        let summary = run_ratio_convergence(0.5, &[20], Hypothesis::H1, 2, 1).unwrap();
        assert_eq!(summary.notes.len(), 1);
        assert!(summary.points[0].asymptote.is_some());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.25, 9), "0.25");
        assert_eq!(format_sig(9.0, 9), "9");
        assert_eq!(format_sig(33.970_562_748_477_14, 9), "33.9705627");
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(1.234e-7, 9), "1.234e-07");
        assert_eq!(format_sig(-2.5e12, 9), "-2.5e+12");
        assert_eq!(format_sig(123_456_789.0, 9), "123456789");
        assert_eq!(format_sig(f64::INFINITY, 9), "inf");
    }

    #[test]
    fn csv_shape() {
        let spec = ExperimentSpec::detector_comparison("cmp", 4, vec![8, 12], -5.0, true, 4, 3);
        let summary = run(&spec, 1).unwrap();
        let csv = report::to_csv(&summary);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], report::CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2);
        assert!(lines[1].starts_with("cmp,4,8,eig-ratio,4,"));
        assert!(lines[1].ends_with(",,,3"));
        let dat = report::to_dat(&summary);
        assert_eq!(dat.lines().count(), 2 + 2);
        let manifest: serde_json::Value =
            serde_json::from_str(&report::manifest_json(&summary)).unwrap();
        assert_eq!(manifest["master_seed"], 3);
    }
}
