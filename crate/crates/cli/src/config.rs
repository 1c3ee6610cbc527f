//! TOML run configuration.
//!
//! A config file holds an optional `[scenario]` table for `synth` and any
//! number of `[experiment.<name>]` tables. Unknown keys are rejected, and
//! every experiment is converted to a validated [`ExperimentSpec`] before
//! anything runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use eigensense::montecarlo::{ExperimentKind, ExperimentSpec, SnrReference, DEFAULT_TRIALS};
use eigensense::signal::{Fading, Hypothesis, NoiseKind, SampleField, ScenarioConfig, SignalKind};
use eigensense::{rmt, DetectorId};
use serde::Deserialize;

/// Presets shipped with the binary.
pub const PRESETS: &str = include_str!("../presets.toml");

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub experiment: BTreeMap<String, ExperimentSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FadingKind {
    #[default]
    Rayleigh,
    /// Equal gains `1/√K`.
    Unit,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub sigma2: Option<f64>,
    /// Alternative to `sigma2`: `σ² = 1/ρ`.
    pub rho_db: Option<f64>,
    pub hypothesis: Option<Hypothesis>,
    pub noise: Option<NoiseKind>,
    pub signal: Option<SignalKind>,
    pub fading: Option<FadingKind>,
    pub field: Option<SampleField>,
    pub seed: Option<u64>,
}

impl ScenarioSection {
    /// Fields set in `over` win.
    pub fn merge(self, over: ScenarioSection) -> ScenarioSection {
        ScenarioSection {
            k: over.k.or(self.k),
            n: over.n.or(self.n),
            sigma2: over.sigma2.or(if over.rho_db.is_some() {
                None
            } else {
                self.sigma2
            }),
            rho_db: over.rho_db.or(if over.sigma2.is_some() {
                None
            } else {
                self.rho_db
            }),
            hypothesis: over.hypothesis.or(self.hypothesis),
            noise: over.noise.or(self.noise),
            signal: over.signal.or(self.signal),
            fading: over.fading.or(self.fading),
            field: over.field.or(self.field),
            seed: over.seed.or(self.seed),
        }
    }

    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let k = self.k.context("scenario needs `k`")?;
        let n = self.n.context("scenario needs `n`")?;
        let sigma2 = match (self.sigma2, self.rho_db) {
            (Some(_), Some(_)) => bail!("give either `sigma2` or `rho_db`, not both"),
            (Some(s), None) => s,
            (None, Some(db)) => 1.0 / rmt::from_db(db),
            (None, None) => 1.0,
        };
        let fading = match self.fading.unwrap_or_default() {
            FadingKind::Rayleigh => Fading::Rayleigh,
            FadingKind::Unit => Fading::unit_energy(k),
        };
        let config = ScenarioConfig {
            k,
            n,
            sigma2,
            hypothesis: self.hypothesis.unwrap_or(Hypothesis::H0),
            noise: self.noise.unwrap_or_default(),
            signal: self.signal.unwrap_or_default(),
            fading,
            field: self.field.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    RatioConvergence,
    DetectorComparison,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Kind,
    pub ns: Vec<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub rho_db: Option<f64>,
    // ratio-convergence
    pub alpha: Option<f64>,
    pub hypothesis: Option<Hypothesis>,
    // detector-comparison
    pub k: Option<usize>,
    pub known_variance: Option<bool>,
    pub snr_reference: Option<SnrReference>,
    pub detectors: Option<Vec<DetectorId>>,
    pub noise: Option<NoiseKind>,
    pub signal: Option<SignalKind>,
    pub field: Option<SampleField>,
    pub slack: Option<f64>,
    pub out: Option<PathBuf>,
    pub dat: Option<PathBuf>,
}

impl ExperimentSection {
    pub fn to_spec(&self, name: &str) -> Result<ExperimentSpec> {
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        let rho_db = self.rho_db.unwrap_or(-5.0);
        let mut spec = match self.kind {
            Kind::RatioConvergence => {
                if self.k.is_some() || self.known_variance.is_some() || self.snr_reference.is_some()
                {
                    bail!("[experiment.{name}]: `k`, `known_variance` and `snr_reference` apply only to detector-comparison");
                }
                let alpha = self
                    .alpha
                    .with_context(|| format!("[experiment.{name}] needs `alpha`"))?;
                let hypothesis = self
                    .hypothesis
                    .with_context(|| format!("[experiment.{name}] needs `hypothesis`"))?;
                let mut spec = ExperimentSpec::ratio_convergence(
                    name,
                    alpha,
                    self.ns.clone(),
                    hypothesis,
                    trials,
                    self.seed,
                );
                spec.kind = ExperimentKind::RatioConvergence {
                    alpha,
                    hypothesis,
                    rho_db,
                };
                spec
            }
            Kind::DetectorComparison => {
                if self.alpha.is_some() || self.hypothesis.is_some() {
                    bail!("[experiment.{name}]: `alpha` and `hypothesis` apply only to ratio-convergence");
                }
                let k = self
                    .k
                    .with_context(|| format!("[experiment.{name}] needs `k`"))?;
                let known = self.known_variance.unwrap_or(true);
                let mut spec = ExperimentSpec::detector_comparison(
                    name,
                    k,
                    self.ns.clone(),
                    rho_db,
                    known,
                    trials,
                    self.seed,
                );
                if let Some(reference) = self.snr_reference {
                    spec.kind = ExperimentKind::DetectorComparison {
                        k,
                        rho_db,
                        snr_reference: reference,
                        known_variance: known,
                    };
                }
                spec
            }
        };
        if let Some(d) = &self.detectors {
            spec.detectors = d.clone();
        }
        if let Some(v) = self.noise {
            spec.noise = v;
        }
        if let Some(v) = self.signal {
            spec.signal = v;
        }
        if let Some(v) = self.field {
            spec.field = v;
        }
        if let Some(v) = self.slack {
            spec.slack = v;
        }
        spec.validate()
            .with_context(|| format!("[experiment.{name}]"))?;
        Ok(spec)
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        for (name, section) in &file.experiment {
            section.to_spec(name)?;
        }
        if let Some(s) = &file.scenario {
            if s.k.is_some() && s.n.is_some() {
                s.resolve().context("[scenario]")?;
            }
        }
        Ok(file)
    }

    pub fn presets() -> Self {
        Self::parse(PRESETS).expect("bundled presets are valid")
    }

    /// The named experiment, or the only one when `name` is `None`.
    pub fn experiment(&self, name: Option<&str>) -> Result<(&str, &ExperimentSection)> {
        match name {
            Some(n) => self
                .experiment
                .get_key_value(n)
                .map(|(k, v)| (k.as_str(), v))
                .with_context(|| {
                    let known: Vec<_> = self.experiment.keys().map(String::as_str).collect();
                    format!("no experiment `{n}` (available: {})", known.join(", "))
                }),
            None if self.experiment.len() == 1 => {
                let (k, v) = self.experiment.iter().next().unwrap();
                Ok((k.as_str(), v))
            }
            None => bail!(
                "config has {} experiments; pick one with --preset",
                self.experiment.len()
            ),
        }
    }
}
