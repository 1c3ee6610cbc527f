//! Command implementations. Each returns what to print and the exit status,
//! so the binary stays a thin argument parser.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eigensense::detect::{self, DetectorId};
use eigensense::linalg::{self, EigenMethod};
use eigensense::montecarlo::{
    self,
    report::{self, format_sig},
};
use eigensense::signal::{self, Hypothesis};
use eigensense::{rmt, ComplexMatrix};
use serde::Serialize;

use crate::config::{ConfigFile, ScenarioSection};
use crate::matrix_file;

pub const EXIT_H0: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_H1: i32 = 3;
pub const EXIT_NOT_DETECTABLE: i32 = 4;

pub const THREADS_ENV: &str = "EIGENSENSE_THREADS";

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Default::default()
        }
    }
}

/// Exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let not_detectable = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<eigensense::Error>(),
            Some(eigensense::Error::NotDetectable { .. })
        )
    });
    if not_detectable {
        EXIT_NOT_DETECTABLE
    } else {
        EXIT_USAGE
    }
}

fn label_code(h: Hypothesis) -> i32 {
    match h {
        Hypothesis::H0 => EXIT_H0,
        Hypothesis::H1 => EXIT_H1,
    }
}

fn g9(x: f64) -> String {
    format_sig(x, 9)
}

/// Worker threads from `EIGENSENSE_THREADS`; unset or 0 means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")),
        _ => Ok(0),
    }
}

/// Writes `contents` through a temporary file in the target directory and
/// renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// `<path>.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn mp_edges(sigma2: f64, alpha: f64) -> Result<Output> {
    let s = rmt::mp_support(sigma2, alpha)?;
    Ok(Output::ok(format!(
        "a={} b={} threshold={}\n",
        g9(s.a()),
        g9(s.b()),
        g9(s.ratio_threshold())
    )))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    matrix_file::parse(&text).with_context(|| format!("{}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub detector: DetectorId,
    pub sigma2: Option<f64>,
    pub vt: Option<f64>,
    pub slack: f64,
    pub sensor: usize,
}

pub fn detect(y: &ComplexMatrix, opts: &DetectOptions) -> Result<Output> {
    let vt = || {
        opts.vt
            .or(opts.sigma2)
            .with_context(|| format!("{} needs --vt or --sigma2", opts.detector))
    };
    let (line, label) = match opts.detector {
        DetectorId::EigRatio => {
            let d = detect::rmt_detect_blind(y)?;
            (decision_line(&d), d.label)
        }
        DetectorId::MpSupport => {
            let sigma2 = opts.sigma2.context("mp-support needs --sigma2")?;
            let d = detect::rmt_detect_known_variance(y, sigma2, opts.slack)?;
            (decision_line(&d), d.label)
        }
        DetectorId::Energy => {
            if opts.sensor >= y.rows() {
                bail!("--sensor {} out of range (K = {})", opts.sensor, y.rows());
            }
            let d = detect::energy_test(y.row(opts.sensor), vt()?)?;
            (
                format!("{} sensor={}", decision_line(&d), opts.sensor),
                d.label,
            )
        }
        DetectorId::EnergyVote => {
            let f = detect::energy_vote(y, vt()?)?;
            (
                format!(
                    "detector=energy-vote votes_h1={} votes_total={} label={}",
                    f.votes_h1, f.votes_total, f.label
                ),
                f.label,
            )
        }
    };
    Ok(Output {
        stdout: line + "\n",
        stderr: String::new(),
        code: label_code(label),
    })
}

fn decision_line(d: &detect::Decision) -> String {
    format!(
        "detector={} statistic={} threshold={} label={}",
        d.detector,
        g9(d.statistic),
        g9(d.threshold),
        d.label
    )
}

pub fn estimate_snr(y: &ComplexMatrix) -> Result<Output> {
    if y.rows() >= y.cols() {
        return Err(eigensense::Error::UnsupportedRegime(format!(
            "SNR estimation needs K < N, got K = {}, N = {}",
            y.rows(),
            y.cols()
        ))
        .into());
    }
    let alpha = y.rows() as f64 / y.cols() as f64;
    let spectrum = linalg::eigenvalues(&linalg::gram(y), EigenMethod::default())?;
    let ratio = spectrum.condition_ratio();
    let rho = rmt::snr_from_ratio(ratio, alpha)?;
    Ok(Output::ok(format!(
        "ratio={} threshold={} rho={} rho_db={}\n",
        g9(ratio),
        g9(rmt::ratio_threshold(alpha)?),
        g9(rho),
        g9(rmt::to_db(rho))
    )))
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    tool: &'static str,
    version: &'static str,
    truth: Hypothesis,
    seed: u64,
    config_digest: String,
    channel_energy: Option<f64>,
    config: &'a signal::ScenarioConfig,
}

/// Synthesizes one observation into `out` plus a JSON sidecar.
pub fn synth(scenario: &ScenarioSection, out: &Path) -> Result<Output> {
    let config = scenario.resolve()?;
    let obs = signal::synthesize(&config)?;
    let comment = format!("truth={} seed={}", obs.truth, config.seed);
    write_atomic(out, &matrix_file::render(&obs.y, Some(&comment)))?;
    let manifest = SynthManifest {
        tool: "eigensense",
        version: eigensense::VERSION,
        truth: obs.truth,
        seed: config.seed,
        config_digest: format!("{:016x}", obs.config_digest),
        channel_energy: obs.channel.as_ref().map(|c| c.channel_energy()),
        config: &config,
    };
    write_atomic(
        &manifest_path(out),
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;
    Ok(Output {
        stdout: format!(
            "wrote {} (K={} N={} truth={})\n",
            out.display(),
            config.k,
            config.n,
            obs.truth
        ),
        stderr: format!("seed={}\n", config.seed),
        code: 0,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOptions {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dat: Option<PathBuf>,
    pub threads: usize,
}

/// Resolves the experiment named by `opts` to a validated spec and output paths.
pub fn resolve_experiment(
    opts: &ExperimentOptions,
) -> Result<(montecarlo::ExperimentSpec, Option<PathBuf>, Option<PathBuf>)> {
    let file = match &opts.config {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            ConfigFile::parse(&text).with_context(|| format!("{}", p.display()))?
        }
        None => ConfigFile::presets(),
    };
    let (name, section) = file.experiment(opts.preset.as_deref())?;
    let mut section = section.clone();
    if let Some(t) = opts.trials {
        section.trials = Some(t);
    }
    if let Some(s) = opts.seed {
        section.seed = s;
    }
    let spec = section.to_spec(name)?;
    Ok((
        spec,
        opts.out.clone().or(section.out),
        opts.dat.clone().or(section.dat),
    ))
}

pub fn experiment(opts: &ExperimentOptions) -> Result<Output> {
    let (spec, out, dat) = resolve_experiment(opts)?;
    let summary = montecarlo::run(&spec, opts.threads)?;
    let csv = report::to_csv(&summary);
    let mut stderr = format!("seed={}\n", spec.master_seed);
    for note in &summary.notes {
        stderr.push_str(&format!("note: {note}\n"));
    }
    if let Some(dat) = &dat {
        write_atomic(dat, &report::to_dat(&summary))?;
    }
    let stdout = match &out {
        Some(path) => {
            write_atomic(path, &csv)?;
            write_atomic(
                &manifest_path(path),
                &(report::manifest_json(&summary) + "\n"),
            )?;
            format!("wrote {}\n", path.display())
        }
        None => csv,
    };
    Ok(Output {
        stdout,
        stderr,
        code: 0,
    })
}

pub fn list_presets() -> String {
    ConfigFile::presets()
        .experiment
        .keys()
        .map(|k| format!("{k}\n"))
        .collect()
}
