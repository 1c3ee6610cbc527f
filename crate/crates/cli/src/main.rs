use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use eigensense::signal::{Hypothesis, NoiseKind, SampleField, SignalKind};
use eigensense::DetectorId;
use eigensense_cli::commands::{self, DetectOptions, ExperimentOptions, Output};
use eigensense_cli::config::{ConfigFile, FadingKind, ScenarioSection};

/// Eigenvalue-based spectrum sensing.
///
/// Exit status: 0 = H0 or success, 3 = H1, 2 = usage or domain error,
/// 4 = signal not detectable.
#[derive(Parser)]
#[command(name = "eigensense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Marchenko–Pastur edges and the noise-only eigenvalue-ratio threshold.
    MpEdges {
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Run one detector on a matrix file.
    Detect {
        input: PathBuf,
        #[arg(long, default_value = "eig-ratio", value_parser = parse_detector)]
        detector: DetectorId,
        /// Noise variance (mp-support; default energy threshold).
        #[arg(long)]
        sigma2: Option<f64>,
        /// Energy threshold V_T.
        #[arg(long)]
        vt: Option<f64>,
        /// Relative widening of the support for mp-support.
        #[arg(long, default_value_t = 0.0)]
        slack: f64,
        /// Row used by the single-sensor energy detector.
        #[arg(long, default_value_t = 0)]
        sensor: usize,
    },
    /// Synthesize an observation matrix file and its manifest.
    Synth {
        /// Config file with a [scenario] table; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, short = 'o')]
        out: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, conflicts_with = "rho_db")]
        sigma2: Option<f64>,
        /// Sets σ² = 1/ρ for a unit-energy channel.
        #[arg(long, allow_hyphen_values = true)]
        rho_db: Option<f64>,
        #[arg(long, value_parser = parse_hypothesis)]
        hypothesis: Option<Hypothesis>,
        #[arg(long, value_parser = parse_kebab::<NoiseKind>)]
        noise: Option<NoiseKind>,
        #[arg(long, value_parser = parse_kebab::<SignalKind>)]
        signal: Option<SignalKind>,
        #[arg(long, value_parser = parse_kebab::<FadingKind>)]
        fading: Option<FadingKind>,
        #[arg(long, value_parser = parse_kebab::<SampleField>)]
        field: Option<SampleField>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte Carlo experiment and emit CSV.
    Experiment {
        /// Config file with [experiment.<name>] tables; defaults to the bundled presets.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; stdout when absent.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
        /// Also write a gnuplot table.
        #[arg(long)]
        dat: Option<PathBuf>,
        /// List the bundled presets and exit.
        #[arg(long)]
        list: bool,
    },
    /// Estimate the SNR from the eigenvalue ratio of a matrix file.
    EstimateSnr { input: PathBuf },
}

fn parse_detector(s: &str) -> Result<DetectorId, String> {
    s.parse().map_err(|e: eigensense::Error| e.to_string())
}

fn parse_hypothesis(s: &str) -> Result<Hypothesis, String> {
    s.parse().map_err(|e: eigensense::Error| e.to_string())
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("invalid value `{s}`"))
}

fn execute(command: Command) -> Result<Output> {
    match command {
        Command::MpEdges { sigma2, alpha } => commands::mp_edges(sigma2, alpha),
        Command::Detect {
            input,
            detector,
            sigma2,
            vt,
            slack,
            sensor,
        } => {
            let y = commands::read_matrix(&input)?;
            commands::detect(
                &y,
                &DetectOptions {
                    detector,
                    sigma2,
                    vt,
                    slack,
                    sensor,
                },
            )
        }
        Command::Synth {
            config,
            out,
            k,
            n,
            sigma2,
            rho_db,
            hypothesis,
            noise,
            signal,
            fading,
            field,
            seed,
        } => {
            let base = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    ConfigFile::parse(&text)
                        .with_context(|| format!("{}", path.display()))?
                        .scenario
                        .with_context(|| format!("{} has no [scenario] table", path.display()))?
                }
                None => ScenarioSection::default(),
            };
            let flags = ScenarioSection {
                k,
                n,
                sigma2,
                rho_db,
                hypothesis,
                noise,
                signal,
                fading,
                field,
                seed,
            };
            commands::synth(&base.merge(flags), &out)
        }
        Command::Experiment {
            config,
            preset,
            trials,
            seed,
            out,
            dat,
            list,
        } => {
            if list {
                return Ok(Output {
                    stdout: commands::list_presets(),
                    ..Default::default()
                });
            }
            commands::experiment(&ExperimentOptions {
                config,
                preset,
                trials,
                seed,
                out,
                dat,
                threads: commands::threads_from_env()?,
            })
        }
        Command::EstimateSnr { input } => commands::estimate_snr(&commands::read_matrix(&input)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
