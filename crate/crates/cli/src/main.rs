//! `cran-cs`: analytic queries, Monte Carlo experiments and figure recipes
//! for compressive channel estimation in dense RRH deployments.

mod analytic;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cran_cs::channel::FadingModel;
use cran_cs::harness::{self, SweepAxis};
use cran_cs::report;
use serde_json::json;

use crate::config::{ExperimentArgs, SchemaError};
use crate::manifest::{manifest_path, RunManifest, RunSpec};

#[derive(Debug, Parser)]
#[command(
    name = "cran-cs",
    version,
    about = "Compressive channel estimation for dense RRH deployments"
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true, env = "CRAN_CS_THREADS")]
    threads: Option<usize>,
    /// Master seed for experiments [default: 0x5EEDC0DE2018].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

/// Fading model selection; Rayleigh when none is given.
#[derive(Debug, Args, Default)]
pub struct FadingArgs {
    /// Rayleigh fading (unit power).
    #[arg(long, conflicts_with_all = ["lognormal_db", "deterministic"])]
    rayleigh: bool,
    /// Lognormal shadowing with this standard deviation in dB.
    #[arg(long, conflicts_with = "deterministic")]
    lognormal_db: Option<f64>,
    /// Unit-modulus gains with random phase.
    #[arg(long)]
    deterministic: bool,
}

impl FadingArgs {
    pub fn model(&self) -> Option<FadingModel> {
        if self.rayleigh {
            Some(FadingModel::RayleighUnit)
        } else if let Some(sigma_db) = self.lognormal_db {
            Some(FadingModel::Lognormal { sigma_db })
        } else if self.deterministic {
            Some(FadingModel::DeterministicUnit)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Axis {
    S,
    Alpha,
    Np,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::S => SweepAxis::S,
            Axis::Alpha => SweepAxis::Alpha,
            Axis::Np => SweepAxis::NPilots,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed-form quantity.
    Analytic {
        #[command(subcommand)]
        op: analytic::AnalyticOp,
    },
    /// Run one experiment point, or a sweep along one axis.
    Simulate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Axis to sweep.
        #[arg(long, requires = "values")]
        sweep: Option<Axis>,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', requires = "sweep")]
        values: Vec<f64>,
        #[arg(long, default_value = "simulate.csv")]
        out: PathBuf,
    },
    /// Oracle MSE_av versus s, simulated and bound.
    Fig1 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40,60")]
        s_values: Vec<usize>,
        #[arg(long, default_value = "fig1.csv")]
        out: PathBuf,
    },
    /// Bound-optimal s versus alpha (analytic).
    Fig2 {
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[command(flatten)]
        fading: FadingArgs,
        #[arg(long, value_delimiter = ',', default_value = "41,81,161")]
        np_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1")]
        noise_values: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "2.5,2.75,3,3.25,3.5,3.75,4,4.25,4.5,4.75,5,5.25,5.5,5.75,6"
        )]
        alphas: Vec<f64>,
        #[arg(long, default_value = "fig2.csv")]
        out: PathBuf,
    },
    /// Basis Pursuit MSE_tot versus N_p, with the oracle at the optimal s.
    Fig3 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        np_values: Vec<usize>,
        #[arg(long, default_value = "fig3.csv")]
        out: PathBuf,
    },
    /// KS check of the s-th strongest received power against its cdf.
    ValidateAppendix {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        s_values: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value = "order_stats.csv")]
        out: PathBuf,
    },
    /// Repeat the run recorded in a manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) if e.is::<SchemaError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed;
    let (spec, out) = match cli.command {
        Command::Analytic { op } => {
            println!("{}", analytic::run(&op)?);
            return Ok(ExitCode::SUCCESS);
        }
        Command::Simulate {
            exp,
            sweep,
            values,
            out,
        } => {
            let config = exp.resolve(json!({}), seed)?;
            (
                RunSpec::Simulate {
                    config,
                    sweep: sweep.map(|a| (a.into(), values)),
                },
                out,
            )
        }
        Command::Fig1 {
            exp,
            alphas,
            s_values,
            out,
        } => {
            let config = exp.resolve(json!({"estimator": "oracle"}), seed)?;
            (
                RunSpec::Fig1 {
                    config,
                    alphas,
                    s_values,
                },
                out,
            )
        }
        Command::Fig2 {
            density,
            fading,
            np_values,
            noise_values,
            alphas,
            out,
        } => (
            RunSpec::Fig2 {
                density,
                fading: fading.model().unwrap_or(FadingModel::RayleighUnit),
                n_pilots: np_values,
                noise_vars: noise_values,
                alphas,
            },
            out,
        ),
        Command::Fig3 {
            exp,
            alphas,
            np_values,
            out,
        } => {
            let config = exp.resolve(json!({"trials": 100}), seed)?;
            (
                RunSpec::Fig3 {
                    config,
                    alphas,
                    n_pilots: np_values,
                },
                out,
            )
        }
        Command::ValidateAppendix {
            exp,
            s_values,
            samples,
            out,
        } => {
            let config = exp.resolve(json!({"hppp_side": harness::ORDER_STAT_SIDE}), seed)?;
            (
                RunSpec::ValidateAppendix {
                    config,
                    s_values,
                    samples,
                },
                out,
            )
        }
        Command::Rerun { manifest, out } => (RunManifest::read(&manifest)?.run, out),
    };
    let started = manifest::now();
    let failed = execute(&spec, &out)?;
    let mpath = manifest_path(&out);
    RunManifest::new(spec, started, vec![out.clone()]).write(&mpath)?;
    println!("wrote {} and {}", out.display(), mpath.display());
    if failed > 0 {
        eprintln!("error: {failed} row(s) failed; see the error column");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs `spec`, writes its CSV to `out` and returns the number of failed rows.
fn execute(spec: &RunSpec, out: &Path) -> Result<usize> {
    match spec {
        RunSpec::Simulate { config, sweep } => {
            if config.window_mode == harness::WindowMode::UniformFinite {
                println!(
                    "overhead reduction {:.1}%",
                    cran_cs::overhead_reduction_percent(config.n_pilots, config.n_rrh)
                );
            }
            let rows = match sweep {
                Some((axis, values)) => harness::sweep(config, *axis, values)?,
                None => harness::sweep(config, SweepAxis::S, &[config.resolve_s()? as f64])?,
            };
            for r in &rows {
                match &r.error {
                    None => println!(
                        "{}={}: s={} mean_average={} mean_total={} bound_average={}",
                        r.axis,
                        r.value,
                        show(r.s),
                        show(r.mean_average),
                        show(r.mean_total),
                        show(r.bound_average)
                    ),
                    Some(e) => println!("{}={} error: {e}", r.axis, r.value),
                }
            }
            report::write_csv_file(out, &rows)?;
            Ok(rows.iter().filter(|r| !r.is_ok()).count())
        }
        RunSpec::Fig1 {
            config,
            alphas,
            s_values,
        } => {
            let rows = harness::fig1(config, alphas, s_values)?;
            report::write_csv_file(out, &rows)?;
            Ok(rows.iter().filter(|r| !r.is_ok()).count())
        }
        RunSpec::Fig2 {
            density,
            fading,
            n_pilots,
            noise_vars,
            alphas,
        } => {
            let rows = harness::fig2(*density, *fading, n_pilots, noise_vars, alphas);
            report::write_csv_file(out, &rows)?;
            Ok(rows.iter().filter(|r| r.error.is_some()).count())
        }
        RunSpec::Fig3 {
            config,
            alphas,
            n_pilots,
        } => {
            let rows = harness::fig3(config, alphas, n_pilots)?;
            report::write_csv_file(out, &rows)?;
            Ok(rows.iter().filter(|r| r.error.is_some()).count())
        }
        RunSpec::ValidateAppendix {
            config,
            s_values,
            samples,
        } => {
            let rows = harness::validate_order_stats(config, s_values, *samples)?;
            for r in &rows {
                println!("s={} ks={:.4}", r.s, r.ks_distance);
            }
            report::write_csv_file(out, &rows)?;
            Ok(0)
        }
    }
}

fn show<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}
