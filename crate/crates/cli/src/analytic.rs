//! `cran-cs analytic <op>`: closed-form quantities by name.

use anyhow::Result;
use clap::{Args, Subcommand};
use cran_cs::analytics::{self, MetricKind, PowerProcess, Scenario};
use cran_cs::channel::{self, FadingModel};

use crate::FadingArgs;

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Path-loss exponent (> 2).
    #[arg(long)]
    alpha: f64,
    /// RRH density per unit area.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[command(flatten)]
    fading: FadingArgs,
    /// Fading moment E|c|^(4/alpha), overriding the fading model.
    #[arg(long, conflicts_with_all = ["rayleigh", "lognormal_db", "deterministic"])]
    moment: Option<f64>,
}

impl ModelArgs {
    fn moment(&self) -> Result<f64> {
        match self.moment {
            Some(m) => Ok(m),
            None => Ok(channel::fading_moment(
                self.fading.model().unwrap_or(FadingModel::RayleighUnit),
                self.alpha,
            )?),
        }
    }

    fn power_process(&self) -> Result<PowerProcess> {
        Ok(PowerProcess::new(self.alpha, self.density, self.moment()?)?)
    }
}

#[derive(Debug, Args)]
pub struct PilotArgs {
    /// Pilot length N_p.
    #[arg(long = "np")]
    n_pilots: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// MSE metric: average or total.
    #[arg(long, default_value = "average")]
    metric: MetricKind,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    pilots: PilotArgs,
}

impl BoundArgs {
    fn scenario(&self, s: usize) -> Result<Scenario> {
        let m = &self.model;
        Ok(Scenario::new(
            m.alpha,
            m.density,
            m.moment()?,
            self.pilots.noise,
            self.pilots.n_pilots,
            s,
        )?)
    }
}

#[derive(Debug, Subcommand)]
pub enum AnalyticOp {
    /// Closed-form bound on the oracle MSE.
    Prop2Bound {
        #[command(flatten)]
        args: BoundArgs,
        /// Number of estimated channels.
        #[arg(long)]
        s: usize,
    },
    /// Bound-minimizing number of estimated channels (exhaustive search).
    OptimalS {
        #[command(flatten)]
        args: BoundArgs,
        /// Also print the minimum bound value.
        #[arg(long)]
        with_value: bool,
    },
    /// Expected residual power of the channels outside the s strongest.
    ResidualPower {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
    },
    /// Oracle LS MSE given a residual power.
    Lemma1 {
        #[command(flatten)]
        pilots: PilotArgs,
        #[arg(long)]
        s: usize,
        /// Residual power ||h_Sbar||^2.
        #[arg(long)]
        residual: f64,
    },
    /// Large-N_p asymptotic minimum MSE (noiseless).
    MinMseAsymptotic {
        #[command(flatten)]
        args: BoundArgs,
    },
    /// Large-N_p optimal number of estimated channels.
    OptimalSAsymptotic {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "np")]
        n_pilots: usize,
        /// Round to the nearest admissible integer.
        #[arg(long)]
        round: bool,
    },
    /// Intensity of the received-power process at g.
    Intensity {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        g: f64,
    },
    /// Expected number of received powers above delta.
    CountAbove {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        delta: f64,
    },
    /// P(g_s < delta) for the s-th largest received power.
    GsCdf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        delta: f64,
    },
    /// Density of the s-th largest received power at delta.
    GsPdf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        delta: f64,
    },
    /// E(g_s^(1 - 2/alpha)).
    GsMoment {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
    },
    /// Quantile of the s-th largest received power.
    GsQuantile {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        p: f64,
    },
    /// Fading moment E|c|^(4/alpha).
    FadingMoment {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        fading: FadingArgs,
    },
    /// Pilot overhead reduction versus one pilot per RRH, in percent.
    Overhead {
        #[arg(long = "np")]
        n_pilots: usize,
        #[arg(long)]
        n_rrh: usize,
    },
}

/// Evaluates `op` and returns the text to print.
pub fn run(op: &AnalyticOp) -> Result<String> {
    let value = match op {
        AnalyticOp::Prop2Bound { args, s } => {
            analytics::prop2_bound(&args.scenario(*s)?, args.pilots.metric)?
        }
        AnalyticOp::OptimalS { args, with_value } => {
            let (s, v) = analytics::optimal_s_exact(&args.scenario(1)?, args.pilots.metric)?;
            return Ok(if *with_value {
                format!("{s} {v}")
            } else {
                s.to_string()
            });
        }
        AnalyticOp::ResidualPower { model, s } => {
            let sc = Scenario::new(model.alpha, model.density, model.moment()?, 0.0, s + 4, *s)?;
            analytics::residual_power_expected(&sc)?
        }
        AnalyticOp::Lemma1 {
            pilots,
            s,
            residual,
        } => {
            // The path-loss exponent does not enter this expression.
            let sc = Scenario::new(4.0, 1.0, 1.0, pilots.noise, pilots.n_pilots, *s)?;
            analytics::lemma1_mse(*residual, &sc, pilots.metric)?
        }
        AnalyticOp::MinMseAsymptotic { args } => {
            analytics::min_mse_asymptotic(&args.scenario(1)?, args.pilots.metric)?
        }
        AnalyticOp::OptimalSAsymptotic {
            alpha,
            n_pilots,
            round,
        } => {
            if *round {
                return Ok(analytics::optimal_s_asymptotic_rounded(*alpha, *n_pilots)?.to_string());
            }
            analytics::optimal_s_asymptotic(*alpha, *n_pilots)?
        }
        AnalyticOp::Intensity { model, g } => model.power_process()?.intensity(*g)?,
        AnalyticOp::CountAbove { model, delta } => {
            model.power_process()?.expected_count_above(*delta)?
        }
        AnalyticOp::GsCdf { model, s, delta } => model.power_process()?.gs_cdf(*delta, *s)?,
        AnalyticOp::GsPdf { model, s, delta } => model.power_process()?.gs_pdf(*delta, *s)?,
        AnalyticOp::GsMoment { model, s } => model.power_process()?.gs_fractional_moment(*s)?,
        AnalyticOp::GsQuantile { model, s, p } => model.power_process()?.gs_quantile(*p, *s)?,
        AnalyticOp::FadingMoment { alpha, fading } => {
            channel::fading_moment(fading.model().unwrap_or(FadingModel::RayleighUnit), *alpha)?
        }
        AnalyticOp::Overhead { n_pilots, n_rrh } => {
            if *n_rrh == 0 {
                anyhow::bail!("n_rrh must be >= 1");
            }
            return Ok(format!(
                "{:.1}",
                cran_cs::overhead_reduction_percent(*n_pilots, *n_rrh)
            ));
        }
    };
    Ok(value.to_string())
}
