//! Seeded Monte Carlo experiments.
//!
//! Each trial draws from its own counter-based substream (see [`crate::rng`])
//! and per-trial results are collected in trial order before being reduced
//! with pairwise summation, so a report is bit-identical for any rayon pool
//! size. Callers choose the pool with `ThreadPool::install`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, MetricKind, PowerProcess, Scenario};
use crate::channel::{self, ChannelVector, FadingModel};
use crate::error::{Error, Result};
use crate::estimators::{self, BpParams};
use crate::geometry::{self, Deployment, Point, Window};
use crate::rng::{point_key, seeds_digest, substream, TrialRng};
use crate::signal::{self, PilotMatrix};
use crate::stats::{ks_distance, mean_stderr};

/// Resamples allowed per trial after a singular geometry or pilot draw.
pub const MAX_RETRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Oracle,
    BasisPursuit,
    Omp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowMode {
    /// Exactly `n_rrh` RRHs uniform over a square of area `n_rrh / density`.
    UniformFinite,
    /// Poisson field over a square of side `hppp_side`.
    Hppp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotDesign {
    /// I.i.d. standard normal symbols.
    Gaussian,
    /// Random orthogonal columns scaled to norm `sqrt(N_p)`; needs `N_p >= N`.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoSupport {
    Optimal,
}

/// Number of estimated channels: a fixed count or the minimizer of the
/// analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SupportSize {
    Fixed(usize),
    Auto(AutoSupport),
}

impl SupportSize {
    pub const OPTIMAL: SupportSize = SupportSize::Auto(AutoSupport::Optimal);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_rrh: usize,
    pub density: f64,
    pub alpha: f64,
    pub fading: FadingModel,
    pub noise_var: f64,
    pub n_pilots: usize,
    pub s: SupportSize,
    /// Metric whose bound is minimized when `s` is `"optimal"`.
    pub optimize_for: MetricKind,
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub master_seed: u64,
    pub window_mode: WindowMode,
    /// Side of the square window in `hppp` mode; defaults to
    /// `sqrt(n_rrh / density)`.
    pub hppp_side: Option<f64>,
    /// UE position override; the window center otherwise.
    pub ue: Option<Point>,
    pub exclusion_radius: f64,
    pub pilots: PilotDesign,
    pub solver: BpParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_rrh: 500,
            density: 1.0,
            alpha: 4.0,
            fading: FadingModel::RayleighUnit,
            noise_var: 0.0,
            n_pilots: 81,
            s: SupportSize::OPTIMAL,
            optimize_for: MetricKind::Average,
            estimator: EstimatorKind::Oracle,
            trials: 500,
            master_seed: crate::rng::DEFAULT_MASTER_SEED,
            window_mode: WindowMode::UniformFinite,
            hppp_side: None,
            ue: None,
            exclusion_radius: 0.0,
            pilots: PilotDesign::Gaussian,
            solver: BpParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.n_rrh == 0 {
            return Err(Error::invalid("n_rrh must be >= 1"));
        }
        if self.n_pilots == 0 {
            return Err(Error::invalid("n_pilots must be >= 1"));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::invalid(format!(
                "density must be > 0, got {}",
                self.density
            )));
        }
        channel::check_alpha(self.alpha)?;
        self.fading.validate()?;
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!(
                "noise_var must be >= 0, got {}",
                self.noise_var
            )));
        }
        if let Some(side) = self.hppp_side {
            Window::square(side)?;
        }
        if !(self.exclusion_radius >= 0.0 && self.exclusion_radius.is_finite()) {
            return Err(Error::invalid("exclusion_radius must be >= 0"));
        }
        if let SupportSize::Fixed(0) = self.s {
            return Err(Error::invalid("s must be >= 1"));
        }
        self.solver.validate()?;
        Ok(())
    }

    pub fn moment(&self) -> Result<f64> {
        channel::fading_moment(self.fading, self.alpha)
    }

    /// Analytic scenario for these parameters with the given `s`.
    pub fn scenario(&self, s: usize) -> Result<Scenario> {
        Scenario::new(
            self.alpha,
            self.density,
            self.moment()?,
            self.noise_var,
            self.n_pilots,
            s,
        )
    }

    /// Concrete `s`, minimizing the analytic bound when set to `"optimal"`.
    pub fn resolve_s(&self) -> Result<usize> {
        match self.s {
            SupportSize::Fixed(s) => Ok(s),
            SupportSize::Auto(AutoSupport::Optimal) => {
                Ok(analytics::optimal_s_exact(&self.scenario(1)?, self.optimize_for)?.0)
            }
        }
    }

    fn window(&self) -> Result<Window> {
        let side = self
            .hppp_side
            .unwrap_or((self.n_rrh as f64 / self.density).sqrt());
        Window::square(side)
    }

    fn sample_deployment(&self, rng: &mut TrialRng) -> Result<Deployment> {
        let d = match self.window_mode {
            WindowMode::UniformFinite => {
                geometry::sample_uniform_deployment(self.n_rrh, self.density, rng)?
            }
            WindowMode::Hppp => geometry::sample_hppp(self.window()?, self.density, rng)?,
        };
        match self.ue {
            Some(ue) => d.with_ue(ue),
            None => Ok(d),
        }
    }

    fn sample_channels(&self, rng: &mut TrialRng) -> Result<ChannelVector> {
        let d = self.sample_deployment(rng)?;
        channel::draw_channels_with_exclusion(
            &d,
            self.fading,
            self.alpha,
            self.exclusion_radius,
            rng,
        )
    }

    fn sample_pilots(&self, n: usize, rng: &mut TrialRng) -> Result<PilotMatrix> {
        match self.pilots {
            PilotDesign::Gaussian => signal::sample_pilot_matrix(self.n_pilots, n, rng),
            PilotDesign::Orthogonal => orthogonal_pilots(self.n_pilots, n, rng),
        }
    }
}

/// `N_p x n` matrix with orthogonal columns of squared norm `N_p`, taken from
/// the QR factorization of a Gaussian matrix.
pub fn orthogonal_pilots(n_pilots: usize, n: usize, rng: &mut TrialRng) -> Result<PilotMatrix> {
    if n > n_pilots {
        return Err(Error::invalid(format!(
            "orthogonal pilots need n_pilots >= n_rrh, got {n_pilots} < {n}"
        )));
    }
    let g = DMatrix::from_fn(n_pilots, n, |_, _| StandardNormal.sample(rng));
    let q = g.qr().q();
    PilotMatrix::from_matrix(q * (n_pilots as f64).sqrt())
}

/// Sample mean and standard error of one MSE metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub metric: MetricKind,
    pub mean: f64,
    pub stderr: f64,
    /// Trials that entered the mean.
    pub trials: usize,
    pub seeds_digest: u64,
}

impl MonteCarloReport {
    fn from_samples(metric: MetricKind, samples: &[f64], key: u64, trials: usize) -> Self {
        let (mean, stderr) = mean_stderr(samples);
        MonteCarloReport {
            metric,
            mean,
            stderr,
            trials: samples.len(),
            seeds_digest: seeds_digest(key, trials as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub s: usize,
    pub average: MonteCarloReport,
    pub total: MonteCarloReport,
    /// Mean and standard error of the real and imaginary parts of the
    /// per-trial average estimation error `mean(h_hat_S - h_S)`.
    pub bias_re: (f64, f64),
    pub bias_im: (f64, f64),
    /// Mean residual power `||h_Sbar||^2` over trials.
    pub residual: MonteCarloReport,
    pub retries: usize,
    /// Whether the Gaussian-pilot closed forms apply (`s <= N_p - 4`).
    pub lemma_applicable: bool,
}

#[derive(Debug, Clone, Copy)]
struct OracleSample {
    average: f64,
    total: f64,
    residual: f64,
    bias: Complex64,
    retries: usize,
}

fn retrying<T>(
    rng: &mut TrialRng,
    mut f: impl FnMut(&mut TrialRng) -> Result<T>,
) -> Result<(T, usize)> {
    let mut retries = 0;
    loop {
        match f(rng) {
            Ok(v) => return Ok((v, retries)),
            Err(e @ (Error::SingularGeometry { .. } | Error::SingularSystem(_))) => {
                if retries == MAX_RETRIES {
                    return Err(e);
                }
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn oracle_errors(
    cfg: &ExperimentConfig,
    h: &ChannelVector,
    s: usize,
    rng: &mut TrialRng,
) -> Result<(f64, f64, Complex64)> {
    let p = cfg.sample_pilots(h.len(), rng)?;
    let y = signal::synthesize(&p, &h.gains, cfg.noise_var, rng)?.y;
    let est = estimators::oracle_ls(&p, &y, &h.support)?;
    let mut err_sq = 0.0;
    let mut bias = Complex64::new(0.0, 0.0);
    for (&i, &e) in h.support.iter().zip(&est.estimate_on_support) {
        let d = e - h.gains[i];
        err_sq += d.norm_sqr();
        bias += d;
    }
    Ok((err_sq, h.residual_norm_sq(), bias / s as f64))
}

fn oracle_trial(cfg: &ExperimentConfig, s: usize, rng: &mut TrialRng) -> Result<OracleSample> {
    let ((err_sq, residual, bias), retries) = retrying(rng, |rng| {
        let mut h = cfg.sample_channels(rng)?;
        if h.len() < s {
            return Err(Error::SingularGeometry {
                index: h.len(),
                distance: f64::NAN,
            });
        }
        h.set_support(s)?;
        oracle_errors(cfg, &h, s, rng)
    })?;
    Ok(OracleSample {
        average: err_sq / s as f64,
        total: residual + err_sq,
        residual,
        bias,
        retries,
    })
}

fn collect_oracle(
    cfg: &ExperimentConfig,
    s: usize,
    samples: Vec<OracleSample>,
    key: u64,
) -> OracleRun {
    let pick = |f: fn(&OracleSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let n = cfg.trials;
    OracleRun {
        s,
        average: MonteCarloReport::from_samples(MetricKind::Average, &pick(|o| o.average), key, n),
        total: MonteCarloReport::from_samples(MetricKind::Total, &pick(|o| o.total), key, n),
        bias_re: mean_stderr(&pick(|o| o.bias.re)),
        bias_im: mean_stderr(&pick(|o| o.bias.im)),
        residual: MonteCarloReport::from_samples(MetricKind::Total, &pick(|o| o.residual), key, n),
        retries: samples.iter().map(|o| o.retries).sum(),
        lemma_applicable: s + 4 <= cfg.n_pilots,
    }
}

/// Oracle LS over random deployments, channels, pilots and noise.
pub fn run_oracle_mse(cfg: &ExperimentConfig) -> Result<OracleRun> {
    cfg.validate()?;
    let s = cfg.resolve_s()?;
    if s > cfg.n_pilots {
        return Err(Error::invalid(format!(
            "s = {s} exceeds n_pilots = {}",
            cfg.n_pilots
        )));
    }
    if cfg.window_mode == WindowMode::UniformFinite && s > cfg.n_rrh {
        return Err(Error::invalid(format!(
            "s = {s} exceeds n_rrh = {}",
            cfg.n_rrh
        )));
    }
    let key = point_key(cfg.master_seed, 0);
    let samples = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| oracle_trial(cfg, s, &mut substream(key, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_oracle(cfg, s, samples, key))
}

/// Oracle LS for a fixed channel vector (support already selected); only
/// the pilots and noise are redrawn per trial.
pub fn run_oracle_fixed_channel(cfg: &ExperimentConfig, h: &ChannelVector) -> Result<OracleRun> {
    cfg.validate()?;
    let s = h.support.len();
    if s == 0 {
        return Err(Error::invalid("channel vector has no support selected"));
    }
    let key = point_key(cfg.master_seed, 0);
    let samples = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(key, t);
            let ((err_sq, residual, bias), retries) =
                retrying(&mut rng, |rng| oracle_errors(cfg, h, s, rng))?;
            Ok(OracleSample {
                average: err_sq / s as f64,
                total: residual + err_sq,
                residual,
                bias,
                retries,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_oracle(cfg, s, samples, key))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsRun {
    pub total: MonteCarloReport,
    /// Basis Pursuit solves that hit `max_iters`; excluded from the mean.
    pub non_converged: usize,
    pub retries: usize,
}

/// Sparse recovery (Basis Pursuit or OMP) on the full pilot matrix;
/// reports `E||h - h_hat||^2`.
pub fn run_cs_mse(cfg: &ExperimentConfig) -> Result<CsRun> {
    cfg.validate()?;
    let omp_s = match cfg.estimator {
        EstimatorKind::Oracle => {
            return Err(Error::invalid(
                "run_cs_mse needs estimator basis-pursuit or omp",
            ));
        }
        EstimatorKind::Omp => Some(cfg.resolve_s()?),
        EstimatorKind::BasisPursuit => None,
    };
    let key = point_key(cfg.master_seed, 0);
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(key, t);
            retrying(&mut rng, |rng| {
                let h = cfg.sample_channels(rng)?;
                let p = cfg.sample_pilots(h.len(), rng)?;
                let y = signal::synthesize(&p, &h.gains, cfg.noise_var, rng)?.y;
                let (estimate, converged) = match omp_s {
                    Some(s) => (estimators::omp(&p, &y, s)?.full_estimate, true),
                    None => {
                        let sol = estimators::basis_pursuit(&p, &y, &cfg.solver)?;
                        (sol.estimate, sol.converged)
                    }
                };
                let err: f64 = h
                    .gains
                    .iter()
                    .zip(&estimate)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum();
                Ok((err, converged))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<f64> = outcomes
        .iter()
        .filter(|((_, ok), _)| *ok)
        .map(|((e, _), _)| *e)
        .collect();
    Ok(CsRun {
        total: MonteCarloReport::from_samples(MetricKind::Total, &used, key, cfg.trials),
        non_converged: outcomes.iter().filter(|((_, ok), _)| !ok).count(),
        retries: outcomes.iter().map(|(_, r)| r).sum(),
    })
}

/// Mean residual power `||h_Sbar||^2` over random deployments and fading.
pub fn run_residual_power(cfg: &ExperimentConfig, s: usize) -> Result<MonteCarloReport> {
    cfg.validate()?;
    let key = point_key(cfg.master_seed, 0);
    let values = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(key, t);
            retrying(&mut rng, |rng| {
                let mut h = cfg.sample_channels(rng)?;
                if h.len() < s {
                    return Err(Error::SingularGeometry {
                        index: h.len(),
                        distance: f64::NAN,
                    });
                }
                h.set_support(s)?;
                Ok(h.residual_norm_sq())
            })
            .map(|(v, _)| v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloReport::from_samples(
        MetricKind::Total,
        &values,
        key,
        cfg.trials,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    S,
    Alpha,
    NPilots,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::S => "s",
            SweepAxis::Alpha => "alpha",
            SweepAxis::NPilots => "n_pilots",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!(
                    "{} must be a positive integer, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            SweepAxis::S => cfg.s = SupportSize::Fixed(as_count(value)?),
            SweepAxis::Alpha => cfg.alpha = value,
            SweepAxis::NPilots => cfg.n_pilots = as_count(value)?,
        }
        Ok(())
    }
}

/// One row of a sweep. Missing values are `None` (left empty in CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub alpha: f64,
    pub n_pilots: usize,
    pub noise_var: f64,
    pub estimator: String,
    pub s: Option<usize>,
    pub trials: usize,
    pub mean_average: Option<f64>,
    pub stderr_average: Option<f64>,
    pub mean_total: Option<f64>,
    pub stderr_total: Option<f64>,
    pub bound_average: Option<f64>,
    pub bound_total: Option<f64>,
    pub optimal_s_exact: Option<usize>,
    pub optimal_s_asymptotic: Option<f64>,
    pub non_converged: usize,
    pub retries: usize,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(axis: SweepAxis, value: f64, cfg: &ExperimentConfig) -> Self {
        SweepRow {
            axis: axis.name().to_string(),
            value,
            alpha: cfg.alpha,
            n_pilots: cfg.n_pilots,
            noise_var: cfg.noise_var,
            estimator: match cfg.estimator {
                EstimatorKind::Oracle => "oracle",
                EstimatorKind::BasisPursuit => "basis-pursuit",
                EstimatorKind::Omp => "omp",
            }
            .to_string(),
            s: None,
            trials: cfg.trials,
            mean_average: None,
            stderr_average: None,
            mean_total: None,
            stderr_total: None,
            bound_average: None,
            bound_total: None,
            optimal_s_exact: None,
            optimal_s_asymptotic: None,
            non_converged: 0,
            retries: 0,
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs one experiment point and fills in analytic companions.
pub fn run_point(cfg: &ExperimentConfig, row: &mut SweepRow) -> Result<()> {
    cfg.validate()?;
    let base = cfg.scenario(1)?;
    if let Ok((s_opt, _)) = analytics::optimal_s_exact(&base, cfg.optimize_for) {
        row.optimal_s_exact = Some(s_opt);
    }
    row.optimal_s_asymptotic = analytics::optimal_s_asymptotic(cfg.alpha, cfg.n_pilots).ok();
    let s = cfg.resolve_s()?;
    row.s = Some(s);
    let sc = base.with_s(s);
    row.bound_average = analytics::prop2_bound(&sc, MetricKind::Average).ok();
    row.bound_total = analytics::prop2_bound(&sc, MetricKind::Total).ok();
    match cfg.estimator {
        EstimatorKind::Oracle => {
            let run = run_oracle_mse(cfg)?;
            row.mean_average = Some(run.average.mean);
            row.stderr_average = Some(run.average.stderr);
            row.mean_total = Some(run.total.mean);
            row.stderr_total = Some(run.total.stderr);
            row.retries = run.retries;
        }
        EstimatorKind::BasisPursuit | EstimatorKind::Omp => {
            let run = run_cs_mse(cfg)?;
            row.mean_total = Some(run.total.mean);
            row.stderr_total = Some(run.total.stderr);
            row.non_converged = run.non_converged;
            row.retries = run.retries;
        }
    }
    Ok(())
}

/// Runs `template` once per value along `axis`. Row `i` uses master seed
/// `point_key(template.master_seed, i)`; a failing point is recorded in its
/// row and the sweep continues.
pub fn sweep(
    template: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    template.validate()?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let mut cfg = template.clone();
            cfg.master_seed = point_key(template.master_seed, i as u64);
            let mut row = SweepRow::empty(axis, value, &cfg);
            let outcome = axis.apply(&mut cfg, value).and_then(|_| {
                row = SweepRow::empty(axis, value, &cfg);
                run_point(&cfg, &mut row)
            });
            if let Err(e) = outcome {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect())
}

/// Simulated oracle `MSE_av` against the analytic bound, swept over `s` for
/// each path-loss exponent.
pub fn fig1(
    template: &ExperimentConfig,
    alphas: &[f64],
    s_values: &[usize],
) -> Result<Vec<SweepRow>> {
    let values: Vec<f64> = s_values.iter().map(|&s| s as f64).collect();
    let mut rows = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let cfg = ExperimentConfig {
            alpha,
            estimator: EstimatorKind::Oracle,
            master_seed: point_key(template.master_seed, 1000 + k as u64),
            ..template.clone()
        };
        rows.extend(sweep(&cfg, SweepAxis::S, &values)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub n_pilots: usize,
    pub noise_var: f64,
    pub alpha: f64,
    pub moment: f64,
    pub optimal_s_average: Option<usize>,
    pub optimal_s_total: Option<usize>,
    pub bound_average: Option<f64>,
    pub bound_total: Option<f64>,
    pub optimal_s_asymptotic: Option<f64>,
    pub optimal_s_asymptotic_rounded: Option<usize>,
    pub min_mse_asymptotic_average: Option<f64>,
    pub error: Option<String>,
}

/// Bound-optimal `s` versus path-loss exponent (analytic only).
pub fn fig2(
    density: f64,
    fading: FadingModel,
    n_pilots: &[usize],
    noise_vars: &[f64],
    alphas: &[f64],
) -> Vec<Fig2Row> {
    let mut rows = Vec::new();
    for &np in n_pilots {
        for &noise_var in noise_vars {
            for &alpha in alphas {
                let mut row = Fig2Row {
                    n_pilots: np,
                    noise_var,
                    alpha,
                    moment: f64::NAN,
                    optimal_s_average: None,
                    optimal_s_total: None,
                    bound_average: None,
                    bound_total: None,
                    optimal_s_asymptotic: None,
                    optimal_s_asymptotic_rounded: None,
                    min_mse_asymptotic_average: None,
                    error: None,
                };
                let outcome = (|| -> Result<()> {
                    let m = channel::fading_moment(fading, alpha)?;
                    row.moment = m;
                    let sc = Scenario::new(alpha, density, m, noise_var, np, 1)?;
                    let (sa, ba) = analytics::optimal_s_exact(&sc, MetricKind::Average)?;
                    let (st, bt) = analytics::optimal_s_exact(&sc, MetricKind::Total)?;
                    row.optimal_s_average = Some(sa);
                    row.optimal_s_total = Some(st);
                    row.bound_average = Some(ba);
                    row.bound_total = Some(bt);
                    if noise_var == 0.0 {
                        row.optimal_s_asymptotic =
                            Some(analytics::optimal_s_asymptotic(alpha, np)?);
                        row.optimal_s_asymptotic_rounded =
                            Some(analytics::optimal_s_asymptotic_rounded(alpha, np)?);
                        row.min_mse_asymptotic_average =
                            Some(analytics::min_mse_asymptotic(&sc, MetricKind::Average)?);
                    }
                    Ok(())
                })();
                if let Err(e) = outcome {
                    row.error = Some(e.to_string());
                }
                rows.push(row);
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub alpha: f64,
    pub n_pilots: usize,
    pub n_rrh: usize,
    pub trials: usize,
    pub cs_mean_total: Option<f64>,
    pub cs_stderr_total: Option<f64>,
    pub non_converged: usize,
    /// Bound-optimal `s` for the total metric.
    pub optimal_s: Option<usize>,
    pub oracle_bound_total: Option<f64>,
    pub oracle_mean_total: Option<f64>,
    pub oracle_stderr_total: Option<f64>,
    pub error: Option<String>,
}

/// Basis Pursuit `MSE_tot` versus `N_p`, with the oracle bound and the
/// simulated oracle at the bound-optimal `s`.
pub fn fig3(
    template: &ExperimentConfig,
    alphas: &[f64],
    n_pilots: &[usize],
) -> Result<Vec<Fig3Row>> {
    template.validate()?;
    let mut rows = Vec::new();
    for (a, &alpha) in alphas.iter().enumerate() {
        for (k, &np) in n_pilots.iter().enumerate() {
            let seed = point_key(template.master_seed, 2000 + (a * n_pilots.len() + k) as u64);
            let cs_cfg = ExperimentConfig {
                alpha,
                n_pilots: np,
                estimator: EstimatorKind::BasisPursuit,
                master_seed: seed,
                ..template.clone()
            };
            let mut row = Fig3Row {
                alpha,
                n_pilots: np,
                n_rrh: template.n_rrh,
                trials: template.trials,
                cs_mean_total: None,
                cs_stderr_total: None,
                non_converged: 0,
                optimal_s: None,
                oracle_bound_total: None,
                oracle_mean_total: None,
                oracle_stderr_total: None,
                error: None,
            };
            let outcome = (|| -> Result<()> {
                let cs = run_cs_mse(&cs_cfg)?;
                row.cs_mean_total = Some(cs.total.mean);
                row.cs_stderr_total = Some(cs.total.stderr);
                row.non_converged = cs.non_converged;
                let oracle_cfg = ExperimentConfig {
                    estimator: EstimatorKind::Oracle,
                    s: SupportSize::OPTIMAL,
                    optimize_for: MetricKind::Total,
                    ..cs_cfg.clone()
                };
                let s = oracle_cfg.resolve_s()?;
                row.optimal_s = Some(s);
                row.oracle_bound_total = Some(analytics::prop2_bound(
                    &oracle_cfg.scenario(s)?,
                    MetricKind::Total,
                )?);
                let oracle = run_oracle_mse(&oracle_cfg)?;
                row.oracle_mean_total = Some(oracle.total.mean);
                row.oracle_stderr_total = Some(oracle.total.stderr);
                Ok(())
            })();
            if let Err(e) = outcome {
                row.error = Some(e.to_string());
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStatRow {
    pub s: usize,
    pub samples: usize,
    pub ks_distance: f64,
    /// `delta` at which the expected number of powers above it is 1.
    pub unit_mean_delta: f64,
    pub empirical_cdf_at_unit_mean: f64,
    pub analytic_cdf_at_unit_mean: f64,
}

/// Minimum sample count for [`validate_order_stats`].
pub const MIN_ORDER_STAT_SAMPLES: usize = 1000;
/// Default window side for order-statistic validation at unit density.
pub const ORDER_STAT_SIDE: f64 = 200.0;

/// Simulates Poisson fields over a square window (side `cfg.hppp_side`,
/// default [`ORDER_STAT_SIDE`]), extracts the `s`-th largest received power
/// `|h|^2` and compares its empirical cdf to the analytic one.
///
/// The window is rejected when the expected number of powers above the
/// 0.1% quantile of `g_{s_max}` exceeds 1% of the expected point count.
pub fn validate_order_stats(
    cfg: &ExperimentConfig,
    s_values: &[usize],
    samples: usize,
) -> Result<Vec<OrderStatRow>> {
    cfg.validate()?;
    if samples < MIN_ORDER_STAT_SAMPLES {
        return Err(Error::invalid(format!(
            "samples must be >= {MIN_ORDER_STAT_SAMPLES}, got {samples}"
        )));
    }
    let s_max = *s_values
        .iter()
        .max()
        .ok_or_else(|| Error::invalid("no s values given"))?;
    if s_values.contains(&0) {
        return Err(Error::invalid("s values must be >= 1"));
    }
    let window = Window::square(cfg.hppp_side.unwrap_or(ORDER_STAT_SIDE))?;
    let pp = PowerProcess::new(cfg.alpha, cfg.density, cfg.moment()?)?;
    let low = pp.gs_quantile(1e-3, s_max)?;
    let needed = pp.expected_count_above(low)?;
    let available = cfg.density * window.area();
    if needed > 0.01 * available {
        return Err(Error::WindowTooSmall(format!(
            "{needed:.1} powers expected above the 0.1% quantile of g_{s_max}, \
             but the window holds only {available:.1} points on average"
        )));
    }
    let hppp_cfg = ExperimentConfig {
        window_mode: WindowMode::Hppp,
        hppp_side: Some(2.0 * window.half_width()),
        ..cfg.clone()
    };
    let key = point_key(cfg.master_seed, 0);
    let draws = (0..samples as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(key, t);
            retrying(&mut rng, |rng| {
                let h = hppp_cfg.sample_channels(rng)?;
                let mut powers: Vec<f64> = h.gains.iter().map(|g| g.norm_sqr()).collect();
                if powers.len() < s_max {
                    return Err(Error::SingularGeometry {
                        index: powers.len(),
                        distance: f64::NAN,
                    });
                }
                powers.select_nth_unstable_by(s_max - 1, |a, b| b.total_cmp(a));
                let mut top = powers[..s_max].to_vec();
                top.sort_by(|a, b| b.total_cmp(a));
                Ok(top)
            })
            .map(|(v, _)| v)
        })
        .collect::<Result<Vec<_>>>()?;
    let unit_mean_delta = (std::f64::consts::PI * cfg.density * pp.moment).powf(cfg.alpha / 2.0);
    s_values
        .iter()
        .map(|&s| {
            let mut g: Vec<f64> = draws.iter().map(|top| top[s - 1]).collect();
            let below = g.iter().filter(|&&v| v < unit_mean_delta).count();
            let ks = ks_distance(&mut g, |d| pp.gs_cdf(d, s).unwrap_or(f64::NAN));
            Ok(OrderStatRow {
                s,
                samples,
                ks_distance: ks,
                unit_mean_delta,
                empirical_cdf_at_unit_mean: below as f64 / samples as f64,
                analytic_cdf_at_unit_mean: pp.gs_cdf(unit_mean_delta, s)?,
            })
        })
        .collect()
}
