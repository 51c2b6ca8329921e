//! Closed-form MSE analysis of the oracle LS estimator under Gaussian pilots
//! and a homogeneous Poisson RRH field, and the distribution of the `s`-th
//! strongest received power.
//!
//! All Gamma-function ratios are evaluated as differences of log-Gamma
//! values so that `s` can run into the thousands.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::channel::check_alpha;
use crate::error::{Error, Result};

/// Parameters of an analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Path-loss exponent, `> 2`.
    pub alpha: f64,
    /// RRH density (per unit area).
    pub density: f64,
    /// Fading moment `E|c|^(4/alpha)`.
    pub moment: f64,
    pub noise_var: f64,
    pub n_pilots: usize,
    /// Number of estimated (strongest) channels.
    pub s: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Per-coefficient error on the estimated support.
    Average,
    /// Error over the whole channel vector, ignored entries counted as zero.
    Total,
}

impl MetricKind {
    /// Interference and noise weights `(beta, gamma)`.
    pub fn weights(self, n_pilots: usize, s: usize) -> (f64, f64) {
        match self {
            MetricKind::Average => (1.0, 1.0),
            MetricKind::Total => ((n_pilots - 1) as f64, s as f64),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Average => "average",
            MetricKind::Total => "total",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" | "av" | "avg" => Ok(MetricKind::Average),
            "total" | "tot" => Ok(MetricKind::Total),
            other => Err(Error::invalid(format!("unknown metric kind {other:?}"))),
        }
    }
}

impl Scenario {
    pub fn new(
        alpha: f64,
        density: f64,
        moment: f64,
        noise_var: f64,
        n_pilots: usize,
        s: usize,
    ) -> Result<Self> {
        let sc = Scenario {
            alpha,
            density,
            moment,
            noise_var,
            n_pilots,
            s,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_s(self, s: usize) -> Self {
        Scenario { s, ..self }
    }

    /// Checks the field ranges shared by all operations (not the
    /// per-operation constraints on `s`).
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        positive("density", self.density)?;
        positive("moment", self.moment)?;
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!(
                "noise_var must be >= 0, got {}",
                self.noise_var
            )));
        }
        if self.n_pilots == 0 {
            return Err(Error::invalid("n_pilots must be >= 1"));
        }
        Ok(())
    }

    pub fn power_process(&self) -> PowerProcess {
        PowerProcess {
            alpha: self.alpha,
            density: self.density,
            moment: self.moment,
        }
    }

    /// `pi * lambda * m`
    fn pi_lambda_m(&self) -> f64 {
        PI * self.density * self.moment
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {v}")))
    }
}

/// Smallest integer strictly greater than `alpha/2 - 1` (and at least 1).
pub fn min_admissible_s(alpha: f64) -> usize {
    ((alpha / 2.0 - 1.0).floor() as i64 + 1).max(1) as usize
}

fn check_s_lower(sc: &Scenario) -> Result<()> {
    if sc.s == 0 || (sc.s as f64) <= sc.alpha / 2.0 - 1.0 {
        return Err(Error::invalid(format!(
            "s must satisfy s > alpha/2 - 1 = {} (and s >= 1), got {}",
            sc.alpha / 2.0 - 1.0,
            sc.s
        )));
    }
    Ok(())
}

fn check_s_upper(sc: &Scenario) -> Result<()> {
    if sc.s == 0 || sc.s + 4 > sc.n_pilots {
        return Err(Error::invalid(format!(
            "s must satisfy 1 <= s <= n_pilots - 4 = {}, got {}",
            sc.n_pilots as i64 - 4,
            sc.s
        )));
    }
    Ok(())
}

/// `ln( Gamma(s + 1 - alpha/2) / (s - 1)! )`
fn ln_gamma_ratio(s: usize, alpha: f64) -> f64 {
    ln_gamma(s as f64 + 1.0 - alpha / 2.0) - ln_gamma(s as f64)
}

/// Expected power of the ignored channels, `E||h_Sbar||^2`, for an infinite
/// Poisson RRH field:
/// `2 (pi lambda m)^(alpha/2) Gamma(s + 1 - alpha/2) / ((s - 1)! (alpha - 2))`.
pub fn residual_power_expected(sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    check_s_lower(sc)?;
    let a = sc.alpha;
    let ln = 0.5 * a * sc.pi_lambda_m().ln() + ln_gamma_ratio(sc.s, a);
    Ok(2.0 * ln.exp() / (a - 2.0))
}

fn weighted_mse(residual_power: f64, sc: &Scenario, kind: MetricKind) -> f64 {
    let (beta, gamma) = kind.weights(sc.n_pilots, sc.s);
    let dof = (sc.n_pilots - sc.s - 1) as f64;
    beta * residual_power / dof + gamma * sc.noise_var / dof
}

/// Oracle LS error under Gaussian pilots given the expected residual power:
/// `(beta * E||h_Sbar||^2 + gamma * noise_var) / (N_p - s - 1)`.
///
/// For the total metric the noise weight is `s`, which is what the
/// decomposition `MSE_tot = E||h_Sbar||^2 + s * MSE_av` gives.
pub fn lemma1_mse(residual_power: f64, sc: &Scenario, kind: MetricKind) -> Result<f64> {
    sc.validate()?;
    check_s_upper(sc)?;
    if !(residual_power >= 0.0 && residual_power.is_finite()) {
        return Err(Error::invalid(format!(
            "residual power must be >= 0, got {residual_power}"
        )));
    }
    Ok(weighted_mse(residual_power, sc, kind))
}

/// Closed-form upper bound on the oracle MSE, valid for
/// `s` in `(alpha/2 - 1, N_p - 4]`.
pub fn prop2_bound(sc: &Scenario, kind: MetricKind) -> Result<f64> {
    sc.validate()?;
    check_s_lower(sc)?;
    check_s_upper(sc)?;
    Ok(weighted_mse(residual_power_expected(sc)?, sc, kind))
}

/// Exhaustive search of [`prop2_bound`] over admissible integer `s`
/// (`sc.s` is ignored). Values equal to within a relative `1e-12` count as
/// ties and go to the smaller `s`.
pub fn optimal_s_exact(sc: &Scenario, kind: MetricKind) -> Result<(usize, f64)> {
    sc.validate()?;
    let lo = min_admissible_s(sc.alpha);
    let hi = sc.n_pilots.saturating_sub(4);
    if lo > hi {
        return Err(Error::invalid(format!(
            "no admissible s: need alpha/2 - 1 < s <= n_pilots - 4, i.e. {lo}..={hi} is empty"
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for s in lo..=hi {
        let v = prop2_bound(&sc.with_s(s), kind)?;
        match best {
            Some((_, b)) if v >= b * (1.0 - 1e-12) => {}
            _ => best = Some((s, v)),
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Large-`N_p` optimal number of estimated channels, `(alpha - 2)(N_p - 1)/alpha`.
pub fn optimal_s_asymptotic(alpha: f64, n_pilots: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if n_pilots == 0 {
        return Err(Error::invalid("n_pilots must be >= 1"));
    }
    Ok((alpha - 2.0) * (n_pilots as f64 - 1.0) / alpha)
}

/// [`optimal_s_asymptotic`] rounded to the nearest admissible integer.
pub fn optimal_s_asymptotic_rounded(alpha: f64, n_pilots: usize) -> Result<usize> {
    let s = optimal_s_asymptotic(alpha, n_pilots)?.round().max(0.0) as usize;
    let lo = min_admissible_s(alpha);
    let hi = n_pilots.saturating_sub(4).max(lo);
    Ok(s.clamp(lo, hi))
}

/// Asymptotic bound on the minimum MSE in the noiseless case:
/// `beta * (alpha pi m / (alpha - 2) * lambda / (N_p - 1))^(alpha/2)`.
pub fn min_mse_asymptotic(sc: &Scenario, kind: MetricKind) -> Result<f64> {
    sc.validate()?;
    if sc.noise_var != 0.0 {
        return Err(Error::invalid(format!(
            "asymptotic minimum MSE requires noise_var = 0, got {}",
            sc.noise_var
        )));
    }
    if sc.n_pilots < 2 {
        return Err(Error::invalid("n_pilots must be >= 2"));
    }
    let a = sc.alpha;
    let (beta, _) = kind.weights(sc.n_pilots, sc.s.max(1));
    let base = a * PI * sc.moment / (a - 2.0) * sc.density / (sc.n_pilots as f64 - 1.0);
    Ok(beta * base.powf(a / 2.0))
}

/// The received powers `g = |c|^2 ||x||^(-alpha)` of a Poisson RRH field,
/// which form a one-dimensional Poisson process with intensity
/// `(2 pi / alpha) lambda m g^(-(1 + 2/alpha))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProcess {
    pub alpha: f64,
    pub density: f64,
    pub moment: f64,
}

impl PowerProcess {
    pub fn new(alpha: f64, density: f64, moment: f64) -> Result<Self> {
        check_alpha(alpha)?;
        positive("density", density)?;
        positive("moment", moment)?;
        Ok(PowerProcess {
            alpha,
            density,
            moment,
        })
    }

    fn pi_lambda_m(&self) -> f64 {
        PI * self.density * self.moment
    }

    pub fn intensity(&self, g: f64) -> Result<f64> {
        positive("g", g)?;
        Ok(2.0 * PI / self.alpha * self.density * self.moment * g.powf(-(1.0 + 2.0 / self.alpha)))
    }

    /// Mean number of powers above `delta`: `pi lambda m delta^(-2/alpha)`.
    pub fn expected_count_above(&self, delta: f64) -> Result<f64> {
        positive("delta", delta)?;
        Ok(self.pi_lambda_m() * delta.powf(-2.0 / self.alpha))
    }

    /// `P(g_s < delta)`: Poisson probability of fewer than `s` powers above `delta`.
    pub fn gs_cdf(&self, delta: f64, s: usize) -> Result<f64> {
        check_order(s)?;
        let mu = self.expected_count_above(delta)?;
        Ok(poisson_lower_tail(mu, s))
    }

    /// Density of the `s`-th largest power.
    pub fn gs_pdf(&self, delta: f64, s: usize) -> Result<f64> {
        check_order(s)?;
        let mu = self.expected_count_above(delta)?;
        let a = self.alpha;
        let sf = s as f64;
        let ln = LN_2 + sf * self.pi_lambda_m().ln()
            - mu
            - (2.0 * sf / a + 1.0) * delta.ln()
            - a.ln()
            - ln_gamma(sf);
        Ok(ln.exp())
    }

    /// `E(g_s^(1 - 2/alpha)) = (pi lambda m)^(alpha/2 - 1) Gamma(s + 1 - alpha/2) / (s - 1)!`.
    pub fn gs_fractional_moment(&self, s: usize) -> Result<f64> {
        check_order(s)?;
        if (s as f64) <= self.alpha / 2.0 - 1.0 {
            return Err(Error::invalid(format!(
                "s must satisfy s > alpha/2 - 1 = {}, got {s}",
                self.alpha / 2.0 - 1.0
            )));
        }
        let ln = (0.5 * self.alpha - 1.0) * self.pi_lambda_m().ln() + ln_gamma_ratio(s, self.alpha);
        Ok(ln.exp())
    }

    /// The `p`-quantile of `g_s`.
    pub fn gs_quantile(&self, p: f64, s: usize) -> Result<f64> {
        check_order(s)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!(
                "quantile level must be in (0, 1), got {p}"
            )));
        }
        // cdf as a function of mu is decreasing; solve on mu, then map back.
        let (mut lo, mut hi) = (0.0, s as f64 + 10.0);
        while poisson_lower_tail(hi, s) > p {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if poisson_lower_tail(mid, s) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        Ok((self.pi_lambda_m() / mu).powf(self.alpha / 2.0))
    }
}

fn check_order(s: usize) -> Result<()> {
    if s == 0 {
        Err(Error::invalid("order s must be >= 1"))
    } else {
        Ok(())
    }
}

/// `P(N < s)` for `N ~ Poisson(mu)`.
fn poisson_lower_tail(mu: f64, s: usize) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    let ln_mu = mu.ln();
    let total: f64 = (0..s)
        .map(|k| (k as f64 * ln_mu - mu - ln_gamma(k as f64 + 1.0)).exp())
        .sum();
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    const GAMMA_1_5: f64 = 0.886_226_925_452_758;

    fn fig_scenario(s: usize) -> Scenario {
        Scenario::new(4.0, 1.0, GAMMA_1_5, 0.0, 81, s).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // For alpha = 4, Gamma(s - 1)/(s - 1)! = 1/(s - 1), so the residual power
    // reduces to (pi lambda m)^2 / (s - 1).
    fn alpha4_residual(lambda: f64, m: f64, s: usize) -> f64 {
        (PI * lambda * m).powi(2) / (s as f64 - 1.0)
    }

    #[test]
    fn residual_power_alpha4_values() {
        let v = residual_power_expected(&fig_scenario(10)).unwrap();
        assert!(rel(v, alpha4_residual(1.0, GAMMA_1_5, 10)) < 1e-13);
        assert!(rel(v, 0.861_285_463_341_661_7) < 1e-12);
        let sc = Scenario::new(4.0, 1.0, 1.0, 0.0, 81, 2).unwrap();
        assert!(rel(residual_power_expected(&sc).unwrap(), PI * PI) < 1e-13);
    }

    #[test]
    fn residual_power_matches_direct_gamma_formula() {
        for &(a, s) in &[(2.5, 1), (3.0, 3), (3.7, 8), (5.0, 20), (6.0, 30)] {
            let sc = Scenario::new(a, 1.3, 0.9, 0.0, 100, s).unwrap();
            let direct = 2.0 * (PI * 1.3 * 0.9_f64).powf(a / 2.0) * gamma(s as f64 + 1.0 - a / 2.0)
                / (gamma(s as f64) * (a - 2.0));
            assert!(
                rel(residual_power_expected(&sc).unwrap(), direct) < 1e-11,
                "a={a} s={s}"
            );
        }
    }

    #[test]
    fn residual_power_decreases_in_s_and_stays_finite() {
        let vals: Vec<f64> = (2..=100)
            .map(|s| residual_power_expected(&fig_scenario(s)).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        let big = Scenario::new(3.3, 1.0, 1.0, 0.0, 20_000, 10_000).unwrap();
        let v = residual_power_expected(&big).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn residual_power_rejects_small_s() {
        let sc = Scenario {
            alpha: 6.0,
            density: 1.0,
            moment: 1.0,
            noise_var: 0.0,
            n_pilots: 81,
            s: 2,
        };
        assert!(residual_power_expected(&sc).is_err());
        assert!(residual_power_expected(&sc.with_s(3)).is_ok());
        assert!(Scenario::new(2.0, 1.0, 1.0, 0.0, 81, 3).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let sc = Scenario::new(4.0, 1.0, 1.0, 0.0, 10, 5).unwrap();
        assert_eq!(lemma1_mse(1.0, &sc, MetricKind::Average).unwrap(), 0.25);
        assert_eq!(lemma1_mse(0.0, &sc, MetricKind::Average).unwrap(), 0.0);
        assert_eq!(lemma1_mse(0.0, &sc, MetricKind::Total).unwrap(), 0.0);
        let sc = Scenario::new(4.0, 1.0, 1.0, 1.0, 20, 10).unwrap();
        assert!(
            rel(
                lemma1_mse(2.0, &sc, MetricKind::Average).unwrap(),
                1.0 / 3.0
            ) < 1e-15
        );
        // total = residual + s * average
        let tot = lemma1_mse(2.0, &sc, MetricKind::Total).unwrap();
        assert!(rel(tot, 2.0 + 10.0 / 3.0) < 1e-14);
        assert!(lemma1_mse(1.0, &sc.with_s(17), MetricKind::Average).is_err());
        assert!(lemma1_mse(-1.0, &sc, MetricKind::Average).is_err());
    }

    #[test]
    fn prop2_bound_values() {
        let avg = prop2_bound(&fig_scenario(40), MetricKind::Average).unwrap();
        let direct = (PI * GAMMA_1_5).powi(2) / (39.0 * 40.0);
        assert!(rel(avg, direct) < 1e-13);
        assert!(rel(avg, 0.004_968_954_596_201_895) < 1e-12);
        let tot = prop2_bound(&fig_scenario(40), MetricKind::Total).unwrap();
        assert!(rel(tot, 80.0 * direct) < 1e-13);
        for s in [2, 10, 40, 77] {
            let sc = fig_scenario(s);
            for kind in [MetricKind::Average, MetricKind::Total] {
                let composed =
                    lemma1_mse(residual_power_expected(&sc).unwrap(), &sc, kind).unwrap();
                assert_eq!(prop2_bound(&sc, kind).unwrap(), composed);
            }
        }
        assert!(prop2_bound(&fig_scenario(78), MetricKind::Average).is_err());
    }

    #[test]
    fn prop2_bound_scales_with_density() {
        for a in [3.0, 4.0, 5.5] {
            let sc = Scenario::new(a, 1.0, 0.9, 0.0, 81, 20).unwrap();
            let v1 = prop2_bound(&sc, MetricKind::Average).unwrap();
            let v2 = prop2_bound(&Scenario { density: 2.0, ..sc }, MetricKind::Average).unwrap();
            assert!(rel(v2, 2f64.powf(a / 2.0) * v1) < 1e-10);
        }
    }

    #[test]
    fn prop2_bound_blows_up_near_alpha_two() {
        let at = |a: f64| {
            let sc = Scenario::new(a, 1.0, 1.0, 0.0, 81, 10).unwrap();
            prop2_bound(&sc, MetricKind::Average).unwrap()
        };
        assert!(at(2.05) > at(2.5));
        assert!(at(2.5) > at(3.0));
    }

    #[test]
    fn optimal_s_examples() {
        let (s, v) = optimal_s_exact(&fig_scenario(1), MetricKind::Average).unwrap();
        assert_eq!(s, 40);
        assert!(rel(v, 0.004_968_954_596_201_895) < 1e-12);
        let (s_tot, _) = optimal_s_exact(&fig_scenario(1), MetricKind::Total).unwrap();
        assert_eq!(s_tot, 40);

        let noisy = Scenario {
            noise_var: 1e6,
            ..fig_scenario(1)
        };
        assert_eq!(
            optimal_s_exact(&noisy, MetricKind::Average).unwrap().0,
            min_admissible_s(4.0)
        );

        let tiny = Scenario {
            n_pilots: 5,
            ..fig_scenario(1)
        };
        assert!(optimal_s_exact(&tiny, MetricKind::Average).is_err());
    }

    #[test]
    fn optimal_s_noiseless_argmin_agrees_between_metrics() {
        for np in [10, 41, 81, 161, 300] {
            for a in [2.3, 3.0, 4.0, 5.0, 7.5] {
                let sc = Scenario::new(a, 1.0, gamma(1.0 + 2.0 / a), 0.0, np, 1).unwrap();
                assert_eq!(
                    optimal_s_exact(&sc, MetricKind::Average).unwrap().0,
                    optimal_s_exact(&sc, MetricKind::Total).unwrap().0,
                    "np={np} alpha={a}"
                );
            }
        }
    }

    #[test]
    fn optimal_s_asymptotic_examples() {
        assert_eq!(optimal_s_asymptotic(4.0, 81).unwrap(), 40.0);
        assert!((optimal_s_asymptotic(3.0, 100).unwrap() - 33.0).abs() < 1e-12);
        assert!(optimal_s_asymptotic(2.0 + 1e-9, 81).unwrap() < 1e-6);
        assert!(optimal_s_asymptotic(2.0, 81).is_err());
        assert_eq!(optimal_s_asymptotic_rounded(6.0, 81).unwrap(), 53);
        assert_eq!(optimal_s_asymptotic_rounded(2.01, 81).unwrap(), 1);
    }

    #[test]
    fn min_mse_asymptotic_values() {
        let avg = min_mse_asymptotic(&fig_scenario(1), MetricKind::Average).unwrap();
        let direct = (2.0 * PI * GAMMA_1_5 / 80.0).powi(2);
        assert!(rel(avg, direct) < 1e-13);
        assert!(rel(avg, 0.004_844_730_731_296_847) < 1e-12);
        let tot = min_mse_asymptotic(&fig_scenario(1), MetricKind::Total).unwrap();
        assert!(rel(tot, 80.0 * direct) < 1e-13);
        let noisy = Scenario {
            noise_var: 0.1,
            ..fig_scenario(1)
        };
        assert!(min_mse_asymptotic(&noisy, MetricKind::Average).is_err());
    }

    #[test]
    fn min_mse_asymptotic_approaches_exact_minimum() {
        let sc = Scenario {
            n_pilots: 641,
            ..fig_scenario(1)
        };
        let (_, exact) = optimal_s_exact(&sc, MetricKind::Average).unwrap();
        let asym = min_mse_asymptotic(&sc, MetricKind::Average).unwrap();
        assert!((asym / exact - 1.0).abs() < 0.05, "ratio {}", asym / exact);
    }

    #[test]
    fn power_process_spot_values() {
        let pp = PowerProcess::new(4.0, 1.0, 1.0).unwrap();
        assert!(rel(pp.intensity(1.0).unwrap(), PI / 2.0) < 1e-15);
        let pp2 = PowerProcess::new(4.0, 2.0, 1.0).unwrap();
        assert!(
            rel(
                pp2.intensity(0.3).unwrap(),
                2.0 * pp.intensity(0.3).unwrap()
            ) < 1e-15
        );
        assert!(rel(pp.expected_count_above(1.0).unwrap(), PI) < 1e-15);
        assert!(pp.expected_count_above(1e300).unwrap() < 1e-140);
        assert!(pp.intensity(0.0).is_err());
        assert!(pp.expected_count_above(-1.0).is_err());

        assert!(rel(pp.gs_cdf(PI * PI, 1).unwrap(), (-1.0f64).exp()) < 1e-14);
        assert!((pp.gs_cdf(1e12, 7).unwrap() - 1.0).abs() < 1e-4);
        assert!(pp.gs_pdf(1e-6, 3).unwrap() < 1e-300);
        assert!(pp.gs_cdf(1.0, 0).is_err());
    }

    #[test]
    fn gs_cdf_is_monotone() {
        let pp = PowerProcess::new(3.5, 1.0, 0.9).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|k| 10f64.powf(k as f64 / 8.0)).collect();
        for s in 1..=12 {
            let c: Vec<f64> = grid.iter().map(|&d| pp.gs_cdf(d, s).unwrap()).collect();
            assert!(c.windows(2).all(|w| w[1] >= w[0]));
            assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));
            for &d in &grid {
                assert!(pp.gs_cdf(d, s + 1).unwrap() >= pp.gs_cdf(d, s).unwrap());
            }
        }
    }

    #[test]
    fn fractional_moment_closes_the_chain() {
        let pp = PowerProcess::new(4.0, 1.0, GAMMA_1_5).unwrap();
        let v = pp.gs_fractional_moment(10).unwrap();
        assert!(rel(v, PI * GAMMA_1_5 / 9.0) < 1e-13);
        for &(a, s) in &[(2.5, 1), (3.0, 4), (4.0, 10), (6.0, 25)] {
            let sc = Scenario::new(a, 1.7, 0.8, 0.0, 100, s).unwrap();
            let pp = sc.power_process();
            let chained =
                2.0 * PI * sc.density * sc.moment / (a - 2.0) * pp.gs_fractional_moment(s).unwrap();
            assert!(rel(chained, residual_power_expected(&sc).unwrap()) < 1e-12);
        }
        assert!(PowerProcess::new(6.0, 1.0, 1.0)
            .unwrap()
            .gs_fractional_moment(2)
            .is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let pp = PowerProcess::new(4.0, 1.0, GAMMA_1_5).unwrap();
        for s in [1, 5, 10] {
            for p in [0.001, 0.3, 0.9] {
                let q = pp.gs_quantile(p, s).unwrap();
                assert!((pp.gs_cdf(q, s).unwrap() - p).abs() < 1e-9);
            }
        }
    }
}
