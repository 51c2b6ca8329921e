//! Acceptance checks for the `cran-cs` library, one function per criterion.
//!
//! Run them with `cargo test -p cran-cs-validation --test acceptance`.

use cran_cs::analytics::{self, MetricKind, Scenario};
use cran_cs::channel::{self, FadingModel};
use cran_cs::geometry;
use cran_cs::harness::{self, EstimatorKind, ExperimentConfig, SupportSize, WindowMode};
use cran_cs::report;
use cran_cs::rng::substream;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gamma_1_5() -> f64 {
    std::f64::consts::PI.sqrt() / 2.0
}

fn reference(alpha: f64, s: usize) -> Scenario {
    let m = channel::fading_moment(FadingModel::RayleighUnit, alpha).unwrap();
    Scenario::new(alpha, 1.0, m, 0.0, 81, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn criterion_1() -> Outcome {
    let sc = Scenario::new(4.0, 1.0, gamma_1_5(), 0.0, 81, 40).unwrap();
    let bound = analytics::prop2_bound(&sc, MetricKind::Average).unwrap();
    let asym = analytics::min_mse_asymptotic(&sc, MetricKind::Average).unwrap();
    let (e_bound, e_asym) = (rel(bound, 0.0049682), rel(asym, 0.0048440));
    outcome(
        e_bound <= 1e-6 && e_asym <= 1e-6,
        format!(
            "prop2_bound = {bound:.7e} (target 4.9682e-3, rel err {e_bound:.1e}); \
             min_mse_asymptotic = {asym:.7e} (target 4.8440e-3, rel err {e_asym:.1e})"
        ),
    )
}

pub fn criterion_2() -> Outcome {
    let mut rng = substream(0xC2, 0);
    let d = geometry::sample_uniform_deployment(500, 1.0, &mut rng).unwrap();
    let mut h = channel::draw_channels(&d, FadingModel::RayleighUnit, 4.0, &mut rng).unwrap();
    h.set_support(40).unwrap();
    let cfg = ExperimentConfig {
        noise_var: 0.01,
        trials: 10_000,
        ..Default::default()
    };
    let run = harness::run_oracle_fixed_channel(&cfg, &h).unwrap();
    let sc = reference(4.0, 40);
    let sc = Scenario {
        noise_var: 0.01,
        ..sc
    };
    let expected = analytics::lemma1_mse(h.residual_norm_sq(), &sc, MetricKind::Average).unwrap();
    let e = rel(run.average.mean, expected);
    outcome(
        e <= 0.03,
        format!(
            "simulated MSE_av {:.5e} +- {:.1e} vs {expected:.5e} (rel err {e:.4})",
            run.average.mean, run.average.stderr
        ),
    )
}

pub fn criterion_3() -> Outcome {
    let cfg = ExperimentConfig {
        window_mode: WindowMode::Hppp,
        hppp_side: Some(200.0),
        trials: 10_000,
        ..Default::default()
    };
    let sim = harness::run_residual_power(&cfg, 10).unwrap();
    let e = rel(sim.mean, 0.861158);
    let analytic = analytics::residual_power_expected(&reference(4.0, 10)).unwrap();
    outcome(
        e <= 0.05,
        format!(
            "simulated E||h_Sbar||^2 {:.5} +- {:.4} vs 0.861158 (rel err {e:.4}); closed form here {analytic:.6}",
            sim.mean, sim.stderr
        ),
    )
}

pub fn criterion_4() -> Outcome {
    let rows =
        harness::validate_order_stats(&ExperimentConfig::default(), &[1, 5, 10], 10_000).unwrap();
    let worst = rows.iter().map(|r| r.ks_distance).fold(0.0, f64::max);
    let detail = rows
        .iter()
        .map(|r| format!("s={} KS={:.4}", r.s, r.ks_distance))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(worst < 0.02, detail)
}

pub fn criterion_5() -> Outcome {
    let tpl = ExperimentConfig {
        trials: 2000,
        ..Default::default()
    };
    let rows = harness::fig1(&tpl, &[3.0, 4.0, 5.0, 6.0], &[5, 10, 20, 40, 60]).unwrap();
    let mut failures = Vec::new();
    for r in &rows {
        let (Some(sim), Some(se), Some(bound)) =
            (r.mean_average, r.stderr_average, r.bound_average)
        else {
            failures.push(format!("alpha={} s={}: {:?}", r.alpha, r.value, r.error));
            continue;
        };
        if sim > bound + 2.0 * se {
            failures.push(format!(
                "alpha={} s={}: sim {sim:.4e} > bound {bound:.4e} + 2 se",
                r.alpha, r.value
            ));
        }
    }
    let s_opt = analytics::optimal_s_exact(&reference(4.0, 1), MetricKind::Average)
        .unwrap()
        .0;
    let at_opt = harness::run_oracle_mse(&ExperimentConfig {
        s: SupportSize::Fixed(s_opt),
        ..tpl.clone()
    })
    .unwrap();
    let bound = analytics::prop2_bound(&reference(4.0, s_opt), MetricKind::Average).unwrap();
    let ratio = bound / at_opt.average.mean;
    if ratio > 2.0 {
        failures.push(format!("bound/sim at s={s_opt} is {ratio:.3}"));
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} points dominated; bound/sim at alpha=4, s={s_opt}: {ratio:.3}",
                rows.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

pub fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let alphas = [2.5, 3.0, 4.0, 5.0, 6.0];
    let mut non_monotone = Vec::new();
    for np in [41, 81, 161] {
        for &alpha in &alphas {
            let sc = Scenario::new(
                alpha,
                1.0,
                channel::fading_moment(FadingModel::RayleighUnit, alpha).unwrap(),
                0.0,
                np,
                1,
            )
            .unwrap();
            let exact = analytics::optimal_s_exact(&sc, MetricKind::Average)
                .unwrap()
                .0;
            let asym = analytics::optimal_s_asymptotic_rounded(alpha, np).unwrap();
            if exact.abs_diff(asym) > 2 {
                failures.push(format!(
                    "N_p={np} alpha={alpha}: exact {exact} vs asymptotic {asym}"
                ));
            }
        }
        let noisy: Vec<usize> = alphas
            .iter()
            .map(|&alpha| {
                let m = channel::fading_moment(FadingModel::RayleighUnit, alpha).unwrap();
                let sc = Scenario::new(alpha, 1.0, m, 0.1, np, 1).unwrap();
                analytics::optimal_s_exact(&sc, MetricKind::Average)
                    .unwrap()
                    .0
            })
            .collect();
        let up = noisy.windows(2).any(|w| w[1] > w[0]);
        let down = noisy.windows(2).any(|w| w[1] < w[0]);
        if up && down {
            non_monotone.push(format!("N_p={np}: {noisy:?}"));
        }
    }
    if non_monotone.is_empty() {
        failures.push("no non-monotone optimal-s curve at noise 0.1".into());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "all 15 within +-2; non-monotone {}",
                non_monotone.join(", ")
            )
        } else {
            failures.join("; ")
        },
    )
}

pub fn criterion_7() -> Outcome {
    let tpl = ExperimentConfig {
        n_rrh: 500,
        trials: 100,
        ..Default::default()
    };
    let rows = harness::fig3(&tpl, &[5.0], &[20, 40, 80, 160]).unwrap();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    let stats: Vec<Option<(f64, f64, f64, f64)>> = rows
        .iter()
        .map(|r| {
            Some((
                r.cs_mean_total?,
                r.cs_stderr_total?,
                r.oracle_mean_total?,
                r.oracle_stderr_total?,
            ))
        })
        .collect();
    for (r, st) in rows.iter().zip(&stats) {
        match st {
            None => failures.push(format!("N_p={}: {:?}", r.n_pilots, r.error)),
            Some((bp, bse, or, ose)) => {
                summary.push(format!(
                    "N_p={} BP {bp:.3e} oracle {or:.3e} nc={}",
                    r.n_pilots, r.non_converged
                ));
                if *bp < or - 2.0 * bse.hypot(*ose) {
                    failures.push(format!(
                        "N_p={}: BP {bp:.3e} below oracle {or:.3e}",
                        r.n_pilots
                    ));
                }
            }
        }
    }
    for (k, w) in stats.windows(2).enumerate() {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            if a.0 - b.0 <= 2.0 * a.1.hypot(b.1) {
                failures.push(format!(
                    "decrease {} -> {} not significant",
                    rows[k].n_pilots,
                    rows[k + 1].n_pilots
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            summary.join("; ")
        } else {
            failures.join("; ")
        },
    )
}

pub fn criterion_8() -> Outcome {
    let v = cran_cs::overhead_reduction_percent(81, 500);
    let shown = format!("{v:.1}");
    outcome(shown == "83.8", format!("overhead reduction {shown}%"))
}

pub fn criterion_9() -> Outcome {
    let cfg = ExperimentConfig {
        n_rrh: 150,
        n_pilots: 30,
        trials: 40,
        ..Default::default()
    };
    let json = serde_json::to_string(&cfg).unwrap();
    let run = |threads: usize, cfg: ExperimentConfig| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let oracle =
                    harness::sweep(&cfg, harness::SweepAxis::S, &[4.0, 8.0, 12.0]).unwrap();
                let bp = harness::sweep(
                    &ExperimentConfig {
                        estimator: EstimatorKind::BasisPursuit,
                        trials: 6,
                        ..cfg
                    },
                    harness::SweepAxis::NPilots,
                    &[20.0, 40.0],
                )
                .unwrap();
                report::to_csv_string(&oracle).unwrap() + &report::to_csv_string(&bp).unwrap()
            })
    };
    let a = run(1, cfg);
    let b = run(4, serde_json::from_str(&json).unwrap());
    let c = run(2, serde_json::from_str(&json).unwrap());
    outcome(
        a == b && b == c,
        format!(
            "{} CSV bytes; identical across 1, 2 and 4 workers: {}",
            a.len(),
            a == b && b == c
        ),
    )
}

pub fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [3.0, 4.0] {
        let m = channel::fading_moment(FadingModel::RayleighUnit, alpha).unwrap();
        for (s, kind) in [(10, MetricKind::Average), (30, MetricKind::Total)] {
            let one =
                analytics::prop2_bound(&Scenario::new(alpha, 1.0, m, 0.0, 81, s).unwrap(), kind)
                    .unwrap();
            let two =
                analytics::prop2_bound(&Scenario::new(alpha, 2.0, m, 0.0, 81, s).unwrap(), kind)
                    .unwrap();
            worst = worst.max(rel(two, 2f64.powf(alpha / 2.0) * one));
        }
    }
    outcome(worst <= 1e-10, format!("max rel deviation {worst:.1e}"))
}

/// A criterion check.
pub type Check = fn() -> Outcome;

/// Criteria in order, with short names.
pub fn criteria() -> [(&'static str, Check); 10] {
    [
        ("analytic spot values", criterion_1),
        ("fixed-channel oracle Monte Carlo", criterion_2),
        ("residual power Monte Carlo", criterion_3),
        ("order-statistic distribution", criterion_4),
        ("MSE_av versus s", criterion_5),
        ("optimal s versus alpha", criterion_6),
        ("Basis Pursuit versus N_p", criterion_7),
        ("overhead arithmetic", criterion_8),
        ("determinism", criterion_9),
        ("density scaling law", criterion_10),
    ]
}
