//! Order-statistic and residual-power formulas against numerical
//! integration of their defining expressions.

use cran_cs::analytics::{self, PowerProcess, Scenario};

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

/// `int_lo^hi f(x) dx` over a wide positive range, integrated in `ln x`.
fn log_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = |u: f64| {
        let x = u.exp();
        f(x) * x
    };
    // Split into decades so the adaptive rule sees the peak.
    let (a, b) = (lo.ln(), hi.ln());
    let pieces = 200;
    (0..pieces)
        .map(|k| {
            let l = a + (b - a) * k as f64 / pieces as f64;
            let r = a + (b - a) * (k + 1) as f64 / pieces as f64;
            simpson(&g, l, r, 1e-14)
        })
        .sum()
}

fn rayleigh(alpha: f64) -> f64 {
    statrs::function::gamma::gamma(1.0 + 2.0 / alpha)
}

#[test]
fn gs_pdf_integrates_to_one() {
    for (alpha, density) in [(3.0, 1.0), (4.0, 1.0), (5.0, 0.3)] {
        let pp = PowerProcess::new(alpha, density, rayleigh(alpha)).unwrap();
        for s in [1, 2, 5, 10] {
            let total = log_integral(|d| pp.gs_pdf(d, s).unwrap(), 1e-30, 1e30);
            assert!((total - 1.0).abs() < 1e-8, "alpha={alpha} s={s}: {total}");
        }
    }
}

#[test]
fn pdf_is_derivative_of_cdf() {
    let pp = PowerProcess::new(4.0, 1.0, rayleigh(4.0)).unwrap();
    for s in [1, 3, 10] {
        for delta in [0.01, 0.1, 1.0, 5.0, 40.0] {
            let h = delta * 1e-5;
            let fd =
                (pp.gs_cdf(delta + h, s).unwrap() - pp.gs_cdf(delta - h, s).unwrap()) / (2.0 * h);
            let pdf = pp.gs_pdf(delta, s).unwrap();
            // cdf near 1 loses ~1e-16 / h to cancellation.
            assert!(
                (fd - pdf).abs() <= 1e-6 * pdf + 1e-9,
                "s={s} delta={delta}: {fd} vs {pdf}"
            );
        }
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let pp = PowerProcess::new(3.0, 1.0, rayleigh(3.0)).unwrap();
    for s in [1, 4] {
        for delta in [0.05, 0.5, 3.0] {
            let int = log_integral(|d| pp.gs_pdf(d, s).unwrap(), 1e-30, delta);
            let cdf = pp.gs_cdf(delta, s).unwrap();
            assert!(
                (int - cdf).abs() < 1e-9,
                "s={s} delta={delta}: {int} vs {cdf}"
            );
        }
    }
}

#[test]
fn fractional_moment_matches_integral() {
    for alpha in [3.0, 4.0, 6.0] {
        let pp = PowerProcess::new(alpha, 1.0, rayleigh(alpha)).unwrap();
        let q = 1.0 - 2.0 / alpha;
        for s in [analytics::min_admissible_s(alpha), 3, 8] {
            let int = log_integral(|d| d.powf(q) * pp.gs_pdf(d, s).unwrap(), 1e-30, 1e30);
            let closed = pp.gs_fractional_moment(s).unwrap();
            assert!(
                (int / closed - 1.0).abs() < 1e-8,
                "alpha={alpha} s={s}: {int} vs {closed}"
            );
        }
    }
}

#[test]
fn intensity_integrates_to_count_above() {
    let pp = PowerProcess::new(4.5, 2.0, 0.9).unwrap();
    for (a, b) in [(0.1, 1.0), (1e-3, 50.0), (2.0, 3.0)] {
        let int = log_integral(|g| pp.intensity(g).unwrap(), a, b);
        let diff = pp.expected_count_above(a).unwrap() - pp.expected_count_above(b).unwrap();
        assert!(
            (int / diff - 1.0).abs() < 1e-10,
            "[{a}, {b}]: {int} vs {diff}"
        );
    }
}

/// Residual power is the sum of the means of all weaker order statistics.
#[test]
fn residual_power_is_sum_of_weaker_powers() {
    let alpha: f64 = 4.0;
    let m = rayleigh(alpha);
    let pp = PowerProcess::new(alpha, 1.0, m).unwrap();
    let mean_gk = |k: usize| log_integral(|d| d * pp.gs_pdf(d, k).unwrap(), 1e-30, 1e30);
    // For alpha = 4, E g_k = (pi m)^2 / ((k - 1)(k - 2)), so the tail
    // beyond K sums to (pi m)^2 / (K - 1).
    let c = (std::f64::consts::PI * m).powi(2);
    for k in [3, 7, 20] {
        let e = mean_gk(k);
        assert!(
            (e / (c / ((k - 1) * (k - 2)) as f64) - 1.0).abs() < 1e-8,
            "k={k}"
        );
    }
    let s = 10;
    let big_k = 60;
    let head: f64 = (s + 1..=big_k).map(mean_gk).sum();
    let tail = c / (big_k - 1) as f64;
    let sc = Scenario::new(alpha, 1.0, m, 0.0, 81, s).unwrap();
    let closed = analytics::residual_power_expected(&sc).unwrap();
    assert!(
        ((head + tail) / closed - 1.0).abs() < 1e-8,
        "{} vs {closed}",
        head + tail
    );
}
