//! Channel estimators: oracle least squares on a known support, Basis
//! Pursuit via complex ADMM, and an orthogonal matching pursuit baseline.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::PilotMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LS estimate on a support, plus its zero-filled embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub estimate_on_support: Vec<Complex64>,
    pub support: Vec<usize>,
    pub full_estimate: Vec<Complex64>,
}

/// Least-squares fit of `y` on the columns `support` of `p`, computed with a
/// Householder QR of `P_S` (no normal equations).
pub fn oracle_ls(p: &PilotMatrix, y: &[Complex64], support: &[usize]) -> Result<EstimateResult> {
    let n_pilots = p.n_pilots();
    if y.len() != n_pilots {
        return Err(Error::invalid(format!(
            "observation length {} does not match {n_pilots} pilots",
            y.len()
        )));
    }
    if support.is_empty() || support.len() > n_pilots {
        return Err(Error::invalid(format!(
            "support size must be in 1..={n_pilots}, got {}",
            support.len()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= p.n_rrh()) {
        return Err(Error::invalid(format!(
            "support index {bad} out of range 0..{}",
            p.n_rrh()
        )));
    }
    let z = ls_solve(&p.columns(support), y)?;
    let mut full = vec![ZERO; p.n_rrh()];
    for (&i, &v) in support.iter().zip(&z) {
        full[i] = v;
    }
    Ok(EstimateResult {
        estimate_on_support: z,
        support: support.to_vec(),
        full_estimate: full,
    })
}

/// Solves `min ||a z - y||` for real, tall `a` and complex `y`.
fn ls_solve(a: &DMatrix<f64>, y: &[Complex64]) -> Result<Vec<Complex64>> {
    let (m, n) = a.shape();
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = max_diag * m.max(n) as f64 * f64::EPSILON;
    if let Some(i) = (0..n).find(|&i| r[(i, i)].is_nan() || r[(i, i)].abs() <= tol) {
        return Err(Error::SingularSystem(format!(
            "selected pilot columns are rank deficient (|R[{i},{i}]| = {:e})",
            r[(i, i)].abs()
        )));
    }
    let mut rhs = DMatrix::from_fn(m, 2, |i, j| if j == 0 { y[i].re } else { y[i].im });
    qr.q_tr_mul(&mut rhs);
    let rhs = rhs.rows(0, n).into_owned();
    let sol = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::SingularSystem("triangular solve failed".into()))?;
    Ok((0..n)
        .map(|i| Complex64::new(sol[(i, 0)], sol[(i, 1)]))
        .collect())
}

/// Greedy sparse recovery: `s` steps of maximal normalized residual
/// correlation, refitting by least squares on the selected support each step.
/// Ties and all-zero correlations pick the lowest unused index.
pub fn omp(p: &PilotMatrix, y: &[Complex64], s: usize) -> Result<EstimateResult> {
    if s == 0 || s > p.n_pilots() || s > p.n_rrh() {
        return Err(Error::invalid(format!(
            "omp sparsity must be in 1..={}, got {s}",
            p.n_pilots().min(p.n_rrh())
        )));
    }
    if y.len() != p.n_pilots() {
        return Err(Error::invalid(format!(
            "observation length {} does not match {} pilots",
            y.len(),
            p.n_pilots()
        )));
    }
    let col_norms: Vec<f64> = p.entries().column_iter().map(|c| c.norm()).collect();
    let mut chosen = vec![false; p.n_rrh()];
    let mut support = Vec::with_capacity(s);
    let mut residual = y.to_vec();
    let mut fit = None;
    for _ in 0..s {
        let corr = p.adjoint_apply(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if chosen[j] || col_norms[j] == 0.0 {
                continue;
            }
            let score = c.norm() / col_norms[j];
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let (j, _) =
            best.ok_or_else(|| Error::SingularSystem("no usable pilot column left".into()))?;
        chosen[j] = true;
        support.push(j);
        let mut sorted = support.clone();
        sorted.sort_unstable();
        let est = oracle_ls(p, y, &sorted)?;
        let predicted = p.apply(&est.full_estimate)?;
        for (r, (yi, pi)) in residual.iter_mut().zip(y.iter().zip(&predicted)) {
            *r = yi - pi;
        }
        fit = Some(est);
    }
    Ok(fit.expect("s >= 1"))
}

/// Basis Pursuit solver settings.
///
/// The constraint radius is `epsilon_abs + epsilon_rel * ||y||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpParams {
    pub epsilon_rel: f64,
    pub epsilon_abs: f64,
    /// Allowed relative excess of `||P h - y||` over the radius.
    pub feasibility_tol: f64,
    /// Relative primal/dual residual tolerance of the ADMM iteration.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Inner ADMM steps per outer iteration (objective checkpoint and
    /// penalty update).
    pub check_every: usize,
}

impl Default for BpParams {
    fn default() -> Self {
        BpParams {
            epsilon_rel: 1e-6,
            epsilon_abs: 0.0,
            feasibility_tol: 1e-6,
            tolerance: 1e-6,
            max_iters: 50_000,
            check_every: 10,
        }
    }
}

impl BpParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !nonneg(self.epsilon_rel) || !nonneg(self.epsilon_abs) {
            return Err(Error::invalid("basis pursuit epsilon must be >= 0"));
        }
        if !nonneg(self.feasibility_tol) {
            return Err(Error::invalid("basis pursuit feasibility_tol must be >= 0"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("basis pursuit tolerance must be > 0"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("basis pursuit max_iters must be >= 1"));
        }
        if self.check_every == 0 {
            return Err(Error::invalid("basis pursuit check_every must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpSolution {
    /// Best feasible iterate (smallest l1 norm among outer checkpoints).
    pub estimate: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
    /// l1 norm of the returned-so-far estimate after each outer iteration.
    pub objective_history: Vec<f64>,
    pub epsilon: f64,
    /// `||P h - y||` at the returned estimate.
    pub constraint_norm: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl BpSolution {
    pub fn objective(&self) -> f64 {
        l1_norm(&self.estimate)
    }
}

pub fn l1_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean projection onto `{x : ||P x - y|| <= eps}` using a thin SVD
/// of the real matrix `P`.
struct BallProjector {
    /// Right singular vectors as rows, `r x N`.
    vt: DMatrix<f64>,
    sigma: Vec<f64>,
    /// `U^T y`, split into real and imaginary parts.
    y_re: DVector<f64>,
    y_im: DVector<f64>,
    /// Squared norm of the part of `y` outside the range of `P`.
    y_perp_sq: f64,
    eps: f64,
}

impl BallProjector {
    fn new(p: &PilotMatrix, y: &[Complex64], eps: f64, feasibility_tol: f64) -> Result<Self> {
        let svd = SVD::new(p.entries().clone(), true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::SingularSystem("SVD of pilot matrix failed".into())),
        };
        let smax = svd.singular_values.max();
        let tol = smax * p.n_pilots().max(p.n_rrh()) as f64 * f64::EPSILON;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol)
            .collect();
        if keep.is_empty() {
            return Err(Error::SingularSystem("pilot matrix is zero".into()));
        }
        let sigma: Vec<f64> = keep.iter().map(|&i| svd.singular_values[i]).collect();
        let vt = vt.select_rows(&keep);
        let u = u.select_columns(&keep);
        let y_re_full = DVector::from_iterator(y.len(), y.iter().map(|c| c.re));
        let y_im_full = DVector::from_iterator(y.len(), y.iter().map(|c| c.im));
        let y_re = u.tr_mul(&y_re_full);
        let y_im = u.tr_mul(&y_im_full);
        let y_perp_sq = ((&y_re_full - &u * &y_re).norm_squared()
            + (&y_im_full - &u * &y_im).norm_squared())
        .max(0.0);
        let y_norm = l2_norm(y);
        if y_perp_sq.sqrt() > eps + feasibility_tol * y_norm {
            return Err(Error::Infeasible(format!(
                "||y|| outside the range of P is {:e} > epsilon {:e}",
                y_perp_sq.sqrt(),
                eps
            )));
        }
        Ok(BallProjector {
            vt,
            sigma,
            y_re,
            y_im,
            y_perp_sq,
            eps,
        })
    }

    fn project(&self, a_re: &DVector<f64>, a_im: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let c_re = &self.vt * a_re;
        let c_im = &self.vt * a_im;
        let r = self.sigma.len();
        // b = sigma * c - U^T y: the in-range part of the constraint residual.
        let b: Vec<(f64, f64)> = (0..r)
            .map(|i| {
                (
                    self.sigma[i] * c_re[i] - self.y_re[i],
                    self.sigma[i] * c_im[i] - self.y_im[i],
                )
            })
            .collect();
        let b_sq: Vec<f64> = b.iter().map(|(x, y)| x * x + y * y).collect();
        let b_norm_sq: f64 = b_sq.iter().sum();
        let target = (self.eps * self.eps - self.y_perp_sq).max(0.0);
        if b_norm_sq <= target {
            return (a_re.clone(), a_im.clone());
        }
        // Multiplier t = 1/mu of the KKT system; t = 0 is the affine projection.
        let t = if target > 0.0 {
            let phi = |t: f64| -> f64 {
                b_sq.iter()
                    .zip(&self.sigma)
                    .map(|(bs, s)| {
                        let f = t / (t + s * s);
                        bs * f * f
                    })
                    .sum()
            };
            let smin = self.sigma.iter().copied().fold(f64::INFINITY, f64::min);
            let smax = self.sigma.iter().copied().fold(0.0, f64::max);
            let q = (target / b_norm_sq).sqrt();
            let mut lo = (smin * smin * q).max(f64::MIN_POSITIVE);
            let mut hi = (smax * smax * q / (1.0 - q)).max(lo);
            for _ in 0..100 {
                let mid = (lo * hi).sqrt();
                if phi(mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi / lo < 1.0 + 1e-12 {
                    break;
                }
            }
            lo
        } else {
            0.0
        };
        let mut d_re = DVector::zeros(r);
        let mut d_im = DVector::zeros(r);
        for i in 0..r {
            let f = -self.sigma[i] / (t + self.sigma[i] * self.sigma[i]);
            d_re[i] = f * b[i].0;
            d_im[i] = f * b[i].1;
        }
        (a_re + self.vt.tr_mul(&d_re), a_im + self.vt.tr_mul(&d_im))
    }
}

fn soft_threshold(re: f64, im: f64, kappa: f64) -> (f64, f64) {
    let m = re.hypot(im);
    if m <= kappa {
        (0.0, 0.0)
    } else {
        let f = 1.0 - kappa / m;
        (re * f, im * f)
    }
}

fn to_complex(re: &DVector<f64>, im: &DVector<f64>) -> Vec<Complex64> {
    re.iter()
        .zip(im.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect()
}

/// Basis Pursuit: `min sum_i |h_i|` subject to `||P h - y|| <= epsilon`,
/// over complex `h`.
///
/// ADMM on the splitting `x = z` with `x` constrained to the data ball and
/// the l1 norm (complex soft thresholding) on `z`; the penalty is adapted by
/// residual balancing. The ball projection is exact, so every `x` iterate is
/// feasible; the returned estimate is the feasible checkpoint with the
/// smallest l1 norm. A run that exhausts `max_iters` comes back with
/// `converged == false` rather than as an error.
pub fn basis_pursuit(p: &PilotMatrix, y: &[Complex64], params: &BpParams) -> Result<BpSolution> {
    params.validate()?;
    if y.len() != p.n_pilots() {
        return Err(Error::invalid(format!(
            "observation length {} does not match {} pilots",
            y.len(),
            p.n_pilots()
        )));
    }
    let n = p.n_rrh();
    let y_norm = l2_norm(y);
    let eps = params.epsilon_abs + params.epsilon_rel * y_norm;
    if y_norm <= eps {
        return Ok(BpSolution {
            estimate: vec![ZERO; n],
            converged: true,
            iterations: 0,
            objective_history: vec![0.0],
            epsilon: eps,
            constraint_norm: y_norm,
            primal_residual: 0.0,
            dual_residual: 0.0,
        });
    }
    let proj = BallProjector::new(p, y, eps, params.feasibility_tol)?;

    let zeros = DVector::<f64>::zeros(n);
    let (mut x_re, mut x_im) = proj.project(&zeros, &zeros);
    // Start the penalty so the threshold 1/rho sits at the mean modulus of
    // the minimum-norm feasible point.
    let mean_mod = l1_norm(&to_complex(&x_re, &x_im)) / n as f64;
    let mut rho = if mean_mod > 0.0 { 1.0 / mean_mod } else { 1.0 };
    let (mut z_re, mut z_im) = (x_re.clone(), x_im.clone());
    let mut u_re = DVector::<f64>::zeros(n);
    let mut u_im = DVector::<f64>::zeros(n);

    let mut best = to_complex(&x_re, &x_im);
    let mut best_obj = l1_norm(&best);
    let mut history = vec![best_obj];
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iters {
        iterations += 1;
        let (nx_re, nx_im) = proj.project(&(&z_re - &u_re), &(&z_im - &u_im));
        x_re = nx_re;
        x_im = nx_im;
        let kappa = 1.0 / rho;
        let (mut dz, mut r_sq, mut xn, mut zn) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let (nz_re, nz_im) = soft_threshold(x_re[i] + u_re[i], x_im[i] + u_im[i], kappa);
            dz += (nz_re - z_re[i]).powi(2) + (nz_im - z_im[i]).powi(2);
            z_re[i] = nz_re;
            z_im[i] = nz_im;
            let (rr, ri) = (x_re[i] - nz_re, x_im[i] - nz_im);
            r_sq += rr * rr + ri * ri;
            u_re[i] += rr;
            u_im[i] += ri;
            xn += x_re[i] * x_re[i] + x_im[i] * x_im[i];
            zn += nz_re * nz_re + nz_im * nz_im;
        }
        r_norm = r_sq.sqrt();
        s_norm = rho * dz.sqrt();
        let u_norm = rho * (u_re.norm_squared() + u_im.norm_squared()).sqrt();
        let eps_pri = params.tolerance * xn.sqrt().max(zn.sqrt());
        let eps_dual = params.tolerance * u_norm;
        let done = r_norm <= eps_pri && s_norm <= eps_dual;

        if done || iterations % params.check_every == 0 || iterations == params.max_iters {
            let obj = x_re
                .iter()
                .zip(x_im.iter())
                .map(|(a, b)| a.hypot(*b))
                .sum::<f64>();
            if obj <= best_obj {
                best_obj = obj;
                best = to_complex(&x_re, &x_im);
            }
            history.push(best_obj);
            if !done {
                if r_norm > 10.0 * s_norm {
                    rho *= 2.0;
                    u_re /= 2.0;
                    u_im /= 2.0;
                } else if s_norm > 10.0 * r_norm {
                    rho /= 2.0;
                    u_re *= 2.0;
                    u_im *= 2.0;
                }
            }
        }
        if done {
            converged = true;
            break;
        }
    }

    let predicted = p.apply(&best)?;
    let constraint_norm = l2_norm(
        &predicted
            .iter()
            .zip(y)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    Ok(BpSolution {
        estimate: best,
        converged,
        iterations,
        objective_history: history,
        epsilon: eps,
        constraint_norm,
        primal_residual: r_norm,
        dual_residual: s_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::signal::{complex_gaussian, sample_pilot_matrix};
    use proptest::prelude::*;

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// Normal equations `(A^T A) z = A^T y` solved by Gaussian elimination
    /// with partial pivoting; independent of the QR path.
    fn normal_equations(a: &DMatrix<f64>, y: &[Complex64]) -> Vec<Complex64> {
        let n = a.ncols();
        let mut g: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let mut row: Vec<Complex64> = (0..n)
                    .map(|j| Complex64::new(a.column(i).dot(&a.column(j)), 0.0))
                    .collect();
                row.push(a.column(i).iter().zip(y).map(|(&p, &v)| v * p).sum());
                row
            })
            .collect();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| g[i][k].norm().total_cmp(&g[j][k].norm()))
                .unwrap();
            g.swap(k, piv);
            for i in k + 1..n {
                let f = g[i][k] / g[k][k];
                let pivot_row = g[k].clone();
                for (gij, v) in g[i][k..].iter_mut().zip(&pivot_row[k..]) {
                    *gij -= f * v;
                }
            }
        }
        let mut z = vec![ZERO; n];
        for k in (0..n).rev() {
            let s: Complex64 = (k + 1..n).map(|j| g[k][j] * z[j]).sum();
            z[k] = (g[k][n] - s) / g[k][k];
        }
        z
    }

    #[test]
    fn oracle_ls_recovers_exact_orthogonal_system() {
        // Columns of a scaled 4x4 Hadamard matrix are mutually orthogonal.
        let h4 = DMatrix::from_row_slice(
            4,
            4,
            &[
                1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1., 1., -1., -1., 1.,
            ],
        ) * 0.5;
        let p = PilotMatrix::from_matrix(h4).unwrap();
        let h = vec![
            Complex64::new(1.0, 2.0),
            ZERO,
            Complex64::new(-3.0, 0.5),
            ZERO,
        ];
        let y = p.apply(&h).unwrap();
        let est = oracle_ls(&p, &y, &[0, 2]).unwrap();
        assert!((est.estimate_on_support[0] - h[0]).norm() < 1e-14);
        assert!((est.estimate_on_support[1] - h[2]).norm() < 1e-14);
        assert_eq!(est.full_estimate[1], ZERO);
        assert_eq!(est.full_estimate[3], ZERO);
    }

    #[test]
    fn oracle_ls_rank_one_closed_form() {
        let mut rng = substream(31, 0);
        let p = sample_pilot_matrix(12, 5, &mut rng).unwrap();
        let y: Vec<Complex64> = (0..12).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let est = oracle_ls(&p, &y, &[3]).unwrap();
        let col = p.entries().column(3);
        let expected: Complex64 =
            col.iter().zip(&y).map(|(&c, &v)| v * c).sum::<Complex64>() / col.norm_squared();
        assert!((est.estimate_on_support[0] - expected).norm() < 1e-13 * expected.norm().max(1.0));
    }

    #[test]
    fn oracle_ls_matches_normal_equations() {
        let mut rng = substream(32, 0);
        let p = sample_pilot_matrix(20, 10, &mut rng).unwrap();
        let y: Vec<Complex64> = (0..20).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let support = [0, 2, 3, 5, 7, 9];
        let est = oracle_ls(&p, &y, &support).unwrap();
        let reference = normal_equations(&p.columns(&support), &y);
        assert!(rel_err(&est.estimate_on_support, &reference) < 1e-10);
    }

    #[test]
    fn oracle_ls_detects_rank_deficiency_and_bad_input() {
        let mut m = DMatrix::from_fn(6, 3, |i, j| ((i * 3 + j) as f64).sin());
        let c0 = m.column(0).into_owned();
        m.set_column(2, &(c0 * 2.0));
        let p = PilotMatrix::from_matrix(m).unwrap();
        let y = vec![Complex64::new(1.0, 0.0); 6];
        assert!(matches!(
            oracle_ls(&p, &y, &[0, 2]),
            Err(Error::SingularSystem(_))
        ));
        assert!(oracle_ls(&p, &y, &[]).is_err());
        assert!(oracle_ls(&p, &y, &[7]).is_err());
        assert!(oracle_ls(&p, &y[..3], &[0]).is_err());
    }

    #[test]
    fn oracle_ls_residual_is_orthogonal() {
        let mut rng = substream(33, 0);
        let p = sample_pilot_matrix(30, 40, &mut rng).unwrap();
        let y: Vec<Complex64> = (0..30).map(|_| complex_gaussian(2.0, &mut rng)).collect();
        let support: Vec<usize> = (0..40).step_by(3).collect();
        let est = oracle_ls(&p, &y, &support).unwrap();
        let fitted = p.apply(&est.full_estimate).unwrap();
        let resid: Vec<Complex64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let y_norm = l2_norm(&y);
        for &j in &support {
            let g: Complex64 = p
                .entries()
                .column(j)
                .iter()
                .zip(&resid)
                .map(|(&c, &r)| r * c)
                .sum();
            assert!(g.norm() < 1e-8 * y_norm);
        }
    }

    #[test]
    fn oracle_ls_is_unbiased_over_interference() {
        // Fixed P_S and S; interference P_Sbar h_Sbar + w redrawn each time.
        let (np, n, s) = (16, 40, 4);
        let mut rng = substream(34, 0);
        let p = sample_pilot_matrix(np, n, &mut rng).unwrap();
        let support: Vec<usize> = (0..s).collect();
        let h_s = [
            Complex64::new(2.0, -1.0),
            Complex64::new(0.5, 0.5),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 3.0),
        ];
        let trials = 10_000;
        let mut errs = vec![Vec::with_capacity(trials); s];
        for t in 0..trials {
            let mut r = substream(35, t as u64);
            let mut h: Vec<Complex64> = (0..n).map(|_| complex_gaussian(0.05, &mut r)).collect();
            h[..s].copy_from_slice(&h_s);
            let y = crate::signal::synthesize(&p, &h, 0.1, &mut r).unwrap().y;
            let est = oracle_ls(&p, &y, &support).unwrap();
            for k in 0..s {
                errs[k].push(est.estimate_on_support[k] - h_s[k]);
            }
        }
        for e in &errs {
            for part in [|c: &Complex64| c.re, |c: &Complex64| c.im] {
                let v: Vec<f64> = e.iter().map(part).collect();
                let (m, se) = crate::stats::mean_stderr(&v);
                assert!(m.abs() < 3.0 * se, "mean {m} stderr {se}");
            }
        }
    }

    proptest! {
        #[test]
        fn oracle_ls_scales_with_observation(seed in 0u64..500, re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let mut rng = substream(36, seed);
            let p = sample_pilot_matrix(10, 8, &mut rng).unwrap();
            let y: Vec<Complex64> = (0..10).map(|_| complex_gaussian(1.0, &mut rng)).collect();
            let a = Complex64::new(re, im);
            let ya: Vec<Complex64> = y.iter().map(|v| v * a).collect();
            let e1 = oracle_ls(&p, &y, &[1, 4, 6]).unwrap();
            let e2 = oracle_ls(&p, &ya, &[1, 4, 6]).unwrap();
            for (u, v) in e1.estimate_on_support.iter().zip(&e2.estimate_on_support) {
                prop_assert!((u * a - v).norm() <= 1e-12 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn omp_recovers_one_sparse_signal() {
        let mut rng = substream(37, 0);
        let p = sample_pilot_matrix(15, 50, &mut rng).unwrap();
        let mut h = vec![ZERO; 50];
        h[17] = Complex64::new(-1.5, 0.7);
        let y = p.apply(&h).unwrap();
        let est = omp(&p, &y, 1).unwrap();
        assert_eq!(est.support, vec![17]);
        assert!((est.estimate_on_support[0] - h[17]).norm() < 1e-8);
    }

    #[test]
    fn omp_zero_observation_and_agreement_with_oracle() {
        let mut rng = substream(38, 0);
        let p = sample_pilot_matrix(15, 50, &mut rng).unwrap();
        let est = omp(&p, &[ZERO; 15], 3).unwrap();
        assert_eq!(est.support, vec![0, 1, 2]);
        assert!(est.full_estimate.iter().all(|c| *c == ZERO));

        let mut h = vec![ZERO; 50];
        h[3] = Complex64::new(4.0, 0.0);
        h[30] = Complex64::new(0.0, -2.0);
        h[44] = Complex64::new(1.0, 1.0);
        let mut y = p.apply(&h).unwrap();
        for v in &mut y {
            *v += complex_gaussian(1e-4, &mut rng);
        }
        let greedy = omp(&p, &y, 3).unwrap();
        assert_eq!(greedy.support, vec![3, 30, 44]);
        let oracle = oracle_ls(&p, &y, &[3, 30, 44]).unwrap();
        assert_eq!(greedy.estimate_on_support, oracle.estimate_on_support);
        assert!(omp(&p, &y, 16).is_err());
    }

    #[test]
    fn bp_zero_observation() {
        let mut rng = substream(39, 0);
        let p = sample_pilot_matrix(10, 30, &mut rng).unwrap();
        let sol = basis_pursuit(&p, &[ZERO; 10], &BpParams::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.estimate.iter().all(|c| *c == ZERO));
    }

    #[test]
    fn bp_square_orthogonal_system_is_exact() {
        // 8x8 Hadamard scaled by 3: orthogonal columns, N_p = N.
        let mut h = DMatrix::from_element(1, 1, 1.0);
        for _ in 0..3 {
            let k = h.nrows();
            let mut next = DMatrix::zeros(2 * k, 2 * k);
            next.view_mut((0, 0), (k, k)).copy_from(&h);
            next.view_mut((0, k), (k, k)).copy_from(&h);
            next.view_mut((k, 0), (k, k)).copy_from(&h);
            next.view_mut((k, k), (k, k)).copy_from(&(-&h));
            h = next;
        }
        let p = PilotMatrix::from_matrix(h * 3.0).unwrap();
        let mut rng = substream(40, 0);
        let truth: Vec<Complex64> = (0..8).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let y = p.apply(&truth).unwrap();
        // Noiseless: equality-constrained BP pins the unique solution.
        let params = BpParams {
            epsilon_rel: 0.0,
            ..BpParams::default()
        };
        let sol = basis_pursuit(&p, &y, &params).unwrap();
        assert!(sol.converged, "iterations {}", sol.iterations);
        assert!(
            rel_err(&sol.estimate, &truth) < 1e-6,
            "err {}",
            rel_err(&sol.estimate, &truth)
        );
    }

    #[test]
    fn bp_exact_recovery_of_two_sparse_vectors() {
        let trials = 100u64;
        let mut good = 0;
        for t in 0..trials {
            let mut rng = substream(41, t);
            let p = sample_pilot_matrix(15, 50, &mut rng).unwrap();
            let mut h = vec![ZERO; 50];
            let i = rand::Rng::random_range(&mut rng, 0..50);
            let mut j = rand::Rng::random_range(&mut rng, 0..49);
            if j >= i {
                j += 1;
            }
            h[i] = complex_gaussian(1.0, &mut rng);
            h[j] = complex_gaussian(1.0, &mut rng);
            let y = p.apply(&h).unwrap();
            let sol = basis_pursuit(&p, &y, &BpParams::default()).unwrap();
            // The oracle LS on the true support recovers h exactly here.
            let mut sup = vec![i, j];
            sup.sort_unstable();
            let oracle = oracle_ls(&p, &y, &sup).unwrap();
            assert!(rel_err(&oracle.full_estimate, &h) < 1e-10);
            if rel_err(&sol.estimate, &h) < 1e-4 {
                good += 1;
            }
        }
        assert!(good >= 95, "exact recoveries {good}/{trials}");
    }

    #[test]
    fn bp_solution_is_feasible_and_objective_monotone() {
        let mut rng = substream(42, 0);
        let p = sample_pilot_matrix(20, 60, &mut rng).unwrap();
        let h: Vec<Complex64> = (0..60)
            .map(|k| complex_gaussian(1.0, &mut rng) * (1.0 + k as f64).powf(-1.5))
            .collect();
        let y = p.apply(&h).unwrap();
        let params = BpParams {
            epsilon_rel: 1e-2,
            ..BpParams::default()
        };
        let sol = basis_pursuit(&p, &y, &params).unwrap();
        assert!(sol.converged);
        let y_norm = l2_norm(&y);
        assert!(sol.constraint_norm <= sol.epsilon + params.feasibility_tol * y_norm);
        assert!(sol.objective() <= l1_norm(&h) * (1.0 + 1e-6));
        let tol = params.tolerance * sol.objective_history[0];
        assert!(sol.objective_history.windows(2).all(|w| w[1] <= w[0] + tol));
        assert!(
            (sol.objective_history.last().unwrap() - sol.objective()).abs()
                < 1e-12 * sol.objective()
        );
    }

    #[test]
    fn bp_flags_non_convergence() {
        let mut rng = substream(43, 0);
        let p = sample_pilot_matrix(20, 60, &mut rng).unwrap();
        let h: Vec<Complex64> = (0..60).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let y = p.apply(&h).unwrap();
        let params = BpParams {
            max_iters: 3,
            ..BpParams::default()
        };
        let sol = basis_pursuit(&p, &y, &params).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 3);
        assert_eq!(sol.estimate.len(), 60);
        assert!(basis_pursuit(
            &p,
            &y,
            &BpParams {
                tolerance: 0.0,
                ..params
            }
        )
        .is_err());
        assert!(basis_pursuit(
            &p,
            &y,
            &BpParams {
                max_iters: 0,
                ..params
            }
        )
        .is_err());
    }
}
