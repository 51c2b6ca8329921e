//! Gaussian pilot matrices and the training-phase received signal `y = P h + w`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// `N_p x N` real pilot matrix; column `j` is the training sequence of RRH `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    entries: DMatrix<f64>,
}

impl PilotMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("pilot matrix must be non-empty"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("pilot matrix entries must be finite"));
        }
        Ok(PilotMatrix { entries })
    }

    pub fn n_pilots(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_rrh(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Columns listed in `support`, in that order.
    pub fn columns(&self, support: &[usize]) -> DMatrix<f64> {
        self.entries.select_columns(support)
    }

    /// `P h` for a complex vector `h`.
    pub fn apply(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        if h.len() != self.n_rrh() {
            return Err(Error::invalid(format!(
                "channel length {} does not match pilot matrix with {} columns",
                h.len(),
                self.n_rrh()
            )));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_pilots()];
        for (col, &hj) in self.entries.column_iter().zip(h) {
            if hj.re == 0.0 && hj.im == 0.0 {
                continue;
            }
            for (yi, &p) in y.iter_mut().zip(col.iter()) {
                yi.re += p * hj.re;
                yi.im += p * hj.im;
            }
        }
        Ok(y)
    }

    /// `P^T v` for a complex vector `v` of length `N_p`.
    pub fn adjoint_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .column_iter()
            .map(|col| col.iter().zip(v).map(|(&p, &vi)| vi * p).sum())
            .collect()
    }
}

/// Received training signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub y: Vec<Complex64>,
    pub noise_var: f64,
}

/// I.i.d. real standard-normal pilot symbols.
pub fn sample_pilot_matrix<R: Rng + ?Sized>(
    n_pilots: usize,
    n_rrh: usize,
    rng: &mut R,
) -> Result<PilotMatrix> {
    if n_pilots == 0 || n_rrh == 0 {
        return Err(Error::invalid(format!(
            "pilot matrix dimensions must be positive, got {n_pilots}x{n_rrh}"
        )));
    }
    let entries = DMatrix::from_fn(n_pilots, n_rrh, |_, _| StandardNormal.sample(rng));
    Ok(PilotMatrix { entries })
}

/// Circularly-symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

/// `y = P h + w` with `w` i.i.d. complex Gaussian of variance `noise_var`.
pub fn synthesize<R: Rng + ?Sized>(
    p: &PilotMatrix,
    h: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::invalid(format!(
            "noise_var must be >= 0, got {noise_var}"
        )));
    }
    let mut y = p.apply(h)?;
    if noise_var > 0.0 {
        for yi in &mut y {
            *yi += complex_gaussian(noise_var, rng);
        }
    }
    Ok(ReceivedSignal { y, noise_var })
}

/// `y = P h + noise` for an explicit noise realization.
pub fn synthesize_with_noise(
    p: &PilotMatrix,
    h: &[Complex64],
    noise: &[Complex64],
) -> Result<Vec<Complex64>> {
    if noise.len() != p.n_pilots() {
        return Err(Error::invalid(format!(
            "noise length {} does not match {} pilots",
            noise.len(),
            p.n_pilots()
        )));
    }
    let mut y = p.apply(h)?;
    for (yi, wi) in y.iter_mut().zip(noise) {
        *yi += wi;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use proptest::prelude::*;

    #[test]
    fn pilot_dimensions_and_moments() {
        let mut rng = substream(21, 0);
        assert_eq!(
            sample_pilot_matrix(81, 500, &mut rng)
                .unwrap()
                .entries()
                .shape(),
            (81, 500)
        );
        assert!(sample_pilot_matrix(0, 5, &mut rng).is_err());

        let p = sample_pilot_matrix(100, 500, &mut rng).unwrap();
        let n = 50_000.0;
        let mean = p.entries().sum() / n;
        let var = p.entries().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn gram_matrix_averages_to_np_identity() {
        let (np, n, draws) = (8, 4, 1000u64);
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for t in 0..draws {
            let p = sample_pilot_matrix(np, n, &mut substream(22, t)).unwrap();
            acc += p.entries().transpose() * p.entries();
        }
        acc /= draws as f64;
        for i in 0..n {
            assert!(
                (acc[(i, i)] - np as f64).abs() / np as f64 <= 0.05,
                "diag {}",
                acc[(i, i)]
            );
            for j in 0..n {
                if i != j {
                    // Off-diagonal: sd sqrt(np / draws) ~ 0.09 around zero.
                    assert!(acc[(i, j)].abs() < 0.05 * np as f64, "off {}", acc[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn noiseless_signal_is_exact() {
        let mut rng = substream(23, 0);
        let p = sample_pilot_matrix(6, 1, &mut rng).unwrap();
        let h = [Complex64::new(0.5, -2.0)];
        let r = synthesize(&p, &h, 0.0, &mut rng).unwrap();
        for (i, yi) in r.y.iter().enumerate() {
            assert_eq!(*yi, h[0] * p.entries()[(i, 0)]);
        }
        let zero = synthesize(&p, &[Complex64::new(0.0, 0.0)], 0.0, &mut rng).unwrap();
        assert!(zero.y.iter().all(|v| v.norm() == 0.0));
        assert!(synthesize(&p, &[h[0], h[0]], 0.0, &mut rng).is_err());
        assert!(synthesize(&p, &h, -1.0, &mut rng).is_err());
    }

    #[test]
    fn noise_variance_matches() {
        let mut rng = substream(24, 0);
        let p = sample_pilot_matrix(10, 3, &mut rng).unwrap();
        let h = vec![Complex64::new(1.0, 1.0); 3];
        let clean = p.apply(&h).unwrap();
        let (mut acc, mut n) = (0.0, 0usize);
        for _ in 0..1000 {
            let r = synthesize(&p, &h, 0.7, &mut rng).unwrap();
            acc +=
                r.y.iter()
                    .zip(&clean)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>();
            n += r.y.len();
        }
        let var = acc / n as f64;
        assert!((var - 0.7).abs() / 0.7 < 0.03, "var {var}");
    }

    proptest! {
        #[test]
        fn synthesis_is_linear_in_channel(seed in 0u64..1000) {
            let mut rng = substream(25, seed);
            let p = sample_pilot_matrix(7, 5, &mut rng).unwrap();
            let h1: Vec<Complex64> = (0..5).map(|_| complex_gaussian(1.0, &mut rng)).collect();
            let h2: Vec<Complex64> = (0..5).map(|_| complex_gaussian(1.0, &mut rng)).collect();
            let w: Vec<Complex64> = (0..7).map(|_| complex_gaussian(0.3, &mut rng)).collect();
            let zero = vec![Complex64::new(0.0, 0.0); 7];
            let sum: Vec<Complex64> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
            let lhs = synthesize_with_noise(&p, &sum, &w).unwrap();
            let a = synthesize_with_noise(&p, &h1, &w).unwrap();
            let b = synthesize_with_noise(&p, &h2, &zero).unwrap();
            for i in 0..7 {
                prop_assert!((lhs[i] - a[i] - b[i]).norm() < 1e-12);
            }
        }
    }
}
