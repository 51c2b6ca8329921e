//! Fading models, RRH-to-UE channel synthesis and support selection.
//!
//! A channel gain is `h = c * d^(-alpha/2)` where `d` is the RRH-to-UE
//! distance and `c` is a zero-mean fading coefficient.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::Deployment;

/// Distribution of the fading coefficient `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FadingModel {
    /// Circularly-symmetric complex Gaussian, unit variance.
    RayleighUnit,
    /// `10 log10 |c|^2` is Gaussian with standard deviation `sigma_db`,
    /// normalized so that `E|c|^2 = 1`; uniform phase.
    Lognormal { sigma_db: f64 },
    /// `|c| = 1` with uniform phase.
    DeterministicUnit,
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingModel::Lognormal { sigma_db } if !(sigma_db >= 0.0 && sigma_db.is_finite()) => {
                Err(Error::invalid(format!(
                    "lognormal sigma_db must be >= 0, got {sigma_db}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Standard deviation of `ln |c|^2`.
    fn log_power_std(sigma_db: f64) -> f64 {
        sigma_db * LN_10 / 10.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            FadingModel::RayleighUnit => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            FadingModel::Lognormal { sigma_db } => {
                let s = Self::log_power_std(sigma_db);
                let z: f64 = StandardNormal.sample(rng);
                let power = (s * z - 0.5 * s * s).exp();
                let phase = rng.random_range(0.0..2.0 * PI);
                Complex64::from_polar(power.sqrt(), phase)
            }
            FadingModel::DeterministicUnit => {
                Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
            }
        }
    }
}

/// `E|c|^(4/alpha)` for the given fading model.
pub fn fading_moment(model: FadingModel, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    model.validate()?;
    let q = 2.0 / alpha;
    Ok(match model {
        // |c|^2 ~ Exp(1): E (|c|^2)^q = Gamma(1 + q).
        FadingModel::RayleighUnit => gamma(1.0 + q),
        FadingModel::Lognormal { sigma_db } => {
            let s = FadingModel::log_power_std(sigma_db);
            // ln|c|^2 ~ N(-s^2/2, s^2)
            (q * (-0.5 * s * s) + 0.5 * q * q * s * s).exp()
        }
        FadingModel::DeterministicUnit => 1.0,
    })
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "path-loss exponent alpha must be > 2, got {alpha}"
        )))
    }
}

/// Channel gains plus the split into the `s` strongest entries and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub gains: Vec<Complex64>,
    /// Ascending indices of the strongest entries; empty until selected.
    pub support: Vec<usize>,
    /// Ascending indices not in `support`.
    pub complement: Vec<usize>,
}

impl ChannelVector {
    /// Wraps gains with no support selected yet.
    pub fn new(gains: Vec<Complex64>) -> Self {
        let complement = (0..gains.len()).collect();
        ChannelVector {
            gains,
            support: Vec::new(),
            complement,
        }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn set_support(&mut self, s: usize) -> Result<()> {
        let (support, complement) = select_support(&self.gains, s)?;
        self.support = support;
        self.complement = complement;
        Ok(())
    }

    pub fn support_gains(&self) -> Vec<Complex64> {
        self.support.iter().map(|&i| self.gains[i]).collect()
    }

    pub fn residual_norm_sq(&self) -> f64 {
        residual_norm_sq(&self.gains, &self.complement)
    }
}

/// Draws `h_i = c_i * dist_i^(-alpha/2)` for every RRH.
///
/// A zero distance is rejected with [`Error::SingularGeometry`].
pub fn draw_channels<R: Rng + ?Sized>(
    d: &Deployment,
    model: FadingModel,
    alpha: f64,
    rng: &mut R,
) -> Result<ChannelVector> {
    draw_channels_with_exclusion(d, model, alpha, 0.0, rng)
}

/// Like [`draw_channels`], but distances below `exclusion_radius` are
/// clamped up to it. With a zero radius only exact zero distances fail.
pub fn draw_channels_with_exclusion<R: Rng + ?Sized>(
    d: &Deployment,
    model: FadingModel,
    alpha: f64,
    exclusion_radius: f64,
    rng: &mut R,
) -> Result<ChannelVector> {
    check_alpha(alpha)?;
    model.validate()?;
    if !(exclusion_radius >= 0.0 && exclusion_radius.is_finite()) {
        return Err(Error::invalid(format!(
            "exclusion_radius must be >= 0, got {exclusion_radius}"
        )));
    }
    let half_exp = -alpha / 2.0;
    let gains = d
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let distance = p.distance(&d.ue).max(exclusion_radius);
            if distance == 0.0 {
                return Err(Error::SingularGeometry { index, distance });
            }
            Ok(model.sample(rng) * distance.powf(half_exp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector::new(gains))
}

/// Indices of the `s` largest-modulus gains and of the rest, both ascending.
/// Ties go to the lower index.
pub fn select_support(gains: &[Complex64], s: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if s == 0 || s > gains.len() {
        return Err(Error::invalid(format!(
            "support size s must be in 1..={}, got {s}",
            gains.len()
        )));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    // Total order: stronger first, lower index on ties.
    order.select_nth_unstable_by(s - 1, |&a, &b| {
        gains[b]
            .norm_sqr()
            .total_cmp(&gains[a].norm_sqr())
            .then(a.cmp(&b))
    });
    let mut in_support = vec![false; gains.len()];
    for &i in &order[..s] {
        in_support[i] = true;
    }
    let (support, complement): (Vec<usize>, Vec<usize>) =
        (0..gains.len()).partition(|&i| in_support[i]);
    Ok((support, complement))
}

/// Sum of squared moduli over `complement`.
pub fn residual_norm_sq(gains: &[Complex64], complement: &[usize]) -> f64 {
    complement.iter().map(|&i| gains[i].norm_sqr()).sum()
}
