//! RRH deployments and UE placement in the plane.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    half_width: f64,
    half_height: f64,
}

impl Window {
    pub fn new(half_width: f64, half_height: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(format!(
                "half_width must be > 0, got {half_width}"
            )));
        }
        if !(half_height > 0.0 && half_height.is_finite()) {
            return Err(Error::invalid(format!(
                "half_height must be > 0, got {half_height}"
            )));
        }
        Ok(Window {
            half_width,
            half_height,
        })
    }

    /// Square window with the given side length.
    pub fn square(side: f64) -> Result<Self> {
        Window::new(side / 2.0, side / 2.0)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_height
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x.abs() <= self.half_width && p.y.abs() <= self.half_height
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point {
            x: rng.random_range(-self.half_width..self.half_width),
            y: rng.random_range(-self.half_height..self.half_height),
        }
    }
}

/// RRH positions, the UE position, and the window they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub points: Vec<Point>,
    pub ue: Point,
    pub density: f64,
    pub window: Window,
}

impl Deployment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Moves the UE; it must stay inside the window.
    pub fn with_ue(mut self, ue: Point) -> Result<Self> {
        if !self.window.contains(&ue) {
            return Err(Error::invalid(format!(
                "UE position ({}, {}) lies outside the deployment window",
                ue.x, ue.y
            )));
        }
        self.ue = ue;
        Ok(self)
    }

    pub fn distances(&self) -> Vec<f64> {
        distances(self)
    }
}

/// Exactly `n_rrh` RRHs i.i.d. uniform over a square of area `n_rrh / density`,
/// with the UE at the center.
pub fn sample_uniform_deployment<R: Rng + ?Sized>(
    n_rrh: usize,
    density: f64,
    rng: &mut R,
) -> Result<Deployment> {
    if n_rrh == 0 {
        return Err(Error::invalid("n_rrh must be >= 1"));
    }
    check_density(density)?;
    let window = Window::square((n_rrh as f64 / density).sqrt())?;
    let points = (0..n_rrh).map(|_| window.sample_point(rng)).collect();
    Ok(Deployment {
        points,
        ue: Point::ORIGIN,
        density,
        window,
    })
}

/// Homogeneous Poisson point process of intensity `density` restricted to
/// `window`, with the UE at the center.
pub fn sample_hppp<R: Rng + ?Sized>(
    window: Window,
    density: f64,
    rng: &mut R,
) -> Result<Deployment> {
    check_density(density)?;
    let mean = density * window.area();
    let count = if mean > 0.0 {
        let poisson =
            Poisson::new(mean).map_err(|e| Error::invalid(format!("poisson mean {mean}: {e}")))?;
        poisson.sample(rng) as usize
    } else {
        0
    };
    let points = (0..count).map(|_| window.sample_point(rng)).collect();
    Ok(Deployment {
        points,
        ue: Point::ORIGIN,
        density,
        window,
    })
}

/// Euclidean distances from the UE to every RRH, in point order.
pub fn distances(d: &Deployment) -> Vec<f64> {
    d.points.iter().map(|p| p.distance(&d.ue)).collect()
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "density must be > 0, got {density}"
        )))
    }
}
