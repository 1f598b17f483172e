use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;

/// A point on the unit n-sphere embedded in R^{n+1}, stored as its
/// Cartesian coordinates.
///
/// Constructors renormalize, so downstream code may assume `|x| = 1` up to
/// rounding. The ambient dimension is `coords.len() = n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Builds a point from ambient coordinates, normalizing to unit length.
    ///
    /// Rejects vectors shorter than `1e-12` (no well-defined direction) and
    /// ambient dimensions below 2.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "a sphere point needs at least 2 ambient coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("sphere point coordinates must be finite"));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::invalid(
                "cannot normalize a near-zero vector onto the sphere",
            ));
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(Self { coords })
    }

    /// Point on the circle S^1 at polar angle `theta`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            coords: vec![theta.cos(), theta.sin()],
        }
    }

    /// Point on S^2 at colatitude `theta` in `[0, pi]` and longitude `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = (theta.sin(), theta.cos());
        Self {
            coords: vec![st * phi.cos(), st * phi.sin(), ct],
        }
    }

    /// The point `(0, ..., 0, 1)` on the n-sphere.
    pub fn north_pole(dim_n: usize) -> Self {
        let mut coords = vec![0.0; dim_n + 1];
        coords[dim_n] = 1.0;
        Self { coords }
    }

    /// Sphere dimension n (one less than the ambient dimension).
    pub fn dim_n(&self) -> usize {
        self.coords.len() - 1
    }

    /// Ambient Cartesian coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean inner product with another point of the same dimension.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Polar angle in `(-pi, pi]`; only meaningful on S^1.
    pub fn angle(&self) -> f64 {
        debug_assert_eq!(self.coords.len(), 2);
        self.coords[1].atan2(self.coords[0])
    }

    pub(crate) fn from_unit_coords(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Geodesic (great-circle) distance `arccos(x . y)` with the inner product
/// clamped to `[-1, 1]` so that rounding never produces NaN.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    x.dot(y).clamp(-1.0, 1.0).acos()
}

/// Surface measure of the unit n-sphere, `2 pi^{(n+1)/2} / Gamma((n+1)/2)`,
/// exact (single rounding) for the dimensions used pointwise.
pub fn sphere_volume(dim_n: usize) -> f64 {
    use std::f64::consts::PI;
    match dim_n {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        3 => 2.0 * PI * PI,
        _ => {
            let half = (dim_n as f64 + 1.0) / 2.0;
            2.0 * PI.powf(half) / ln_gamma(half).exp()
        }
    }
}
