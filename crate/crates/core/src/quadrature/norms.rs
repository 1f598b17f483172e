use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::numerics::{gauss_legendre, kahan_sum};

/// L^p(S^n) norm of a pointwise function over a product quadrature grid.
///
/// The grid is sized from `band_hint`: for a band-limited f of degree at
/// most `band_hint` and p in {1, 2} the result is exact up to roundoff
/// (Gauss-Legendre in the polar variable times trapezoid in the azimuth on
/// S^2, periodic trapezoid on the circle). For other functions the result
/// converges as the hint grows; callers can difference two hints to check.
/// p = infinity takes the grid max and refines the grid once, keeping the
/// larger of the two sweeps.
pub fn lp_norm_on_grid(
    f: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    dim_n: usize,
    p: f64,
    band_hint: usize,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!(
            "norm exponent p = {p} must be at least 1 or infinity"
        )));
    }
    match dim_n {
        1 => Ok(circle_norm(f, p, band_hint)),
        2 => Ok(sphere_norm(f, p, band_hint)),
        n => Err(Error::UnsupportedDimension {
            n,
            what: "grid norms",
            supported: "n in {1, 2}",
        }),
    }
}

fn circle_values(f: &(dyn Fn(&SpherePoint) -> f64 + Sync), m: usize) -> Vec<f64> {
    (0..m)
        .into_par_iter()
        .map(|k| f(&SpherePoint::from_angle(2.0 * PI * k as f64 / m as f64)))
        .collect()
}

fn circle_norm(f: &(dyn Fn(&SpherePoint) -> f64 + Sync), p: f64, band_hint: usize) -> f64 {
    let m = (8 * (band_hint + 1)).max(512);
    if p.is_infinite() {
        let coarse = circle_values(f, m);
        let fine = circle_values(f, 2 * m);
        return coarse
            .iter()
            .chain(&fine)
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
    }
    let values = circle_values(f, m);
    let total = kahan_sum(values.iter().map(|v| v.abs().powf(p))) * (2.0 * PI / m as f64);
    total.powf(1.0 / p)
}

fn sphere_sup(f: &(dyn Fn(&SpherePoint) -> f64 + Sync), m_pol: usize, m_az: usize) -> f64 {
    let rule = gauss_legendre(m_pol);
    rule.nodes
        .par_iter()
        .map(|&x| {
            let theta = x.clamp(-1.0, 1.0).acos();
            let mut row = 0.0f64;
            for j in 0..m_az {
                let phi = 2.0 * PI * j as f64 / m_az as f64;
                row = row.max(f(&SpherePoint::from_spherical(theta, phi)).abs());
            }
            row
        })
        .reduce(|| 0.0, f64::max)
}

fn sphere_norm(f: &(dyn Fn(&SpherePoint) -> f64 + Sync), p: f64, band_hint: usize) -> f64 {
    let m_pol = (band_hint + 1).max(48);
    let m_az = (2 * band_hint + 2).max(96);
    if p.is_infinite() {
        return sphere_sup(f, m_pol, m_az).max(sphere_sup(f, 2 * m_pol, 2 * m_az));
    }
    let rule = gauss_legendre(m_pol);
    let rows: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&x| {
            let theta = x.clamp(-1.0, 1.0).acos();
            kahan_sum((0..m_az).map(|j| {
                let phi = 2.0 * PI * j as f64 / m_az as f64;
                f(&SpherePoint::from_spherical(theta, phi)).abs().powf(p)
            }))
        })
        .collect();
    let total = kahan_sum(
        rows.iter()
            .zip(&rule.weights)
            .map(|(row, w)| row * w * (2.0 * PI / m_az as f64)),
    );
    total.powf(1.0 / p)
}
