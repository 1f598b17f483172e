use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{equispaced_circle, fibonacci_sphere, sphere_volume, SpherePoint};
use crate::harmonics::PolynomialOnSphere;
use crate::numerics::kahan_sum;

/// L^p(S^n) norm of a zonal function given by its profile `t -> K(t)`,
/// by composite Simpson in the polar angle (sup over the same grid for
/// p = infinity). `band_hint` sets the grid resolution: at least 16
/// panels per active degree.
pub fn zonal_lp_norm(
    dim_n: usize,
    p: f64,
    band_hint: usize,
    eval: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<f64> {
    if dim_n < 1 {
        return Err(Error::invalid("zonal norms need dimension n >= 1"));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("norm exponent p = {p} below 1")));
    }
    let m = 4096usize.max(16 * band_hint.max(1));
    let m = m + m % 2;
    let h = PI / m as f64;
    let values: Vec<f64> = (0..=m)
        .into_par_iter()
        .map(|i| eval((i as f64 * h).cos()).abs())
        .collect();
    if p.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    let nm1 = dim_n as i32 - 1;
    let terms: Vec<f64> = (0..=m)
        .map(|i| {
            let theta = i as f64 * h;
            let simpson = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            simpson * values[i].powf(p) * theta.sin().powi(nm1)
        })
        .collect();
    let integral = kahan_sum(terms) * h / 3.0;
    Ok((sphere_volume(dim_n - 1) * integral).powf(1.0 / p))
}

/// Sup norm of a band-limited polynomial estimated on a deterministic grid:
/// equispaced angles on the circle, a Fibonacci grid on S^2.
pub fn poly_sup_norm(poly: &PolynomialOnSphere, grid: usize) -> Result<f64> {
    let points: Vec<SpherePoint> = match poly.dim_n {
        1 => equispaced_circle(grid.max(64)),
        2 => fibonacci_sphere(grid.max(64)),
        n => {
            return Err(Error::UnsupportedDimension {
                n,
                what: "polynomial sup-norm grid",
                supported: "n in {1, 2}",
            })
        }
    };
    let values = poly.eval_many(&points)?;
    Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}
