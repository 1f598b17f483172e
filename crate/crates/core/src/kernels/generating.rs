use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::lambda_n;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};

const L_MAX_EXPONENTIAL: usize = 256;

/// Kernel with geometric coefficients `w^l` (Poisson-type kernel).
///
/// For n >= 2 the stored coefficients are exactly `w^l`; summing the
/// projection expansion gives the closed form
/// `(1 - w^2) / (omega_n (1 - 2 t w + w^2)^{lambda_n + 1})`.
/// On the circle the coefficients are `phi_hat(0) = 1, phi_hat(l) = 2 w^l`,
/// which sums to `(2 P_w(t) - 1) / (2 pi)` with
/// `P_w(t) = (1 - w^2)/(1 - 2 t w + w^2)` the classical Poisson kernel.
pub fn make_generating(dim_n: usize, w: f64) -> Result<ZonalKernel> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::invalid(format!(
            "generating kernel needs w in (0, 1), got {w}"
        )));
    }
    if dim_n == 0 {
        return Err(Error::invalid("generating kernel needs dimension n >= 1"));
    }
    let lam = lambda_n(dim_n);
    let mut coeffs = Vec::with_capacity(L_MAX_EXPONENTIAL + 1);
    for l in 0..=L_MAX_EXPONENTIAL {
        let g = w.powi(l as i32);
        if g == 0.0 {
            break;
        }
        coeffs.push(if dim_n == 1 && l > 0 { 2.0 * g } else { g });
    }
    let (family, closed): (FamilyTag, Arc<dyn Fn(f64) -> f64 + Send + Sync>) = if dim_n == 1 {
        let f = move |t: f64| {
            let p = (1.0 - w * w) / (1.0 - 2.0 * t * w + w * w);
            (2.0 * p - 1.0) / (2.0 * std::f64::consts::PI)
        };
        (FamilyTag::Poisson, Arc::new(f))
    } else {
        let omega = crate::geometry::sphere_volume(dim_n);
        let f = move |t: f64| {
            (1.0 - w * w) / (omega * (1.0 - 2.0 * t * w + w * w).powf(lam + 1.0))
        };
        (FamilyTag::Generating, Arc::new(f))
    };
    ZonalKernel::build(
        dim_n,
        family,
        coeffs,
        0,
        Vec::new(),
        Some(closed),
        TailInfo::Geometric { ratio: w, poly_power: 0.0 },
    )
}
