use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::lambda_n;
use crate::kernels::rule::coeff_by_quadrature;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};
use crate::numerics::{hyp2f1, ln_gamma};

const L_MAX_EXPONENTIAL: usize = 256;

/// Hardy multiquadric `t -> -sqrt(delta^2 + 2 (1 - t))`, the restriction of
/// `-sqrt(delta^2 + |x - y|^2)`.
///
/// Expansion coefficients for l >= 1:
///
///   phi_hat(l) = pi^{lambda_n + 1/2} Gamma(l - 1/2)
///                / ((delta^2 + 2)^{l - 1/2} Gamma(l + lambda_n + 1))
///                * 2F1((l - 1/2)/2, (l + 1/2)/2; l + lambda_n + 1; 4/(delta^2+2)^2),
///
/// all positive; the hypergeometric argument is below 1 for every delta > 0.
/// The kernel is conditionally positive definite of order 1: the true
/// (negative) l = 0 coefficient is computed by quadrature and kept in
/// `low_coeffs`, while the stored value continues the positive tail
/// geometrically as `phi_hat(1)^2 / phi_hat(2)`.
pub fn make_multiquadric(dim_n: usize, delta: f64) -> Result<ZonalKernel> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!(
            "multiquadric kernel needs delta > 0, got {delta}"
        )));
    }
    if dim_n == 0 {
        return Err(Error::invalid("multiquadric kernel needs dimension n >= 1"));
    }
    let lam = lambda_n(dim_n);
    let base = delta * delta + 2.0;
    let z = 4.0 / (base * base);
    let mut coeffs = vec![0.0f64; 1];
    for l in 1..=L_MAX_EXPONENTIAL {
        let lf = l as f64;
        let ln_mag = (lam + 0.5) * PI.ln() + ln_gamma(lf - 0.5)
            - (lf - 0.5) * base.ln()
            - ln_gamma(lf + lam + 1.0);
        // The series cannot fail its ratio test for z < 1; surface the error
        // anyway rather than asserting.
        let f = hyp2f1((lf - 0.5) / 2.0, (lf + 0.5) / 2.0, lf + lam + 1.0, z)?;
        let c = (ln_mag + f.ln()).exp();
        if !(c > 0.0) || !c.is_finite() {
            break;
        }
        coeffs.push(c);
    }
    if coeffs.len() < 4 {
        return Err(Error::invalid(format!(
            "multiquadric coefficients underflow immediately at delta = {delta}"
        )));
    }
    coeffs[0] = coeffs[1] * coeffs[1] / coeffs[2];
    let true0 = coeff_by_quadrature(dim_n, 0, 220, 0.0, &move |x: f64| {
        -(delta * delta + 2.0 * (1.0 - x)).sqrt()
    })?;

    // Data-driven geometric tail envelope: the coefficient ratio increases
    // toward its limit below 1/(delta^2+2) * sup 2F1-ratio, so the largest
    // late ratio with a small margin dominates everything beyond the stored
    // range.
    let top = coeffs.len() - 1;
    let ratio = (top.saturating_sub(48)..top)
        .map(|l| coeffs[l + 1] / coeffs[l])
        .fold(0.0f64, f64::max)
        * 1.02;

    let closed = move |t: f64| -(delta * delta + 2.0 * (1.0 - t)).sqrt();
    ZonalKernel::build(
        dim_n,
        FamilyTag::Multiquadric,
        coeffs,
        1,
        vec![true0],
        Some(Arc::new(closed)),
        TailInfo::Geometric { ratio, poly_power: 0.0 },
    )
}
