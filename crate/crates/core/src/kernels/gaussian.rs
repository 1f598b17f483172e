use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::lambda_n;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};
use crate::numerics::bessel_i_ladder;

const L_MAX_EXPONENTIAL: usize = 256;

/// Gaussian kernel `t -> exp(-2 sigma (1 - t))`, the restriction of
/// `exp(-sigma |x - y|^2)` to the sphere.
///
/// Coefficients follow from the Gegenbauer transform of the exponential:
///
///   phi_hat(l) = 2 pi (pi / sigma)^{lambda_n} e^{-2 sigma} I_{lambda_n + l}(2 sigma),
///
/// with the Bessel-I ladder generated by a normalized downward (Miller)
/// recurrence. The stored range is truncated where the ladder underflows;
/// every kept coefficient is strictly positive.
pub fn make_gaussian(dim_n: usize, sigma: f64) -> Result<ZonalKernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!(
            "gaussian kernel needs sigma > 0, got {sigma}"
        )));
    }
    if dim_n == 0 {
        return Err(Error::invalid("gaussian kernel needs dimension n >= 1"));
    }
    let lam = lambda_n(dim_n);
    let scale = 2.0 * PI * (PI / sigma).powf(lam) * (-2.0 * sigma).exp();
    let ladder = bessel_i_ladder(lam, L_MAX_EXPONENTIAL + 1, 2.0 * sigma);
    let mut coeffs: Vec<f64> = Vec::with_capacity(L_MAX_EXPONENTIAL + 1);
    for i in ladder {
        let c = scale * i;
        if c <= 0.0 || !c.is_finite() {
            break;
        }
        coeffs.push(c);
    }
    if coeffs.len() < 2 {
        return Err(Error::invalid(format!(
            "gaussian coefficients underflow immediately at sigma = {sigma}"
        )));
    }
    let nu_top = (coeffs.len() - 1) as f64 + lam;
    let closed = move |t: f64| (-2.0 * sigma * (1.0 - t)).exp();
    ZonalKernel::build(
        dim_n,
        FamilyTag::Gaussian,
        coeffs,
        0,
        Vec::new(),
        Some(Arc::new(closed)),
        // Amos: I_{nu+1}(x)/I_nu(x) < x / (2 (nu + 1)).
        TailInfo::Geometric { ratio: sigma / (nu_top + 1.0), poly_power: 0.0 },
    )
}
