//! Projection-coefficient extraction rule shared by the quadrature-based
//! kernel constructors.
//!
//! With the expansion `phi(t) = sum_l phi_hat(l) P_l(t)` the coefficients
//! recover as
//!
//!   phi_hat(l) = R_n(l) * int_{-1}^{1} phi(x) C_l^{lambda}(x) (1-x^2)^{lambda - 1/2} dx,
//!   R_n(l) = lambda omega_n Gamma(lambda)^2 l! 2^{2 lambda - 1} / (pi Gamma(l + 2 lambda)),
//!
//! for n >= 2, and on the circle as twice the cosine transform,
//! `phi_hat(l) = 2 int phi(x) T_l(x) (1-x^2)^{-1/2} dx`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::sphere_volume;
use crate::harmonics::{gegenbauer, lambda_n};
use crate::numerics::{gauss_jacobi, ln_gamma};

/// Normalization constant of the coefficient rule, in log space to survive
/// large degrees.
pub(crate) fn rule_constant(dim_n: usize, l: usize) -> f64 {
    if dim_n == 1 {
        return 2.0;
    }
    let lam = lambda_n(dim_n);
    let lf = l as f64;
    ((lam * sphere_volume(dim_n)).ln() + 2.0 * ln_gamma(lam) + ln_gamma(lf + 1.0)
        + (2.0 * lam - 1.0) * std::f64::consts::LN_2
        - PI.ln()
        - ln_gamma(lf + 2.0 * lam))
    .exp()
}

/// Single coefficient of a kernel section by Gauss-Jacobi quadrature.
///
/// The rule's weight is `(1-x)^{lambda-1/2+extra_alpha} (1+x)^{lambda-1/2}`,
/// so an integrable endpoint factor `(1-x)^{extra_alpha}` of the kernel can
/// be absorbed exactly; `f` must then be the kernel with that factor removed.
pub(crate) fn coeff_by_quadrature(
    dim_n: usize,
    l: usize,
    m: usize,
    extra_alpha: f64,
    f: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let lam = lambda_n(dim_n);
    let rule = gauss_jacobi(m, lam - 0.5 + extra_alpha, lam - 0.5)?;
    let integral = rule.integrate(|x| f(x) * gegenbauer(lam, l, x));
    Ok(rule_constant(dim_n, l) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_constant_sphere_is_two_pi() {
        for l in [0usize, 1, 5, 40, 400] {
            assert!((rule_constant(2, l) - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn rule_recovers_projection_kernel_coefficients() {
        // phi = P_3 has phi_hat(3) = 1 and zero elsewhere; quadrature of the
        // polynomial closed form must reproduce that for n = 2 and n = 3.
        for n in [2usize, 3] {
            let f = move |x: f64| crate::harmonics::projection_kernel(n, 3, x);
            for l in 0..=5 {
                let c = coeff_by_quadrature(n, l, 32, 0.0, &f).unwrap();
                let expect = if l == 3 { 1.0 } else { 0.0 };
                assert!((c - expect).abs() < 1e-12, "n={n} l={l} c={c}");
            }
        }
    }

    #[test]
    fn circle_rule_recovers_cosine_coefficients() {
        // phi(theta) = 3/(2 pi) + 5 cos(2 theta)/pi has phi_hat = [3, 0, 5].
        let f = |x: f64| {
            let theta = x.acos();
            3.0 / (2.0 * PI) + 5.0 * (2.0 * theta).cos() / PI
        };
        for (l, expect) in [(0usize, 3.0), (1, 0.0), (2, 5.0), (3, 0.0)] {
            let c = coeff_by_quadrature(1, l, 64, 0.0, &f).unwrap();
            assert!((c - expect).abs() < 1e-11, "l={l} c={c}");
        }
    }
}
