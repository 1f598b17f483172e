use crate::error::{Error, Result};
use crate::harmonics::PolynomialOnSphere;
use crate::kernels::ZonalKernel;
use crate::network::SbfNetwork;
use crate::quadrature::QuadratureRule;

/// Spherical convolution `phi * S`: each degree slice is scaled by the
/// kernel's true expansion coefficient.
pub fn convolve_poly(kernel: &ZonalKernel, s: &PolynomialOnSphere) -> Result<PolynomialOnSphere> {
    check_degree(kernel, s)?;
    let mut out = s.clone();
    for l in 0..=s.degree {
        let c = kernel.true_coeff(l);
        scale_degree(&mut out, s, l, c);
    }
    Ok(out)
}

/// Formal convolution inverse `phi^{-1} * S`: degree slices divided by the
/// kernel coefficients. A vanishing coefficient only matters where S
/// actually has mass at that degree.
pub fn inv_convolve_poly(
    kernel: &ZonalKernel,
    s: &PolynomialOnSphere,
) -> Result<PolynomialOnSphere> {
    check_degree(kernel, s)?;
    let mut out = s.clone();
    for l in 0..=s.degree {
        let c = kernel.true_coeff(l);
        if c == 0.0 {
            if s.degree_slice(l).iter().any(|v| *v != 0.0) {
                return Err(Error::ZeroCoefficient { ell: l });
            }
            continue;
        }
        scale_degree(&mut out, s, l, 1.0 / c);
    }
    Ok(out)
}

fn check_degree(kernel: &ZonalKernel, s: &PolynomialOnSphere) -> Result<()> {
    if kernel.dim_n != s.dim_n {
        return Err(Error::invalid(format!(
            "kernel on S^{} but polynomial on S^{}",
            kernel.dim_n, s.dim_n
        )));
    }
    if s.degree > kernel.l_max() {
        return Err(Error::invalid(format!(
            "polynomial degree {} beyond the kernel's stored coefficient run {}",
            s.degree,
            kernel.l_max()
        )));
    }
    Ok(())
}

fn scale_degree(out: &mut PolynomialOnSphere, src: &PolynomialOnSphere, l: usize, factor: f64) {
    for (m, v) in src.degree_slice(l).iter().enumerate() {
        out.set(l, m + 1, v * factor);
    }
}

/// Discretizes `phi^{-1} * S` through a positive quadrature rule: the
/// network `sum_xi w_xi (phi^{-1} * S)(xi) phi(x . xi)` approximates S when
/// the rule is exact well past the degree of S.
///
/// Degree bookkeeping: with e the smallest exponent such that
/// `deg S <= 2^{e-1}`, the rule must certify exactness on polynomials of
/// degree `2^{e+2}`. A weaker rule is reported as a degree overflow carrying
/// the certified and required degrees.
pub fn quasi_interpolate(
    kernel: &ZonalKernel,
    rule: &QuadratureRule,
    s: &PolynomialOnSphere,
) -> Result<SbfNetwork> {
    if rule.centers.dim_n != kernel.dim_n {
        return Err(Error::invalid(format!(
            "rule on S^{} but kernel on S^{}",
            rule.centers.dim_n, kernel.dim_n
        )));
    }
    let need = required_degree(s.degree);
    if rule.degree_l < need {
        return Err(Error::DegreeOverflow {
            have: rule.degree_l,
            need,
        });
    }
    let t = inv_convolve_poly(kernel, s)?;
    let values = t.eval_many(&rule.centers.points)?;
    let coeffs_a: Vec<f64> = rule
        .weights
        .iter()
        .zip(&values)
        .map(|(w, v)| w * v)
        .collect();
    SbfNetwork::new(kernel.clone(), rule.centers.clone(), coeffs_a)
}

fn required_degree(poly_degree: usize) -> usize {
    let mut e = 1usize;
    while (1usize << (e - 1)) < poly_degree.max(1) {
        e += 1;
    }
    1 << (e + 2)
}
