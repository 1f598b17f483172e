use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::harmonics::basis::{eigenspace_dim, harmonic_row, lambda_n, space_dim};
use crate::numerics::kahan_dot;

/// Band-limited polynomial on S^n in the real orthonormal harmonic basis,
/// coefficients flattened in (l, m) order for l <= degree.
///
/// All coefficients are real; the basis itself is real, so real-valuedness
/// of the represented function is automatic.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialOnSphere {
    pub dim_n: usize,
    pub degree: usize,
    coeffs: Vec<f64>,
    offsets: Vec<usize>,
}

impl PolynomialOnSphere {
    pub fn zero(dim_n: usize, degree: usize) -> Self {
        let offsets = Self::build_offsets(dim_n, degree);
        let len = space_dim(dim_n, degree);
        Self {
            dim_n,
            degree,
            coeffs: vec![0.0; len],
            offsets,
        }
    }

    /// Wraps a flat coefficient vector; its length must equal the dimension
    /// of the degree-`degree` polynomial space.
    pub fn from_coeffs(dim_n: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expect = space_dim(dim_n, degree);
        if coeffs.len() != expect {
            return Err(Error::invalid(format!(
                "coefficient vector has length {}, expected {} for degree {} on S^{}",
                coeffs.len(),
                expect,
                degree,
                dim_n
            )));
        }
        let offsets = Self::build_offsets(dim_n, degree);
        Ok(Self {
            dim_n,
            degree,
            coeffs,
            offsets,
        })
    }

    fn build_offsets(dim_n: usize, degree: usize) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(degree + 2);
        let mut acc = 0;
        for l in 0..=degree {
            offsets.push(acc);
            acc += eigenspace_dim(dim_n, l);
        }
        offsets.push(acc);
        offsets
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the (l, m) basis function, `1 <= m <= d_l^n`.
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.coeffs[self.offsets[l] + m - 1]
    }

    pub fn set(&mut self, l: usize, m: usize, value: f64) {
        self.coeffs[self.offsets[l] + m - 1] = value;
    }

    /// Slice of all coefficients of degree l.
    pub fn degree_slice(&self, l: usize) -> &[f64] {
        &self.coeffs[self.offsets[l]..self.offsets[l + 1]]
    }

    pub fn eval(&self, p: &SpherePoint) -> Result<f64> {
        let row = harmonic_row(self.dim_n, self.degree, p)?;
        Ok(kahan_dot(&row, &self.coeffs))
    }

    pub fn eval_many(&self, points: &[SpherePoint]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.eval(p)).collect()
    }

    /// L^2(S^n) norm, exact by Parseval in the orthonormal basis.
    pub fn l2_norm(&self) -> f64 {
        kahan_dot(&self.coeffs, &self.coeffs).sqrt()
    }
}

/// Applies the spectral multiplier `(l + lambda_n)^gamma` degree by degree
/// (a pseudo-differential operator; gamma = 2 relates to the shifted
/// Laplace-Beltrami operator through lambda^2 - (l+lambda)^2 = -l(l+n-1)).
///
/// On the circle `lambda_1 = 0`, so the constant mode is annihilated for
/// gamma > 0; applying a negative power to a polynomial with a nonzero
/// constant part is reported as a divergent request.
#[allow(non_snake_case)]
pub fn apply_L_gamma(poly: &PolynomialOnSphere, gamma: f64) -> Result<PolynomialOnSphere> {
    let lam = lambda_n(poly.dim_n);
    let mut out = poly.clone();
    for l in 0..=poly.degree {
        let base = l as f64 + lam;
        let factor = if base == 0.0 && gamma == 0.0 {
            1.0
        } else {
            base.powf(gamma)
        };
        let range = out.offsets[l]..out.offsets[l + 1];
        if !factor.is_finite() {
            for k in range {
                if out.coeffs[k] != 0.0 {
                    return Err(Error::DivergentSeries {
                        context: format!(
                            "multiplier (l + lambda)^gamma is infinite at l = {l} (lambda = {lam}, gamma = {gamma}) with a nonzero coefficient"
                        ),
                    });
                }
            }
            continue;
        }
        for k in range {
            out.coeffs[k] *= factor;
        }
    }
    Ok(out)
}
