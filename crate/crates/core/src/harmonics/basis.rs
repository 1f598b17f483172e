use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{sphere_volume, SpherePoint};
use crate::harmonics::gegenbauer::{chebyshev_t, gegenbauer, gegenbauer_all};

/// Ultraspherical order attached to the n-sphere, `lambda_n = (n-1)/2`.
pub fn lambda_n(dim_n: usize) -> f64 {
    (dim_n as f64 - 1.0) / 2.0
}

/// Degree-l eigenspace of the Laplace-Beltrami operator on S^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicSpace {
    pub dim_n: usize,
    pub degree_l: usize,
    pub dimension: usize,
}

impl HarmonicSpace {
    pub fn new(dim_n: usize, degree_l: usize) -> Self {
        Self {
            dim_n,
            degree_l,
            dimension: eigenspace_dim(dim_n, degree_l),
        }
    }
}

/// Exact dimension of the degree-l harmonic eigenspace on S^n:
/// `(2l + n - 1) / (n - 1) * binom(l + n - 2, n - 2)` for n >= 2,
/// and 1, 2, 2, ... on the circle.
pub fn eigenspace_dim(dim_n: usize, l: usize) -> usize {
    if dim_n == 1 {
        return if l == 0 { 1 } else { 2 };
    }
    let n = dim_n as u128;
    let l = l as u128;
    let mut binom: u128 = 1;
    for i in 1..=(n - 2) {
        binom = binom * (l + i) / i;
    }
    let d = (2 * l + n - 1) * binom / (n - 1);
    d as usize
}

/// Total dimension of polynomials of degree at most L on S^n.
pub fn space_dim(dim_n: usize, degree: usize) -> usize {
    (0..=degree).map(|l| eigenspace_dim(dim_n, l)).sum()
}

/// Reproducing kernel of the orthogonal projection onto the degree-l
/// eigenspace, as a function of the inner product `t = xi . eta`:
/// `((l + lambda) / (lambda omega_n)) C_l^lambda(t)` for n >= 2, and the
/// Chebyshev form `1/(2 pi)`, `T_l(t)/pi` on the circle.
pub fn projection_kernel(dim_n: usize, l: usize, t: f64) -> f64 {
    if dim_n == 1 {
        return if l == 0 {
            1.0 / (2.0 * PI)
        } else {
            chebyshev_t(l, t) / PI
        };
    }
    let lam = lambda_n(dim_n);
    (l as f64 + lam) / (lam * sphere_volume(dim_n)) * gegenbauer(lam, l, t)
}

/// All projection-kernel values for `l = 0..=l_max` in one sweep.
pub fn projection_kernel_all(dim_n: usize, l_max: usize, t: f64) -> Vec<f64> {
    if dim_n == 1 {
        let mut out = gegenbauer_all(0.0, l_max, t);
        out[0] = 1.0 / (2.0 * PI);
        for v in out.iter_mut().skip(1) {
            *v /= PI;
        }
        return out;
    }
    let lam = lambda_n(dim_n);
    let omega = sphere_volume(dim_n);
    let mut out = gegenbauer_all(lam, l_max, t);
    for (l, v) in out.iter_mut().enumerate() {
        *v *= (l as f64 + lam) / (lam * omega);
    }
    out
}

/// Fully normalized associated Legendre values S_l^mu(x) for all
/// 0 <= mu <= l <= l_max, where S includes the factor
/// sqrt((2l+1)/(4 pi) * (l-mu)!/(l+mu)!) and the Condon-Shortley sign.
/// Returned flattened as table[mu] = values for l = mu..=l_max.
fn normalized_assoc_legendre(l_max: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(l_max + 1);
    let mut diag = (1.0 / (4.0 * PI)).sqrt();
    for mu in 0..=l_max {
        if mu > 0 {
            let m = mu as f64;
            diag *= -s * ((2.0 * m + 1.0) / (2.0 * m)).sqrt();
        }
        let mut col = Vec::with_capacity(l_max + 1 - mu);
        col.push(diag);
        if mu < l_max {
            let m = mu as f64;
            col.push(x * (2.0 * m + 3.0).sqrt() * diag);
            for l in mu + 2..=l_max {
                let lf = l as f64;
                let m2 = m * m;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
                let b = (((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - m2))
                    / ((2.0 * lf - 3.0) * (lf * lf - m2)))
                    .sqrt();
                let next = a * x * col[l - mu - 1] - b * col[l - mu - 2];
                col.push(next);
            }
        }
        table.push(col);
    }
    table
}

fn check_pointwise_dim(dim_n: usize, what: &'static str) -> Result<()> {
    if dim_n == 1 || dim_n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension {
            n: dim_n,
            what,
            supported: "n in {1, 2}",
        })
    }
}

/// Value of the m-th real orthonormal harmonic of degree l at a point,
/// `1 <= m <= d_l^n`.
///
/// The basis is real in both supported dimensions (so complex conjugation
/// in the addition formula is the identity): on the circle the Fourier
/// basis `1/sqrt(2 pi)`, `cos(l theta)/sqrt(pi)`, `sin(l theta)/sqrt(pi)`;
/// on S^2 fully normalized real spherical harmonics, indexed within degree
/// l by `m - l - 1 = -l..l` (sine components first, then zonal, then
/// cosine components).
pub fn eval_harmonic(dim_n: usize, l: usize, m: usize, p: &SpherePoint) -> Result<f64> {
    check_pointwise_dim(dim_n, "pointwise harmonic basis")?;
    let d = eigenspace_dim(dim_n, l);
    if m < 1 || m > d {
        return Err(Error::invalid(format!(
            "harmonic index m = {m} outside 1..={d} for degree {l} on S^{dim_n}"
        )));
    }
    if dim_n == 1 {
        let theta = p.angle();
        return Ok(if l == 0 {
            1.0 / (2.0 * PI).sqrt()
        } else if m == 1 {
            (l as f64 * theta).cos() / PI.sqrt()
        } else {
            (l as f64 * theta).sin() / PI.sqrt()
        });
    }
    let x = p.coords()[2].clamp(-1.0, 1.0);
    let phi = p.coords()[1].atan2(p.coords()[0]);
    let table = normalized_assoc_legendre(l, x);
    let mu = m as isize - l as isize - 1;
    let mu_abs = mu.unsigned_abs();
    let base = table[mu_abs][l - mu_abs];
    Ok(if mu == 0 {
        base
    } else if mu > 0 {
        std::f64::consts::SQRT_2 * base * (mu as f64 * phi).cos()
    } else {
        std::f64::consts::SQRT_2 * base * (mu_abs as f64 * phi).sin()
    })
}

/// All harmonic basis values up to degree `l_max` at one point, flattened
/// in (l, m) order compatible with [`crate::harmonics::PolynomialOnSphere`].
/// Costs O(l_max^2), the size of the output.
pub fn harmonic_row(dim_n: usize, l_max: usize, p: &SpherePoint) -> Result<Vec<f64>> {
    check_pointwise_dim(dim_n, "pointwise harmonic basis")?;
    let mut out = Vec::with_capacity(space_dim(dim_n, l_max));
    if dim_n == 1 {
        let theta = p.angle();
        out.push(1.0 / (2.0 * PI).sqrt());
        let inv = 1.0 / PI.sqrt();
        for l in 1..=l_max {
            let (s, c) = (l as f64 * theta).sin_cos();
            out.push(c * inv);
            out.push(s * inv);
        }
        return Ok(out);
    }
    let x = p.coords()[2].clamp(-1.0, 1.0);
    let phi = p.coords()[1].atan2(p.coords()[0]);
    let table = normalized_assoc_legendre(l_max, x);
    let trig: Vec<(f64, f64)> = (0..=l_max).map(|mu| (mu as f64 * phi).sin_cos()).collect();
    for l in 0..=l_max {
        for m in 1..=2 * l + 1 {
            let mu = m as isize - l as isize - 1;
            let mu_abs = mu.unsigned_abs();
            let base = table[mu_abs][l - mu_abs];
            out.push(if mu == 0 {
                base
            } else if mu > 0 {
                std::f64::consts::SQRT_2 * base * trig[mu_abs].1
            } else {
                std::f64::consts::SQRT_2 * base * trig[mu_abs].0
            });
        }
    }
    Ok(out)
}
