use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::{gegenbauer_all, lambda_n};
use crate::kernels::rule::rule_constant;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};
use crate::numerics::{binomial_f64, gauss_legendre};

const L_MAX_ALGEBRAIC: usize = 1024;

/// Compactly supported Wendland kernel on the n-sphere.
///
/// The radial profile is `psi_{d,k} = I^k [(1 - r)_+^m]` with
/// `m = floor(d/2) + k + 1` and `I(f)(r) = int_r^1 s f(s) ds`, normalized to
/// `psi(0) = 1`; on polynomials the operator acts exactly on coefficients.
/// The zonal kernel is `phi(t) = psi(sqrt(2 (1 - t)) / R)` supported on
/// `t >= t0`, where `R = sqrt(2 (1 - t0))` rescales the Euclidean support
/// radius to the cap edge `t0`.
///
/// No closed coefficient formula exists; coefficients are integrated
/// numerically. Substituting `t = 1 - (1 - t0) u^2` turns the projection
/// rule into
///
///   phi_hat(l) = R_n(l) * 2 (1-t0)^{lambda+1/2}
///                * int_0^1 p(u) u^{2 lambda} (1 + t(u))^{lambda - 1/2} C_l^lambda(t(u)) du,
///
/// a polynomial integrand for n = 2 (exact Gauss-Legendre) and an analytic
/// one otherwise; the circle uses the cosine transform over the support arc.
/// Every construction is recomputed on a finer rule and must agree, else
/// `QuadratureNonConvergence`.
pub fn make_wendland(dim_n: usize, d: usize, k: usize, t0: f64) -> Result<ZonalKernel> {
    if dim_n == 0 {
        return Err(Error::invalid("wendland kernel needs dimension n >= 1"));
    }
    if d < 1 {
        return Err(Error::invalid("wendland kernel needs d >= 1"));
    }
    if !(t0 > -1.0 && t0 < 1.0) {
        return Err(Error::invalid(format!(
            "wendland support edge must satisfy -1 < t0 < 1, got {t0}"
        )));
    }
    let p = wendland_profile(d, k);
    let deg_p = p.len() - 1;

    // A converged rule agrees with a finer one to fp noise; an
    // under-resolved one is off by order-of-value amounts at the degrees it
    // cannot see. Mixed tolerance: relative where the value is resolved,
    // absolute (against the leading coefficient) where it sits in noise.
    let coarse = integrate_coeffs(dim_n, &p, t0, 0)?;
    let fine = integrate_coeffs(dim_n, &p, t0, 48)?;
    let scale = fine[0].abs().max(1e-30);
    let mut worst = 0.0f64;
    for l in 0..coarse.len().min(fine.len()) {
        let diff = (coarse[l] - fine[l]).abs();
        let tol_l = 1e-9 * coarse[l].abs().max(fine[l].abs()) + 1e-12 * scale;
        worst = worst.max(diff / tol_l);
    }
    if worst > 1.0 {
        return Err(Error::QuadratureNonConvergence {
            residual: worst,
            tol: 1.0,
            panels: L_MAX_ALGEBRAIC + deg_p + 16,
        });
    }

    // Keep the strictly positive head; truncate where the coefficients sink
    // into quadrature noise (or genuinely change sign for parameters outside
    // the positive-definite regime).
    let mut coeffs = fine;
    if let Some(pos) = coeffs.iter().position(|&c| !(c > 0.0)) {
        coeffs.truncate(pos);
    }
    if coeffs.len() < 8 {
        return Err(Error::invalid(format!(
            "wendland parameters (d={d}, k={k}, t0={t0}) do not yield a positive coefficient head"
        )));
    }

    let exponent = (2 * k + 1 + dim_n) as f64;
    let lam = lambda_n(dim_n);
    let envelope = coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c * (l as f64 + lam).max(0.5).powf(exponent))
        .fold(0.0f64, f64::max);

    let r_support = (2.0 * (1.0 - t0)).sqrt();
    let prof = p.clone();
    let closed = move |t: f64| {
        if t <= t0 {
            return 0.0;
        }
        let r = ((2.0 * (1.0 - t)).max(0.0)).sqrt() / r_support;
        horner(&prof, r)
    };

    ZonalKernel::build(
        dim_n,
        FamilyTag::Wendland,
        coeffs,
        0,
        Vec::new(),
        Some(Arc::new(closed)),
        TailInfo::Algebraic { exponent, envelope },
    )
}

/// Coefficients (in r) of the normalized Wendland profile `psi_{d,k}`.
pub(crate) fn wendland_profile(d: usize, k: usize) -> Vec<f64> {
    let m = d / 2 + k + 1;
    let mut a: Vec<f64> = (0..=m)
        .map(|j| binomial_f64(m as u64, j as u64) * if j % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    for _ in 0..k {
        let mut b = vec![0.0f64; a.len() + 2];
        let mut c0 = 0.0f64;
        for (j, &aj) in a.iter().enumerate() {
            let t = aj / (j as f64 + 2.0);
            c0 += t;
            b[j + 2] -= t;
        }
        b[0] += c0;
        a = b;
    }
    let p0 = a[0];
    for v in &mut a {
        *v /= p0;
    }
    a
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// All coefficients up to `L_MAX_ALGEBRAIC` in one pass over the quadrature
/// nodes, with compensated per-degree accumulation.
fn integrate_coeffs(dim_n: usize, p: &[f64], t0: f64, extra_nodes: usize) -> Result<Vec<f64>> {
    let lam = lambda_n(dim_n);
    let l_top = L_MAX_ALGEBRAIC;
    let mut sums = vec![0.0f64; l_top + 1];
    let mut comps = vec![0.0f64; l_top + 1];
    let add = |l: usize, y: f64, sums: &mut [f64], comps: &mut [f64]| {
        let y = y - comps[l];
        let t = sums[l] + y;
        comps[l] = (t - sums[l]) - y;
        sums[l] = t;
    };

    if dim_n == 1 {
        // phi_hat(l) = 2 int_0^theta0 p(2 sin(theta/2) / R) cos(l theta) dtheta
        let theta0 = t0.acos();
        let r_support = (2.0 * (1.0 - t0)).sqrt();
        let m = (l_top as f64 * theta0 / 2.0).ceil() as usize + 80 + extra_nodes;
        let rule = gauss_legendre(m).scaled_to(0.0, theta0);
        for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
            let r = 2.0 * (theta / 2.0).sin() / r_support;
            let g = 2.0 * w * horner(p, r);
            // cos(l theta) by the Chebyshev-style two-term recurrence
            let c1 = theta.cos();
            let (mut prev, mut cur) = (1.0f64, c1);
            add(0, g, &mut sums, &mut comps);
            for l in 1..=l_top {
                add(l, g * cur, &mut sums, &mut comps);
                let next = 2.0 * c1 * cur - prev;
                prev = cur;
                cur = next;
            }
        }
        return Ok(sums);
    }

    let deg_p = p.len() - 1;
    let m = l_top + deg_p / 2 + 16 + extra_nodes;
    let rule = gauss_legendre(m).scaled_to(0.0, 1.0);
    let front = 2.0 * (1.0 - t0).powf(lam + 0.5);
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = 1.0 - (1.0 - t0) * u * u;
        let g = front
            * w
            * horner(p, u)
            * u.powf(2.0 * lam)
            * (1.0 + t).powf(lam - 0.5);
        let basis = gegenbauer_all(lam, l_top, t);
        for l in 0..=l_top {
            add(l, g * basis[l], &mut sums, &mut comps);
        }
    }
    for (l, v) in sums.iter_mut().enumerate() {
        *v *= rule_constant(dim_n, l);
    }
    Ok(sums)
}
