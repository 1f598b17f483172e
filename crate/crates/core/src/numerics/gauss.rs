//! Gauss–Legendre and Gauss–Jacobi rules on [−1, 1] by Golub–Welsch.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;

/// Nodes and weights of a Gauss rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// ∫ f(x) w(x) dx approximated by the rule (exact for polynomials up to
    /// degree 2m−1 against the rule's weight function).
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        crate::numerics::kahan_sum(
            self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)),
        )
    }

    /// Affine image of the rule on [a, b] (weight function transported along).
    pub fn scaled_to(&self, a: f64, b: f64) -> GaussRule {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        GaussRule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }
}

/// m-point Gauss–Legendre rule (weight 1).
pub fn gauss_legendre(m: usize) -> GaussRule {
    gauss_jacobi(m, 0.0, 0.0).expect("legendre recurrence is always valid")
}

/// m-point Gauss–Jacobi rule for the weight (1−x)^α (1+x)^β, α, β > −1.
///
/// Chebyshev weight (α = β = −1/2) takes the closed-form fast path; the
/// general case builds the Jacobi matrix and diagonalizes it.
pub fn gauss_jacobi(m: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if m == 0 || alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::invalid(format!(
            "gauss_jacobi needs m ≥ 1 and α, β > −1 (got m={m}, α={alpha}, β={beta})"
        )));
    }
    if alpha == -0.5 && beta == -0.5 {
        let mf = m as f64;
        let nodes = (1..=m)
            .rev()
            .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2.0 * mf)).cos())
            .collect();
        let weights = vec![std::f64::consts::PI / mf; m];
        return Ok(GaussRule { nodes, weights });
    }

    let ab = alpha + beta;
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
        + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let diag = |k: usize| -> f64 {
        if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let kf = k as f64;
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        }
    };
    let offdiag_sq = |k: usize| -> f64 {
        // b_k with p_k = (x − a_{k−1}) p_{k−1} − b_{k−1} p_{k−2}
        if k == 1 {
            4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            let kf = k as f64;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / ((2.0 * kf + ab) * (2.0 * kf + ab) * (2.0 * kf + ab + 1.0)
                    * (2.0 * kf + ab - 1.0))
        }
    };

    let jac = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            diag(i)
        } else if j == i + 1 || i == j + 1 {
            offdiag_sq(i.max(j)).sqrt()
        } else {
            0.0
        }
    });
    let evd = jac
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::SeriesNonConvergence {
            context: format!("jacobi matrix eigensolve failed (m={m}, α={alpha}, β={beta})"),
        })?;
    let nodes: Vec<f64> = (0..m).map(|i| evd.S()[i]).collect();
    let weights: Vec<f64> = (0..m)
        .map(|i| {
            let u0 = evd.U()[(0, i)];
            mu0 * u0 * u0
        })
        .collect();
    Ok(GaussRule { nodes, weights })
}
