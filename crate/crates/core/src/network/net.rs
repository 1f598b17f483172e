use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CenterSet, SpherePoint};
use crate::kernels::zonal::TailInfo;
use crate::kernels::{lp_kernel_transform, ZonalKernel};
use crate::numerics::kahan_sum;
use crate::quadrature::lp_norm_on_grid;

/// Grid hints above this are clamped on the sphere, where the grid size
/// grows quadratically with the hint. Norms of functions that are not
/// band-limited below the cap are approximations either way; the cap keeps
/// them affordable without changing the polynomial-exactness contract for
/// band-limited inputs under it.
const SPHERE_HINT_CAP: usize = 128;

/// Function `g(x) = sum_xi a_xi phi(x . xi)` spanned by shifts of a zonal
/// kernel to a fixed set of centers.
#[derive(Debug, Clone)]
pub struct SbfNetwork {
    pub kernel: ZonalKernel,
    pub centers: CenterSet,
    /// One coefficient per center, in center order.
    pub coeffs_a: Vec<f64>,
}

impl SbfNetwork {
    pub fn new(kernel: ZonalKernel, centers: CenterSet, coeffs_a: Vec<f64>) -> Result<Self> {
        if kernel.dim_n != centers.dim_n {
            return Err(Error::invalid(format!(
                "kernel on S^{} but centers on S^{}",
                kernel.dim_n, centers.dim_n
            )));
        }
        if coeffs_a.len() != centers.points.len() {
            return Err(Error::invalid(format!(
                "{} coefficients for {} centers",
                coeffs_a.len(),
                centers.points.len()
            )));
        }
        if coeffs_a.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("network coefficients must be finite"));
        }
        Ok(Self { kernel, centers, coeffs_a })
    }

    pub fn len(&self) -> usize {
        self.coeffs_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs_a.is_empty()
    }

    /// Pointwise value `sum_xi a_xi phi(x . xi)`.
    ///
    /// Kernels without a sup-norm certificate fail with a divergent-series
    /// error; kernels whose closed form blows up at the evaluation
    /// configuration (a distributional kernel evaluated at a center) fail the
    /// same way, with the offending argument in the context.
    pub fn evaluate(&self, x: &SpherePoint) -> Result<f64> {
        if x.dim_n() != self.centers.dim_n {
            return Err(Error::invalid(format!(
                "evaluation point on S^{} but the network lives on S^{}",
                x.dim_n(),
                self.centers.dim_n
            )));
        }
        let mut terms = Vec::with_capacity(self.len());
        for (p, a) in self.centers.points.iter().zip(&self.coeffs_a) {
            let t = x.dot(p);
            let v = self.kernel.eval(t)?;
            if !v.is_finite() {
                return Err(Error::DivergentSeries {
                    context: format!(
                        "kernel value at t = {t:.6} is not finite; the network is not \
                         pointwise evaluable there"
                    ),
                });
            }
            terms.push(a * v);
        }
        Ok(kahan_sum(terms))
    }

    /// Values at many points, computed in parallel.
    pub fn evaluate_many(&self, points: &[SpherePoint]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.evaluate(p)).collect()
    }
}

/// Pointwise value of the stored coefficient run at `t`, preferring the
/// closed form. Used by grid norms, where the truncation error is the
/// kernel's tail bound and integrable blowups must not abort the sweep.
pub(crate) fn profile_value(k: &ZonalKernel, t: f64) -> f64 {
    match k.eval_closed(t) {
        Some(v) if v.is_finite() => v,
        _ => k.eval_series(t, k.l_max()),
    }
}

/// Symmetric matrix with entries `sum_l phi_hat(l)^2 P_l(xi . eta)`, the
/// L^2 Gram of the shifted kernels over the centers (Parseval over the
/// stored coefficient run).
pub(crate) fn l2_gram(kernel: &ZonalKernel, cs: &CenterSet) -> Result<Mat<f64>> {
    if kernel.dim_n != cs.dim_n {
        return Err(Error::invalid(format!(
            "kernel on S^{} but centers on S^{}",
            kernel.dim_n, cs.dim_n
        )));
    }
    let sq: Vec<f64> = (0..=kernel.l_max())
        .map(|l| {
            let c = kernel.true_coeff(l);
            c * c
        })
        .collect();
    let probe = ZonalKernel::custom(kernel.dim_n, sq)?;
    let run = probe.l_max();
    let n = cs.points.len();
    let mut g = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = probe.eval_series(cs.points[i].dot(&cs.points[j]), run);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// `L^p(S^n)` norm of the network function.
///
/// For p = 2 the norm is computed spectrally through the L^2 Gram of the
/// shifted kernels (exact for the stored coefficient run, by Parseval); for
/// other p it is a grid norm of the stored-run profile. The sup norm
/// additionally requires a finite kernel tail bound, since a truncated run
/// says nothing about the peak of a distributional kernel.
pub fn network_lp_norm(net: &SbfNetwork, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("norm exponent p = {p} below 1")));
    }
    if net.is_empty() {
        return Ok(0.0);
    }
    if p == 2.0 {
        let g = l2_gram(&net.kernel, &net.centers)?;
        let n = net.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += net.coeffs_a[i] * g[(i, j)] * net.coeffs_a[j];
            }
        }
        return Ok(quad.max(0.0).sqrt());
    }
    if p.is_infinite()
        && !net.kernel.has_closed_form()
        && !net.kernel.tail_bound(net.kernel.l_max()).is_finite()
    {
        return Err(Error::DivergentSeries {
            context: "sup norm needs a kernel with a closed form or a finite tail bound"
                .to_string(),
        });
    }
    let hint = if net.centers.dim_n == 1 {
        net.kernel.l_max()
    } else {
        net.kernel.l_max().min(SPHERE_HINT_CAP)
    };
    let kernel = &net.kernel;
    let centers = &net.centers.points;
    let coeffs = &net.coeffs_a;
    lp_norm_on_grid(
        &|x: &SpherePoint| {
            kahan_sum(
                centers
                    .iter()
                    .zip(coeffs)
                    .map(|(c, a)| a * profile_value(kernel, x.dot(c))),
            )
        },
        net.centers.dim_n,
        p,
        hint,
    )
}

/// Bessel-potential Sobolev norm `|| g ||_{H^p_gamma}`: the kernel is
/// replaced by its spectral shift `(l + lambda_n)^gamma phi_hat(l)` and the
/// L^p norm of the shifted network is taken.
///
/// Membership requires the shifted coefficients to decay faster than
/// `n / p'` (conjugate exponent); algebraically decaying families hit that
/// boundary at `gamma = beta - n/p'` and are rejected past it.
pub fn sobolev_norm(net: &SbfNetwork, gamma: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("norm exponent p = {p} below 1")));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid(format!("smoothness gamma = {gamma} not finite")));
    }
    let n = net.centers.dim_n as f64;
    let conj = if p.is_infinite() { n } else { n * (1.0 - 1.0 / p) };
    match net.kernel.tail_info() {
        TailInfo::Zero | TailInfo::Geometric { .. } => {}
        TailInfo::Algebraic { exponent, .. } => {
            if exponent - gamma <= conj {
                return Err(Error::DivergentSeries {
                    context: format!(
                        "coefficient decay {exponent} shifted by gamma = {gamma} does not \
                         clear the membership boundary n/p' = {conj}"
                    ),
                });
            }
        }
        TailInfo::Infinite => {
            return Err(Error::DivergentSeries {
                context: "kernel has no coefficient decay certificate".to_string(),
            });
        }
    }
    let shifted = lp_kernel_transform(&net.kernel, gamma)?;
    let shifted_net = SbfNetwork {
        kernel: shifted,
        centers: net.centers.clone(),
        coeffs_a: net.coeffs_a.clone(),
    };
    network_lp_norm(&shifted_net, p)
}
