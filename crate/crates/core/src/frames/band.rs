use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::sphere_volume;
use crate::harmonics::{eigenspace_dim, lambda_n, projection_kernel_all};
use crate::numerics::kahan_dot;

use super::mask::{smooth_ramp, MaskPair};

/// Hard cap on adaptive coefficient runs for envelopes without compact
/// support; reaching it without a decay certificate is reported as a
/// divergent series.
const ADAPTIVE_CAP: usize = 65_536;

/// Even envelope generating a band kernel through `kappa(eps (l + lambda))`.
#[derive(Clone)]
pub enum Envelope {
    /// `exp(-t^2)`; the resulting kernel is a smoothed heat-kernel profile.
    Heat,
    /// C-infinity plateau bump supported on 1/2 <= |t| <= 2, equal to 1
    /// at |t| = 1.
    Bump,
    /// `|a(t)|^2` from a mask pair, supported on 1/2 <= |t| <= 2.
    MaskSquared(MaskPair),
    /// User envelope, evaluated at |t|. `support = Some((lo, hi))` certifies
    /// that it vanishes off lo <= |t| <= hi; `None` triggers adaptive
    /// truncation, which must observe fast decay.
    Custom {
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: Option<(f64, f64)>,
    },
}

impl std::fmt::Debug for Envelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Envelope::Heat => write!(f, "Heat"),
            Envelope::Bump => write!(f, "Bump"),
            Envelope::MaskSquared(m) => f.debug_tuple("MaskSquared").field(m).finish(),
            Envelope::Custom { support, .. } => {
                f.debug_struct("Custom").field("support", support).finish()
            }
        }
    }
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        let x = t.abs();
        match self {
            Envelope::Heat => (-x * x).exp(),
            Envelope::Bump => smooth_ramp(2.0 * x - 1.0) * smooth_ramp(2.0 - x),
            Envelope::MaskSquared(m) => m.a_sq(x),
            Envelope::Custom { eval, .. } => eval(x),
        }
    }

    /// `Some((lo, hi))` when the envelope is known to vanish off
    /// `lo <= |t| <= hi`.
    fn support(&self) -> Option<(f64, f64)> {
        match self {
            Envelope::Heat => None,
            Envelope::Bump | Envelope::MaskSquared(_) => Some((0.5, 2.0)),
            Envelope::Custom { support, .. } => *support,
        }
    }
}

/// Zonal kernel `K(t) = sum_l kappa(eps (l + lambda_n)) P_l(t)` over the
/// projection kernels of S^n, stored by its coefficient run.
#[derive(Debug, Clone)]
pub struct BandKernel {
    pub dim_n: usize,
    pub epsilon: f64,
    /// Envelope differentiability order the decay bound is quoted for.
    pub decay_order_k: usize,
    coeffs: Vec<f64>,
}

/// Builds the band kernel for a scale `0 < eps <= 1`.
///
/// Compactly supported envelopes give an exact finite run; otherwise the run
/// grows adaptively until the terms `kappa(eps nu) d_l / omega_n` fall 18
/// orders below their peak, and an envelope too slow for that certificate is
/// rejected as a divergent series.
pub fn band_kernel(
    kappa: &Envelope,
    dim_n: usize,
    eps: f64,
    decay_order_k: usize,
) -> Result<BandKernel> {
    if dim_n < 1 {
        return Err(Error::invalid("band kernels need dimension n >= 1"));
    }
    if !(eps > 0.0 && eps <= 1.0) || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "band scale eps = {eps} outside (0, 1]"
        )));
    }
    if decay_order_k < 2 || decay_order_k + 1 < dim_n {
        return Err(Error::invalid(format!(
            "decay order k = {decay_order_k} below max(2, n - 1) for n = {dim_n}"
        )));
    }
    let lam = lambda_n(dim_n);
    let omega = sphere_volume(dim_n);
    let coeffs = if let Some((_, hi)) = kappa.support() {
        let l_end = (hi / eps - lam).floor().max(0.0) as usize;
        (0..=l_end)
            .map(|l| kappa.eval(eps * (l as f64 + lam)))
            .collect()
    } else {
        let mut run = Vec::new();
        let mut peak = 0.0f64;
        let mut quiet = 0usize;
        for l in 0..ADAPTIVE_CAP {
            let c = kappa.eval(eps * (l as f64 + lam));
            run.push(c);
            let term = c.abs() * eigenspace_dim(dim_n, l) as f64 / omega;
            peak = peak.max(term);
            if term <= 1e-18 * peak && eps * (l as f64 + lam) >= 4.0 {
                quiet += 1;
                if quiet >= 16 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if quiet < 16 {
            return Err(Error::DivergentSeries {
                context: format!(
                    "envelope terms did not fall below 1e-18 of their peak within {ADAPTIVE_CAP} degrees; no truncation certificate"
                ),
            });
        }
        run
    };
    Ok(BandKernel {
        dim_n,
        epsilon: eps,
        decay_order_k,
        coeffs,
    })
}

impl BandKernel {
    pub fn l_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient `kappa(eps (l + lambda_n))`; zero beyond the stored run.
    pub fn coeff(&self, l: usize) -> f64 {
        self.coeffs.get(l).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Kernel value at `t = cos theta`.
    pub fn eval(&self, t: f64) -> f64 {
        let basis = projection_kernel_all(self.dim_n, self.l_max(), t);
        kahan_dot(&basis, &self.coeffs)
    }
}
