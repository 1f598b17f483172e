use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::sphere_volume;
use crate::harmonics::{eigenspace_dim, lambda_n, projection_kernel_all};
use crate::numerics::{kahan_dot, kahan_sum};

/// Kernel family marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    Green,
    Tps,
    Wendland,
    Gaussian,
    Multiquadric,
    Generating,
    Poisson,
    Custom,
}

/// Certified control of the coefficient tail beyond the stored range,
/// used to bound `sum_{l > L} phi_hat(l) d_l / omega_n`.
#[derive(Debug, Clone)]
pub(crate) enum TailInfo {
    /// No usable bound (non-continuous kernels).
    Infinite,
    /// Nothing beyond the stored coefficients.
    Zero,
    /// `phi_hat(l) <= envelope * (l + lambda)^{-exponent}` beyond L_max.
    Algebraic { exponent: f64, envelope: f64 },
    /// `phi_hat(l+1)/phi_hat(l) <= ratio * ((nu+1)/nu)^{poly_power}` beyond L_max.
    Geometric { ratio: f64, poly_power: f64 },
}

/// Zonal kernel `phi(x . y)` stored by its projection-expansion coefficients
/// `phi_hat(l)` for `l = 0..=l_max`, so that
/// `phi(t) = sum_l phi_hat(l) P_l(t)` with `P_l` the degree-l projection
/// kernel of the sphere.
///
/// Catalog constructors guarantee `phi_hat(l) > 0` on the stored range.
/// Conditionally positive definite families store a cutoff `poly_cutoff`:
/// coefficients below it were replaced by a documented positive
/// continuation, with the true signed values kept in `low_coeffs`.
#[derive(Clone)]
pub struct ZonalKernel {
    pub dim_n: usize,
    pub family: FamilyTag,
    coeffs: Vec<f64>,
    poly_cutoff: usize,
    low_coeffs: Vec<f64>,
    closed_form: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    tail: TailInfo,
    suffix: Vec<f64>,
}

impl std::fmt::Debug for ZonalKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZonalKernel")
            .field("dim_n", &self.dim_n)
            .field("family", &self.family)
            .field("l_max", &self.l_max())
            .field("poly_cutoff", &self.poly_cutoff)
            .field("has_closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl ZonalKernel {
    pub(crate) fn build(
        dim_n: usize,
        family: FamilyTag,
        coeffs: Vec<f64>,
        poly_cutoff: usize,
        low_coeffs: Vec<f64>,
        closed_form: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        tail: TailInfo,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a zonal kernel needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite kernel coefficient"));
        }
        let omega = sphere_volume(dim_n);
        let mut suffix = vec![0.0; coeffs.len() + 1];
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for l in (0..coeffs.len()).rev() {
            // Kahan-compensated suffix sums of phi_hat(l) d_l / omega.
            let y = coeffs[l] * eigenspace_dim(dim_n, l) as f64 / omega - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            suffix[l] = acc;
        }
        Ok(Self {
            dim_n,
            family,
            coeffs,
            poly_cutoff,
            low_coeffs,
            closed_form,
            tail,
            suffix,
        })
    }

    /// Kernel from an explicit coefficient vector (no tail beyond it).
    pub fn custom(dim_n: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::build(
            dim_n,
            FamilyTag::Custom,
            coeffs,
            0,
            Vec::new(),
            None,
            TailInfo::Zero,
        )
    }

    /// Largest stored coefficient degree.
    pub fn l_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Stored (positive-continued) coefficient `phi_hat(l)`.
    pub fn coeff(&self, l: usize) -> f64 {
        self.coeffs[l]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree below which stored coefficients are a positive continuation
    /// rather than the kernel's true expansion (0 for positive definite
    /// kernels).
    pub fn poly_cutoff(&self) -> usize {
        self.poly_cutoff
    }

    /// True signed coefficients for `l < poly_cutoff`.
    pub fn low_coeffs(&self) -> &[f64] {
        &self.low_coeffs
    }

    /// True expansion coefficient: the signed low value below the cutoff,
    /// the stored value at and above it.
    pub fn true_coeff(&self, l: usize) -> f64 {
        if l < self.poly_cutoff {
            self.low_coeffs[l]
        } else {
            self.coeffs[l]
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Direct evaluation of the closed form, when one is attached.
    pub fn eval_closed(&self, t: f64) -> Option<f64> {
        self.closed_form.as_ref().map(|f| f(t))
    }

    /// Truncated series `sum_{l <= upto} phi_hat(l) P_l(t)` over the stored
    /// coefficients.
    pub fn eval_series(&self, t: f64, upto: usize) -> f64 {
        let upto = upto.min(self.l_max());
        let basis = projection_kernel_all(self.dim_n, upto, t);
        kahan_dot(&basis, &self.coeffs[..=upto])
    }

    /// Pointwise kernel value: closed form when available, otherwise the
    /// full stored series, which certifies against the tail bound.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if let Some(f) = &self.closed_form {
            return Ok(f(t));
        }
        if !self.tail_bound(self.l_max()).is_finite() {
            return Err(Error::DivergentSeries {
                context: format!(
                    "{:?} kernel has no closed form and no finite tail bound; pointwise value not certified",
                    self.family
                ),
            });
        }
        Ok(self.eval_series(t, self.l_max()))
    }

    /// Upper bound on the sup-norm tail `sum_{l > L} phi_hat(l) d_l^n / omega_n`,
    /// combining exact suffix sums of stored coefficients with the family's
    /// analytic remainder beyond `l_max`.
    pub fn tail_bound(&self, l: usize) -> f64 {
        let stored = if l + 1 < self.suffix.len() {
            self.suffix[l + 1]
        } else {
            0.0
        };
        stored + self.remainder_beyond_stored()
    }

    fn remainder_beyond_stored(&self) -> f64 {
        let n = self.dim_n;
        let lam = lambda_n(n);
        let nu_max = self.l_max() as f64 + lam;
        let omega = sphere_volume(n);
        // d_l <= factor_n * nu^{n-1}: equality 2 nu for n = 2, constant 2
        // for n = 1, and (l + n - 2) <= 2 nu gives 2^{n-1} nu^{n-1}/(n-1)!.
        let factor_n = if n == 1 {
            2.0
        } else {
            let mut f = 2.0f64.powi(n as i32 - 1);
            for i in 2..n {
                f /= i as f64;
            }
            f
        };
        match &self.tail {
            TailInfo::Infinite => f64::INFINITY,
            TailInfo::Zero => 0.0,
            TailInfo::Algebraic { exponent, envelope } => {
                if *exponent <= n as f64 {
                    f64::INFINITY
                } else {
                    factor_n / omega * envelope * nu_max.powf(n as f64 - exponent)
                        / (exponent - n as f64)
                }
            }
            TailInfo::Geometric { ratio, poly_power } => {
                let r_eff = ratio
                    * ((nu_max + 1.0) / nu_max).powf((n as f64 - 1.0 + poly_power).max(0.0));
                if r_eff >= 1.0 {
                    f64::INFINITY
                } else {
                    let last = self.coeffs[self.l_max()]
                        * eigenspace_dim(n, self.l_max()) as f64
                        / omega;
                    last * r_eff / (1.0 - r_eff)
                }
            }
        }
    }

    pub(crate) fn tail_info(&self) -> &TailInfo {
        &self.tail
    }
}

/// Running minima of kernel coefficients: `values[L] = min_{l <= L} phi_hat(l)`
/// and the shifted variant weighted by `(l + lambda_n)^delta`.
#[derive(Debug, Clone)]
pub struct MinCoeffProfile {
    pub delta: f64,
    pub values: Vec<f64>,
    pub shifted: Vec<f64>,
}

/// Computes coefficient minima up to degree `l_cap` (at most the stored
/// range). On the circle `(0 + lambda_1)^delta` vanishes for positive delta,
/// so the shifted profile is 0 there; callers that need a nonzero floor on
/// the circle should exclude the constant mode themselves.
pub fn min_coeff_profile(k: &ZonalKernel, delta: f64, l_cap: usize) -> Result<MinCoeffProfile> {
    if l_cap > k.l_max() {
        return Err(Error::invalid(format!(
            "profile degree {} exceeds stored coefficient range {}",
            l_cap,
            k.l_max()
        )));
    }
    let lam = lambda_n(k.dim_n);
    let mut values = Vec::with_capacity(l_cap + 1);
    let mut shifted = Vec::with_capacity(l_cap + 1);
    let (mut mv, mut ms) = (f64::INFINITY, f64::INFINITY);
    for l in 0..=l_cap {
        let c = k.coeff(l);
        mv = mv.min(c);
        let base = l as f64 + lam;
        let w = if base == 0.0 && delta == 0.0 {
            1.0
        } else {
            base.powf(delta)
        };
        ms = ms.min(w * c);
        values.push(mv);
        shifted.push(ms);
    }
    Ok(MinCoeffProfile {
        delta,
        values,
        shifted,
    })
}

/// Spectral multiplier `(l + lambda_n)^gamma` applied to a kernel's stored
/// coefficients; the closed form is dropped (it no longer matches). On the
/// circle the constant coefficient is kept unchanged, consistent with the
/// `phi_hat(0) = 1` convention of the circle Green kernels.
pub fn lp_kernel_transform(k: &ZonalKernel, gamma: f64) -> Result<ZonalKernel> {
    let lam = lambda_n(k.dim_n);
    let scale = |l: usize| -> f64 {
        let base = l as f64 + lam;
        if base == 0.0 {
            1.0
        } else {
            base.powf(gamma)
        }
    };
    let coeffs: Vec<f64> = (0..=k.l_max()).map(|l| scale(l) * k.coeff(l)).collect();
    let low: Vec<f64> = k
        .low_coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| scale(l) * c)
        .collect();
    let tail = match k.tail_info() {
        TailInfo::Infinite => TailInfo::Infinite,
        TailInfo::Zero => TailInfo::Zero,
        // phi_hat <= E nu^{-e} gives nu^gamma phi_hat <= E nu^{-(e - gamma)}
        // with the same envelope constant.
        TailInfo::Algebraic { exponent, envelope } => TailInfo::Algebraic {
            exponent: exponent - gamma,
            envelope: *envelope,
        },
        TailInfo::Geometric { ratio, poly_power } => TailInfo::Geometric {
            ratio: *ratio,
            poly_power: poly_power + gamma,
        },
    };
    ZonalKernel::build(
        k.dim_n,
        k.family,
        coeffs,
        k.poly_cutoff(),
        low,
        None,
        tail,
    )
}

/// Computable proxy for the best polynomial approximation error of the
/// kernel from degree-L polynomials: the positive tail functional
/// `sum_{l > L} phi_hat(l) d_l / omega_n`, scaled by `omega_n` for the L^1
/// convention and unscaled for sup norm. This is an upper bound on the true
/// distance, not the distance itself.
pub fn best_poly_error(k: &ZonalKernel, l: usize, p: f64) -> Result<f64> {
    let scale = if p == 1.0 {
        sphere_volume(k.dim_n)
    } else if p.is_infinite() && p > 0.0 {
        1.0
    } else {
        return Err(Error::invalid(format!(
            "best_poly_error supports p = 1 or p = infinity, got {p}"
        )));
    };
    let bound = k.tail_bound(l);
    if !bound.is_finite() {
        return Err(Error::DivergentSeries {
            context: format!("{:?} kernel tail does not converge", k.family),
        });
    }
    Ok(scale * bound)
}

/// Exact finite remainder `sum_{l = a..=b} w^l d_l / omega` helper shared by
/// the generating-kernel tests and tail construction.
pub(crate) fn geometric_dim_sum(dim_n: usize, w: f64, from: usize, to: usize) -> f64 {
    let omega = sphere_volume(dim_n);
    kahan_sum((from..=to).map(|l| w.powi(l as i32) * eigenspace_dim(dim_n, l) as f64 / omega))
}
