use crate::error::{Error, Result};
use crate::harmonics::lambda_n;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};

const L_MAX_ALGEBRAIC: usize = 1024;

/// Parameters of a (perturbed) Green kernel: coefficients
/// `(l + lambda_n)^{-beta} (1 + psi_hat(l))` with an optional bounded
/// perturbation `psi` whose factors must stay positive.
#[derive(Debug, Clone)]
pub struct GreenKernelSpec {
    pub dim_n: usize,
    pub beta: f64,
    pub perturbation: Option<ZonalKernel>,
}

impl GreenKernelSpec {
    pub fn build(&self) -> Result<ZonalKernel> {
        make_green(self.dim_n, self.beta, self.perturbation.as_ref())
    }
}

/// Green kernel of order `beta > 0` on the n-sphere, optionally perturbed.
///
/// On the circle the annihilated constant mode takes `phi_hat(0) = 1`, the
/// usual convention that keeps the kernel strictly positive definite.
/// Perturbation coefficients beyond the perturbation's stored range count
/// as zero. The coefficient tail is summable, and the kernel continuous,
/// exactly when `beta > n`.
pub fn make_green(dim_n: usize, beta: f64, psi: Option<&ZonalKernel>) -> Result<ZonalKernel> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("green kernel needs beta > 0, got {beta}")));
    }
    if dim_n == 0 {
        return Err(Error::invalid("green kernel needs dimension n >= 1"));
    }
    if let Some(p) = psi {
        if p.dim_n != dim_n {
            return Err(Error::invalid(format!(
                "perturbation lives on S^{} but the kernel is on S^{}",
                p.dim_n, dim_n
            )));
        }
    }
    let lam = lambda_n(dim_n);
    let mut coeffs = Vec::with_capacity(L_MAX_ALGEBRAIC + 1);
    for l in 0..=L_MAX_ALGEBRAIC {
        let nu = l as f64 + lam;
        let base = if nu == 0.0 { 1.0 } else { nu.powf(-beta) };
        let factor = match psi {
            Some(p) if l <= p.l_max() => 1.0 + p.coeff(l),
            _ => 1.0,
        };
        if factor <= 0.0 {
            return Err(Error::InvalidPerturbation { ell: l, value: factor });
        }
        coeffs.push(base * factor);
    }
    let envelope = coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| {
            let nu = (l as f64 + lam).max(1.0);
            c * nu.powf(beta)
        })
        .fold(0.0f64, f64::max);
    ZonalKernel::build(
        dim_n,
        FamilyTag::Green,
        coeffs,
        0,
        Vec::new(),
        None,
        TailInfo::Algebraic { exponent: beta, envelope },
    )
}
