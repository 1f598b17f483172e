use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::sphere_volume;
use crate::harmonics::{
    apply_L_gamma, eigenspace_dim, lambda_n, projection_kernel_all, space_dim, PolynomialOnSphere,
};
use crate::kernels::zonal::TailInfo;
use crate::kernels::{lp_kernel_transform, FamilyTag, ZonalKernel};
use crate::numerics::{kahan_dot, kahan_sum};

use super::mask::MaskPair;
use super::norms::poly_sup_norm;

/// Dyadic offset aligning the spectral parameter `nu = l + lambda_n` with
/// powers of two: 0 on the circle, floor(log2(lambda_n)) for n >= 2
/// (so -1 on S^2, where lambda = 1/2).
pub fn dyadic_offset(dim_n: usize) -> i64 {
    if dim_n == 1 {
        0
    } else {
        lambda_n(dim_n).log2().floor() as i64
    }
}

/// Dyadic low-pass operator at level J: multiplies the degree-l component
/// by `b(2^{-(J + offset)} (l + lambda_n))`, which is 1 across the
/// reproduction band and vanishes past twice its edge.
#[derive(Debug, Clone)]
pub struct FrameOperatorSpec {
    pub mask: MaskPair,
    pub dim_n: usize,
    pub level: usize,
}

impl FrameOperatorSpec {
    pub fn new(mask: MaskPair, dim_n: usize, level: usize) -> Result<Self> {
        if dim_n < 1 {
            return Err(Error::invalid("frame operators need dimension n >= 1"));
        }
        Ok(Self { mask, dim_n, level })
    }

    fn exponent(&self) -> i64 {
        self.level as i64 + dyadic_offset(self.dim_n)
    }

    /// Spectral scale `2^{-(J + offset)}`.
    pub fn scale(&self) -> f64 {
        2.0f64.powi(-self.exponent() as i32)
    }

    /// Coefficient multiplier of the degree-l component.
    pub fn multiplier(&self, l: usize) -> f64 {
        self.mask.b(self.scale() * (l as f64 + lambda_n(self.dim_n)))
    }

    /// Multiplier of the level-j detail layer, `|a(2^{-(j + offset)} nu)|^2`;
    /// consecutive low-pass levels differ by exactly this layer.
    pub fn layer_multiplier(&self, j: usize, l: usize) -> f64 {
        let scale = 2.0f64.powi(-(j as i64 + dyadic_offset(self.dim_n)) as i32);
        self.mask.a_sq(scale * (l as f64 + lambda_n(self.dim_n)))
    }

    /// Largest degree L with `L + lambda_n <= 2^{J + offset}`; components up
    /// to it carry multiplier exactly 1.
    pub fn reproduction_degree(&self) -> usize {
        let edge = 2.0f64.powi(self.exponent() as i32) - lambda_n(self.dim_n);
        edge.max(0.0).floor() as usize
    }

    /// Largest degree whose multiplier can be nonzero
    /// (`l + lambda_n < 2^{J + offset + 1}`).
    pub fn band_end(&self) -> usize {
        let ub = 2.0f64.powi(self.exponent() as i32 + 1) - lambda_n(self.dim_n);
        debug_assert!(ub > 0.0);
        if ub.fract() == 0.0 {
            (ub - 1.0).max(0.0) as usize
        } else {
            ub.floor() as usize
        }
    }

    /// Applies the low-pass multiplier degree by degree. The output degree is
    /// capped at the band end, past which every component vanishes.
    pub fn apply_to_poly(&self, poly: &PolynomialOnSphere) -> PolynomialOnSphere {
        let out_degree = poly.degree.min(self.band_end());
        let mut out = PolynomialOnSphere::zero(poly.dim_n, out_degree);
        for l in 0..=out_degree {
            let factor = self.multiplier(l);
            for (i, v) in poly.degree_slice(l).iter().enumerate() {
                out.set(l, i + 1, v * factor);
            }
        }
        out
    }

    /// Applies the low-pass multiplier to a zonal kernel's coefficient run,
    /// producing a band-limited kernel (no tail). The stored run must cover
    /// the band.
    pub fn apply_to_kernel(&self, k: &ZonalKernel) -> Result<ZonalKernel> {
        if k.dim_n != self.dim_n {
            return Err(Error::invalid(format!(
                "kernel lives on S^{} but the operator is for S^{}",
                k.dim_n, self.dim_n
            )));
        }
        let band_end = self.band_end();
        if band_end > k.l_max() {
            return Err(Error::DegreeOverflow {
                have: k.l_max(),
                need: band_end,
            });
        }
        let coeffs: Vec<f64> = (0..=band_end)
            .map(|l| k.coeff(l) * self.multiplier(l))
            .collect();
        let cutoff = k.poly_cutoff().min(band_end + 1);
        let low: Vec<f64> = (0..cutoff)
            .map(|l| k.true_coeff(l) * self.multiplier(l))
            .collect();
        ZonalKernel::build(
            k.dim_n,
            FamilyTag::Custom,
            coeffs,
            cutoff,
            low,
            None,
            TailInfo::Zero,
        )
    }
}

fn dim_growth_factor(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        let mut f = 2.0f64.powi(n as i32 - 1);
        for i in 2..n {
            f /= i as f64;
        }
        f
    }
}

/// Parseval remainder `sum_{l > l_max} c_l^2 d_l / omega` certified by the
/// kernel's tail classifier.
fn square_tail_remainder(k: &ZonalKernel) -> Result<f64> {
    let n = k.dim_n;
    let nf = n as f64;
    let omega = sphere_volume(n);
    let nu_max = k.l_max() as f64 + lambda_n(n);
    match k.tail_info() {
        TailInfo::Zero => Ok(0.0),
        TailInfo::Algebraic { exponent, envelope } => {
            if 2.0 * exponent <= nf {
                return Err(Error::DivergentSeries {
                    context: format!(
                        "squared coefficient tail with decay exponent {exponent:.3} diverges on S^{n}"
                    ),
                });
            }
            Ok(dim_growth_factor(n) / omega * envelope * envelope
                * nu_max.powf(nf - 2.0 * exponent)
                / (2.0 * exponent - nf))
        }
        TailInfo::Geometric { ratio, poly_power } => {
            let q_base = ratio * ((nu_max + 1.0) / nu_max).powf((nf - 1.0) / 2.0 + poly_power);
            let q = q_base * q_base;
            if q >= 1.0 {
                return Err(Error::DivergentSeries {
                    context: "squared geometric tail ratio reached 1".into(),
                });
            }
            let c = k.coeff(k.l_max());
            let last = c * c * eigenspace_dim(n, k.l_max()) as f64 / omega;
            Ok(last * q / (1.0 - q))
        }
        TailInfo::Infinite => Err(Error::DivergentSeries {
            context: "kernel carries no usable coefficient tail bound".into(),
        }),
    }
}

/// Measures `|| (I - B_J) K ||` in the Bessel-potential norm of order
/// `gamma` and integrability `p` (1 <= p <= infinity), where `B_J` is the
/// spec's low-pass operator and K the kernel as a zonal function.
///
/// The coefficient scaling runs through [`lp_kernel_transform`]; membership
/// of the transformed kernel in L^p is checked against its tail classifier
/// and rejected as a divergent series otherwise. p = 2 is summed exactly by
/// Parseval; other exponents go through a polar-angle grid with the tail
/// folded in as an upper bound.
pub fn frame_error_bound(
    k: &ZonalKernel,
    spec: &FrameOperatorSpec,
    gamma: f64,
    p: f64,
) -> Result<f64> {
    if k.dim_n != spec.dim_n {
        return Err(Error::invalid(format!(
            "kernel lives on S^{} but the operator is for S^{}",
            k.dim_n, spec.dim_n
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("norm exponent p = {p} below 1")));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid("smoothness order gamma must be finite"));
    }
    let n = k.dim_n;
    let nf = n as f64;
    let dual_exponent = if p.is_infinite() { nf } else { nf * (1.0 - 1.0 / p) };
    let shifted = lp_kernel_transform(k, gamma)?;
    match shifted.tail_info() {
        TailInfo::Infinite => {
            return Err(Error::DivergentSeries {
                context: "kernel carries no usable coefficient tail bound".into(),
            })
        }
        TailInfo::Algebraic { exponent, .. } if *exponent <= dual_exponent => {
            return Err(Error::DivergentSeries {
                context: format!(
                    "transformed coefficient decay {exponent:.4} <= n/p' = {dual_exponent:.4}; the shifted kernel is not in L^p"
                ),
            })
        }
        _ => {}
    }
    let omega = sphere_volume(n);
    let l_max = shifted.l_max();
    let resid: Vec<f64> = (0..=l_max)
        .map(|l| shifted.true_coeff(l) * (1.0 - spec.multiplier(l)))
        .collect();
    if p == 2.0 {
        let terms: Vec<f64> = resid
            .iter()
            .enumerate()
            .map(|(l, c)| c * c * eigenspace_dim(n, l) as f64 / omega)
            .collect();
        let head = kahan_sum(terms);
        let tail_sq = square_tail_remainder(&shifted)?;
        return Ok((head + tail_sq).sqrt());
    }
    // Past the stored run the multiplier residual is at most 1, so the
    // coefficient tail bound is a pointwise bound there.
    let tail_sup = shifted.tail_bound(l_max);
    if !tail_sup.is_finite() {
        return Err(Error::DivergentSeries {
            context: format!(
                "no pointwise certificate for the transformed kernel beyond degree {l_max}"
            ),
        });
    }
    let eval = |t: f64| kahan_dot(&projection_kernel_all(n, l_max, t), &resid);
    if p.is_infinite() {
        let m = 4096usize.max(8 * l_max);
        let sup = (0..=m)
            .into_par_iter()
            .map(|i| eval((std::f64::consts::PI * i as f64 / m as f64).cos()).abs())
            .reduce(|| 0.0, f64::max);
        return Ok(sup + tail_sup);
    }
    let head = super::norms::zonal_lp_norm(n, p, l_max, &eval)?;
    Ok(head + tail_sup * omega.powf(1.0 / p))
}

fn random_poly(dim_n: usize, degree: usize, seed: u64) -> PolynomialOnSphere {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..space_dim(dim_n, degree))
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    PolynomialOnSphere::from_coeffs(dim_n, degree, coeffs).expect("length matches by construction")
}

fn mix_seed(seed: u64, degree: usize, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((degree as u64) << 24)
        .wrapping_add(trial as u64)
}

fn sup_grid_size(dim_n: usize, degree: usize) -> usize {
    if dim_n == 1 {
        (256 * (degree + 1)).clamp(2048, 65_536)
    } else {
        (24 * (degree + 1) * (degree + 1)).clamp(2048, 40_000)
    }
}

/// Worst ratio `||S||_{H^p_gamma} / ||S||_p` over a seeded random ensemble
/// of degree-L polynomials, for each requested L. Supports p = 2 (exact by
/// Parseval) and p = infinity (grid sup norms).
pub fn bernstein_poly_table(
    dim_n: usize,
    p: f64,
    gamma: f64,
    l_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if !(p == 2.0 || p.is_infinite()) {
        return Err(Error::invalid(
            "polynomial ratio tables support p = 2 or p = inf",
        ));
    }
    if trials == 0 || l_values.is_empty() {
        return Err(Error::invalid("need at least one degree and one trial"));
    }
    let mut out = Vec::with_capacity(l_values.len());
    for &degree in l_values {
        let mut worst = 0.0f64;
        for trial in 0..trials {
            let poly = random_poly(dim_n, degree, mix_seed(seed, degree, trial));
            let scaled = apply_L_gamma(&poly, gamma)?;
            let ratio = if p == 2.0 {
                scaled.l2_norm() / poly.l2_norm()
            } else {
                let grid = sup_grid_size(dim_n, degree);
                poly_sup_norm(&scaled, grid)? / poly_sup_norm(&poly, grid)?
            };
            worst = worst.max(ratio);
        }
        out.push((degree, worst));
    }
    Ok(out)
}

/// Worst ratio `||S||_inf / ||S||_2` over the same seeded ensemble.
pub fn nikolskii_poly_table(
    dim_n: usize,
    l_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if trials == 0 || l_values.is_empty() {
        return Err(Error::invalid("need at least one degree and one trial"));
    }
    let mut out = Vec::with_capacity(l_values.len());
    for &degree in l_values {
        let mut worst = 0.0f64;
        for trial in 0..trials {
            let poly = random_poly(dim_n, degree, mix_seed(seed, degree, trial));
            let ratio = poly_sup_norm(&poly, sup_grid_size(dim_n, degree))? / poly.l2_norm();
            worst = worst.max(ratio);
        }
        out.push((degree, worst));
    }
    Ok(out)
}
