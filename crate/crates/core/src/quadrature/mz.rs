use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{zonal_lp_norm, BandKernel};
use crate::geometry::{CellDecomposition, CenterSet, SpherePoint};
use crate::numerics::kahan_sum;

fn check_dims(k: &BandKernel, cs: &CenterSet) -> Result<()> {
    if k.dim_n != cs.dim_n {
        return Err(Error::invalid(format!(
            "kernel on S^{} against centers on S^{}",
            k.dim_n, cs.dim_n
        )));
    }
    Ok(())
}

/// Gap between the L1 mass of a band kernel and its cell-measure Riemann sum
/// anchored at `zeta`: |  ||K||_1 - sum_xi mu(R_xi) |K(xi . zeta)|  |.
///
/// Used to probe the two-regime behavior of kernel sums: proportional to
/// the partition norm over the scale when cells are finer than the kernel
/// scale, saturating at a power of that quotient otherwise.
pub fn mz_discrepancy(
    k: &BandKernel,
    cs: &CenterSet,
    cells: &CellDecomposition,
    zeta: &SpherePoint,
) -> Result<f64> {
    check_dims(k, cs)?;
    if zeta.dim_n() != cs.dim_n {
        return Err(Error::invalid("probe point dimension mismatch"));
    }
    if cells.cell_measure.len() != cs.points.len() {
        return Err(Error::invalid(format!(
            "{} cell measures for {} centers",
            cells.cell_measure.len(),
            cs.points.len()
        )));
    }
    let l1 = zonal_lp_norm(k.dim_n, 1.0, k.l_max(), &|t| k.eval(t))?;
    let riemann = kahan_sum(
        cs.points
            .iter()
            .zip(&cells.cell_measure)
            .map(|(xi, mu)| mu * k.eval(xi.dot(zeta)).abs()),
    );
    Ok((l1 - riemann).abs())
}

/// Worst off-diagonal kernel mass over the center set:
/// max over zeta in X of sum over xi != zeta of |K(xi . zeta)|.
///
/// Stays of order q^{-n} when the kernel scale is comparable to or below
/// the separation radius, which is what makes smoothed interpolation
/// matrices diagonally dominant.
pub fn offdiag_kernel_sum(k: &BandKernel, cs: &CenterSet) -> Result<f64> {
    check_dims(k, cs)?;
    let worst = (0..cs.points.len())
        .into_par_iter()
        .map(|z| {
            let zeta = &cs.points[z];
            kahan_sum(cs.points.iter().enumerate().filter_map(|(j, xi)| {
                if j == z {
                    None
                } else {
                    Some(k.eval(xi.dot(zeta)).abs())
                }
            }))
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
