//! Small weighted least-squares fits used by the measurement harnesses.

use crate::error::{Error, Result};

/// Weighted straight-line fit y ≈ intercept + slope·x.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Weighted coefficient of determination.
    pub r_squared: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    assert!(x.len() == y.len() && x.len() == w.len());
    if x.len() < 2 {
        return Err(Error::FitUnstable { usable: x.len() });
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return Err(Error::FitUnstable { usable: x.len() });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..x.len() {
        let fit = intercept + slope * x[i];
        ss_res += w[i] * (y[i] - fit) * (y[i] - fit);
        ss_tot += w[i] * (y[i] - my) * (y[i] - my);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LineFit { slope, intercept, r_squared })
}

/// Least-squares solution of a small dense system AᵀA β = Aᵀy by Gaussian
/// elimination with partial pivoting. Columns of `a` are the regressors.
pub fn normal_equations_fit(a: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let p = a.len();
    let n = y.len();
    assert!(a.iter().all(|col| col.len() == n) && w.len() == n);
    if n < p {
        return Err(Error::FitUnstable { usable: n });
    }
    let mut ata = vec![vec![0.0f64; p]; p];
    let mut aty = vec![0.0f64; p];
    for r in 0..p {
        for c in 0..p {
            ata[r][c] = (0..n).map(|i| w[i] * a[r][i] * a[c][i]).sum();
        }
        aty[r] = (0..n).map(|i| w[i] * a[r][i] * y[i]).sum();
    }
    // elimination
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&i, &j| ata[i][col].abs().total_cmp(&ata[j][col].abs()))
            .unwrap();
        ata.swap(col, piv);
        aty.swap(col, piv);
        let d = ata[col][col];
        if d.abs() < 1e-13 {
            return Err(Error::FitUnstable { usable: n });
        }
        for row in (col + 1)..p {
            let f = ata[row][col] / d;
            for c in col..p {
                ata[row][c] -= f * ata[col][c];
            }
            aty[row] -= f * aty[col];
        }
    }
    let mut beta = vec![0.0f64; p];
    for row in (0..p).rev() {
        let mut acc = aty[row];
        for c in (row + 1)..p {
            acc -= ata[row][c] * beta[c];
        }
        beta[row] = acc / ata[row][row];
    }
    Ok(beta)
}
