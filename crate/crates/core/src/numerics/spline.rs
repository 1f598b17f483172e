//! Clamped cubic spline on a uniform grid. Zonal kernels are sampled once in
//! the polar angle and then evaluated through this interpolant, which turns
//! O(L) series evaluations into O(1) lookups inside Gram-matrix assembly.

/// Cubic spline interpolant over a uniform grid with prescribed end slopes.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    a: f64,
    h: f64,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Interpolate `values` sampled at a, a+h, …, b with clamped end slopes.
    ///
    /// Even zonal profiles use slope 0 at both ends, which restores the O(h⁴)
    /// uniform error that a natural spline would lose near the boundary.
    pub fn clamped(a: f64, b: f64, values: Vec<f64>, slope_a: f64, slope_b: f64) -> CubicSpline {
        let n = values.len() - 1;
        assert!(n >= 2, "need at least 3 samples");
        let h = (b - a) / n as f64;

        // Tridiagonal system for the knot second derivatives.
        let mut diag = vec![2.0f64; n + 1];
        let mut rhs = vec![0.0f64; n + 1];
        rhs[0] = 6.0 / h * ((values[1] - values[0]) / h - slope_a);
        for i in 1..n {
            rhs[i] = 3.0 / (h * h) * (values[i + 1] - 2.0 * values[i] + values[i - 1]);
        }
        rhs[n] = 6.0 / h * (slope_b - (values[n] - values[n - 1]) / h);

        // Off-diagonals: first/last row coefficient 1 (clamped), interior 1/2.
        // Scaled Thomas sweep with interior rows 0.5·M_{i−1} + 2·M_i + 0.5·M_{i+1} = rhs_i.
        let lower = |i: usize| if i == n { 1.0 } else { 0.5 };
        let upper = |i: usize| if i == 0 { 1.0 } else { 0.5 };
        for i in 1..=n {
            let w = lower(i) / diag[i - 1];
            diag[i] -= w * upper(i - 1);
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0f64; n + 1];
        m[n] = rhs[n] / diag[n];
        for i in (0..n).rev() {
            m[i] = (rhs[i] - upper(i) * m[i + 1]) / diag[i];
        }

        CubicSpline { a, h, values, m }
    }

    /// Evaluate the spline; arguments outside the grid clamp to the ends.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let s = ((x - self.a) / self.h).floor();
        let i = (s as isize).clamp(0, n as isize - 1) as usize;
        let xl = self.a + i as f64 * self.h;
        let t = x - xl;
        let u = self.h - t;
        let (ml, mr) = (self.m[i], self.m[i + 1]);
        let (yl, yr) = (self.values[i], self.values[i + 1]);
        (ml * u * u * u + mr * t * t * t) / (6.0 * self.h)
            + (yl / self.h - ml * self.h / 6.0) * u
            + (yr / self.h - mr * self.h / 6.0) * t
    }
}
