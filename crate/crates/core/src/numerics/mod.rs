//! Shared numeric building blocks: special functions, Gauss rules on [−1,1],
//! uniform-grid cubic splines and small least-squares fits.

pub mod fit;
pub mod gauss;
pub mod special;
pub mod spline;

pub use fit::{normal_equations_fit, weighted_line_fit, LineFit};
pub use gauss::{gauss_jacobi, gauss_legendre, GaussRule};
pub use special::{
    bessel_i_ladder, binomial_f64, gamma_ratio, hyp2f1, ln_bessel_i, ln_gamma, ln_gamma_signed,
};
pub use spline::CubicSpline;

/// Compensated (Kahan) summation; used where large cancellation meets long sums.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Dot product with compensated accumulation.
pub fn kahan_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    kahan_sum(a.iter().zip(b).map(|(x, y)| x * y))
}
