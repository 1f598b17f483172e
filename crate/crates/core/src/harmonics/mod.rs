//! Ultraspherical polynomials, spherical-harmonic bases for n = 1, 2,
//! eigenspace dimensions, projection kernels and band-limited polynomials.

mod basis;
mod gegenbauer;
mod poly;

pub use basis::{
    eigenspace_dim, eval_harmonic, harmonic_row, lambda_n, projection_kernel,
    projection_kernel_all, space_dim, HarmonicSpace,
};
pub use gegenbauer::{chebyshev_t, gegenbauer, gegenbauer_all, UltrasphericalBasis};
pub use poly::{apply_L_gamma, PolynomialOnSphere};
