//! Kernel networks on the sphere: interpolation with smoothed collocation
//! matrices, quasi-interpolation through positive quadrature, coefficient
//! stability ratios, and Bessel-potential norms of network functions.

mod interp;
mod net;
mod quasi;
mod stability;

pub use interp::{interpolate, smoothed_matrix, CondEstimates, InterpolationSystem};
pub use net::{network_lp_norm, sobolev_norm, SbfNetwork};
pub use quasi::{convolve_poly, inv_convolve_poly, quasi_interpolate};
pub use stability::{coefficient_ratio, stability_ratio, StabilityReport};
