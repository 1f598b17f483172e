//! Dyadic mask pairs, band-limited kernels and low-pass frame operators:
//! the spectral machinery behind reproduction, Bernstein-type ratios and
//! low-pass approximation rates.

mod band;
mod mask;
mod norms;
mod operators;

pub use band::{band_kernel, BandKernel, Envelope};
pub use mask::{build_mask, partition_check, MaskPair};
pub use norms::{poly_sup_norm, zonal_lp_norm};
pub use operators::{
    bernstein_poly_table, dyadic_offset, frame_error_bound, nikolskii_poly_table,
    FrameOperatorSpec,
};
