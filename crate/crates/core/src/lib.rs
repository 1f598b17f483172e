//! Scattered-data approximation on the unit n-sphere by spherical basis
//! function networks: zonal kernels and their ultraspherical coefficients,
//! multiscale frame operators, positive-weight quadrature, interpolation and
//! quasi-interpolation, and measurement harnesses for stability ratios,
//! Bernstein-type inequalities and approximation rates.

pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod frames;
pub mod kernels;
pub mod network;
pub mod numerics;
pub mod quadrature;

pub use error::{Error, Result};
