//! Numerical toolkit for the rising GUE eigenvalue process started from a
//! fixed configuration: contour-integral kernels, exact samplers, empirical
//! correlation estimators, saddle-point diagnostics and a lozenge-tiling
//! comparison.

pub mod asymptotics;
pub mod contours;
pub mod error;
pub mod eynard_mehta;
pub mod kernels;
pub mod sampling;
pub mod special_fns;
pub mod statistics;
pub mod tiling;

pub use error::{Error, Result};
pub use num_complex::Complex64;
