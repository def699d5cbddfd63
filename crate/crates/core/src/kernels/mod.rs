//! Correlation kernels: the fixed-start GUE kernel (contour and term-sum
//! forms), the fixed-level GUE kernel, sine and extended sine kernels, the
//! fixed-top (Gelfand-Tsetlin) kernel and the bulk rescaling map.

mod config;
mod extended_sine;
mod fixed_start;
mod gue_level;
mod metcalfe;
mod termsum;

use serde::{Deserialize, Serialize};

pub use config::{Configuration, InterlacingError};
pub use extended_sine::{eval_extended_sine, eval_sine, ExtendedSineParams};
pub use fixed_start::{
    eval_fixed_start, eval_fixed_start_bulk, eval_fixed_start_with, BulkEvaluator, BulkQuery,
    FixedStartContours,
};
pub use gue_level::{eval_gue_level, eval_gue_level_cd};
pub use metcalfe::{eval_metcalfe, eval_metcalfe_termsum};
pub use termsum::eval_fixed_start_termsum;

use crate::error::{Error, Result};
use crate::special_fns::semicircle_density;

/// A pair of space-level points at which a kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub n1: usize,
    pub x1: f64,
    pub n2: usize,
    pub x2: f64,
}

impl KernelQuery {
    pub fn new(n1: usize, x1: f64, n2: usize, x2: f64) -> Self {
        KernelQuery { n1, x1, n2, x2 }
    }

    /// The same query with the two points exchanged.
    pub fn swapped(&self) -> Self {
        KernelQuery { n1: self.n2, x1: self.x2, n2: self.n1, x2: self.x1 }
    }
}

/// How bulk offsets are mapped to absolute positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingVariant {
    /// `X sqrt(n) + x / sqrt(n)`, kernel multiplied by `1/sqrt(n)`.
    SqrtN,
    /// `X sqrt(n) + x / (rho_sc(X) sqrt(n))`, kernel multiplied by
    /// `e^{X (x - y) / (2 rho_sc(X))} / (rho_sc(X) sqrt(n))`.
    Density,
}

/// Bulk scaling around energy `x` at scale `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkScaling {
    pub energy: f64,
    pub n: usize,
    pub variant: ScalingVariant,
}

impl BulkScaling {
    pub fn new(energy: f64, n: usize, variant: ScalingVariant) -> Result<Self> {
        if energy.abs() >= 2.0 || !energy.is_finite() {
            return Err(Error::EdgeEnergy(energy));
        }
        if n == 0 {
            return Err(Error::InvalidLevels("bulk scale must be at least 1".into()));
        }
        Ok(BulkScaling { energy, n, variant })
    }

    /// Semicircle density at the energy.
    pub fn density(&self) -> f64 {
        semicircle_density(self.energy)
    }

    /// Absolute position of a bulk offset.
    pub fn position(&self, offset: f64) -> f64 {
        let sn = (self.n as f64).sqrt();
        match self.variant {
            ScalingVariant::SqrtN => self.energy * sn + offset / sn,
            ScalingVariant::Density => self.energy * sn + offset / (self.density() * sn),
        }
    }

    /// Bulk offset of an absolute position (inverse of [`BulkScaling::position`]).
    pub fn offset(&self, position: f64) -> f64 {
        let sn = (self.n as f64).sqrt();
        match self.variant {
            ScalingVariant::SqrtN => sn * (position - self.energy * sn),
            ScalingVariant::Density => self.density() * sn * (position - self.energy * sn),
        }
    }

    /// Factor applied to a raw kernel value `K(p(x1), p(x2))`.
    pub fn kernel_factor(&self, x1: f64, x2: f64) -> f64 {
        let sn = (self.n as f64).sqrt();
        match self.variant {
            ScalingVariant::SqrtN => 1.0 / sn,
            ScalingVariant::Density => {
                let rho = self.density();
                (self.energy * (x1 - x2) / (2.0 * rho)).exp() / (rho * sn)
            }
        }
    }
}

/// Map bulk offsets at the given absolute levels to a kernel query plus the
/// multiplicative transform for the raw kernel value.
pub fn rescale_bulk(s: &BulkScaling, levels: (usize, usize), offsets: (f64, f64)) -> Result<(KernelQuery, f64)> {
    let s = BulkScaling::new(s.energy, s.n, s.variant)?;
    let q = KernelQuery::new(levels.0, s.position(offsets.0), levels.1, s.position(offsets.1));
    Ok((q, s.kernel_factor(offsets.0, offsets.1)))
}

/// Abscissa strictly between the largest of `left` and the smallest of `right`.
///
/// Falls back to one unit beyond the populated side, or `fallback` if both are empty.
pub(crate) fn separating_abscissa(left: &[f64], right: &[f64], fallback: f64) -> f64 {
    let lo = left.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let hi = right.iter().cloned().fold(f64::INFINITY, f64::min);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo.max(fallback - 1.0) + 1.0,
        (false, true) => hi.min(fallback + 1.0) - 1.0,
        (false, false) => fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn density_scaling_arithmetic() {
        let s = BulkScaling::new(0.0, 100, ScalingVariant::Density).unwrap();
        let (q, factor) = rescale_bulk(&s, (3, 3), (1.0, 0.0)).unwrap();
        assert!((q.x1 - PI / 10.0).abs() < 1e-14);
        assert_eq!(q.x2, 0.0);
        assert!((factor - PI / 10.0).abs() < 1e-14);
        assert!((s.offset(q.x1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn edge_energy_rejected() {
        assert!(matches!(BulkScaling::new(2.0, 10, ScalingVariant::SqrtN), Err(Error::EdgeEnergy(_))));
        assert!(matches!(BulkScaling::new(-2.5, 10, ScalingVariant::Density), Err(Error::EdgeEnergy(_))));
    }

    #[test]
    fn abscissa_separates() {
        assert_eq!(separating_abscissa(&[0.0], &[1.0], 0.0), 0.5);
        assert_eq!(separating_abscissa(&[0.0], &[], 0.0), 1.0);
        assert_eq!(separating_abscissa(&[], &[3.0], 0.0), 0.0);
        assert_eq!(separating_abscissa(&[], &[], 2.0), 2.0);
    }
}
