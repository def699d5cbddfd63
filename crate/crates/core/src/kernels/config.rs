use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fns::semicircle_quantile;

/// A strictly decreasing list of real positions; its length is the level `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Configuration {
    values: Vec<f64>,
}

/// Why two configurations fail to interlace.
#[derive(Debug, Clone, PartialEq)]
pub enum InterlacingError {
    Length { lower: usize, upper: usize },
    Order { index: usize },
}

impl Configuration {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("non-finite entry {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfiguration(format!(
                "entries must be strictly decreasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Configuration { values })
    }

    /// Sorts into decreasing order first; still rejects repeated entries.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn empty() -> Self {
        Configuration { values: Vec::new() }
    }

    /// `x_r = sqrt(m) F^{-1}((m - r + 1/2) / m)` for the semicircle CDF `F`.
    pub fn semicircle_quantiles(m: usize) -> Self {
        let sm = (m as f64).sqrt();
        let values =
            (1..=m).map(|r| sm * semicircle_quantile((m - r) as f64 / m as f64 + 0.5 / m as f64)).collect();
        Configuration { values }
    }

    pub fn level(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `self ≺ upper`: `upper_i >= self_i >= upper_{i+1}`.
    pub fn check_interlaces(&self, upper: &Configuration) -> std::result::Result<(), InterlacingError> {
        if upper.level() != self.level() + 1 {
            return Err(InterlacingError::Length { lower: self.level(), upper: upper.level() });
        }
        for (i, x) in self.values.iter().enumerate() {
            if !(upper.values[i] >= *x && *x >= upper.values[i + 1]) {
                return Err(InterlacingError::Order { index: i });
            }
        }
        Ok(())
    }

    pub fn interlaces(&self, upper: &Configuration) -> bool {
        self.check_interlaces(upper).is_ok()
    }

    /// Interlacing up to an absolute slack, for numerically computed spectra.
    pub fn interlaces_within(&self, upper: &Configuration, tol: f64) -> bool {
        upper.level() == self.level() + 1
            && self
                .values
                .iter()
                .enumerate()
                .all(|(i, x)| upper.values[i] + tol >= *x && *x + tol >= upper.values[i + 1])
    }

    /// Smallest gap between consecutive entries (infinite for `m < 2`).
    pub fn min_gap(&self) -> f64 {
        self.values.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for Configuration {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Configuration::new(v)
    }
}

impl From<Configuration> for Vec<f64> {
    fn from(c: Configuration) -> Self {
        c.values
    }
}
