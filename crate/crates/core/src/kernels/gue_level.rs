use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contours::{integrate_double, truncation_height, ContourSpec, QuadratureSettings};
use crate::error::{Error, Result};
use crate::special_fns::hermite_functions;

/// Above this size the double contour loses too many digits to cancellation
/// and [`eval_gue_level`] switches to the Christoffel-Darboux sum.
const CONTOUR_MAX_N: usize = 48;

/// Fixed-level GUE kernel `K(n, x1; n, x2)`.
///
/// Uses the double contour integral over a circle of radius `max(1, sqrt n)`
/// and the line one unit to its right. The gauge is that of the contour
/// formula, namely `sum_{j<n} h_j(x1) h_j(x2) e^{-x1^2/2} / (sqrt(2 pi) j!)`.
pub fn eval_gue_level(n: usize, x1: f64, x2: f64, quad: &QuadratureSettings) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidLevels("fixed-level GUE kernel needs n >= 1".into()));
    }
    if n > CONTOUR_MAX_N {
        return Ok(Complex64::from(eval_gue_level_cd(n, x1, x2)));
    }
    let r = (n as f64).sqrt().max(1.0);
    let s = r + 1.0;
    let nf = n as f64;
    let w_circle = ContourSpec::circle(Complex64::new(0.0, 0.0), r);
    let line = ContourSpec::VerticalLine {
        abscissa: s,
        half_height: truncation_height(s - x2, quad.abs_tol * 1e-2, nf + 1.0) + 2.0,
    };
    let f = |z: Complex64, w: Complex64| {
        let e = (z - x2).powi(2) / 2.0 - (w - x1).powi(2) / 2.0 + nf * (z.ln() - w.ln());
        e.exp() / (w - z)
    };
    let est = integrate_double(f, &line, &w_circle, quad)?;
    Ok(est.value / (4.0 * PI * PI))
}

/// Christoffel-Darboux form of [`eval_gue_level`], in the same gauge, using the
/// normalized Hermite-function recurrence.
pub fn eval_gue_level_cd(n: usize, x1: f64, x2: f64) -> f64 {
    let p1 = hermite_functions(n, x1);
    let p2 = hermite_functions(n, x2);
    let s: f64 = p1.iter().zip(&p2).map(|(a, b)| a * b).sum();
    s * ((x2 * x2 - x1 * x1) / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::{factorial, hermite_eval, SQRT_2PI};

    #[test]
    fn level_one_is_gaussian_density() {
        let q = QuadratureSettings::default();
        let v = eval_gue_level(1, 0.0, 0.0, &q).unwrap();
        assert!((v.re - 1.0 / SQRT_2PI).abs() < 1e-9, "{v}");
        assert!((eval_gue_level_cd(1, 0.0, 0.0) - 1.0 / SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn contour_matches_hermite_sum() {
        let q = QuadratureSettings::default();
        for (n, x1, x2) in [(2, 0.3, -0.4), (4, 1.1, 0.2), (7, -0.5, 0.9)] {
            let direct: f64 = (0..n)
                .map(|j| hermite_eval(j, x1) * hermite_eval(j, x2) / factorial(j))
                .sum::<f64>()
                * (-x1 * x1 / 2.0).exp()
                / SQRT_2PI;
            let v = eval_gue_level(n, x1, x2, &q).unwrap();
            assert!((v.re - direct).abs() < 1e-8 && v.im.abs() < 1e-8, "n={n}: {v} vs {direct}");
            assert!((eval_gue_level_cd(n, x1, x2) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_positive_and_counts_particles() {
        let n = 6;
        let h = 0.01;
        let total: f64 = (-1500..=1500).map(|i| eval_gue_level_cd(n, i as f64 * h, i as f64 * h) * h).sum();
        assert!((total - n as f64).abs() < 1e-8);
        for i in -50..=50 {
            assert!(eval_gue_level_cd(n, i as f64 * 0.2, i as f64 * 0.2) > 0.0);
        }
    }

    #[test]
    fn large_n_bulk_diagonal() {
        let n = 200;
        let rho = 1.0 / PI;
        let d = eval_gue_level_cd(n, 0.0, 0.0) / (rho * (n as f64).sqrt());
        assert!((d - 1.0).abs() < 0.05, "{d}");
    }
}
