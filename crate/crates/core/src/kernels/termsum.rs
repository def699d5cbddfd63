use super::{Configuration, KernelQuery};
use crate::contours::QuadratureSettings;
use crate::error::{Error, Result};
use crate::eynard_mehta::term_sum;

/// Fixed-start kernel as an explicit finite sum of basis functions.
///
/// Feasible only for small systems: `m <= 6` and `n2 - m <= 8`.
pub fn eval_fixed_start_termsum(cfg: &Configuration, q: &KernelQuery, quad: &QuadratureSettings) -> Result<f64> {
    let m = cfg.level();
    if q.n1 <= m || q.n2 <= m {
        return Err(Error::InvalidLevels(format!(
            "fixed-start kernel needs n1, n2 > m = {m}, got ({}, {})",
            q.n1, q.n2
        )));
    }
    if m > 6 || q.n2 - m > 8 || q.n1 - m > 8 {
        return Err(Error::SizeLimit(format!(
            "term sum supports m <= 6 and n - m <= 8 (m = {m}, n1 = {}, n2 = {})",
            q.n1, q.n2
        )));
    }
    Ok(term_sum(cfg, q, quad)?.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{eval_fixed_start, eval_gue_level_cd};

    fn sign(q: &KernelQuery) -> f64 {
        if (q.n1 + q.n2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn agrees_with_contour_form() {
        let quad = QuadratureSettings::default();
        let cfg = Configuration::new(vec![1.0, -0.5]).unwrap();
        for q in [
            KernelQuery::new(3, 0.2, 3, 0.2),
            KernelQuery::new(3, 0.4, 4, -0.3),
            KernelQuery::new(4, -1.0, 3, 0.9),
            KernelQuery::new(5, 1.3, 3, 1.1),
        ] {
            let t = eval_fixed_start_termsum(&cfg, &q, &quad).unwrap();
            let c = eval_fixed_start(&cfg, &q, &quad).unwrap().value;
            assert!((t - sign(&q) * c.re).abs() < 1e-9 && c.im.abs() < 1e-9, "{q:?}: {t} vs {c}");
        }
    }

    #[test]
    fn empty_start_is_gue() {
        let quad = QuadratureSettings::default();
        let cfg = Configuration::empty();
        for (n, x1, x2) in [(1, 0.0, 0.0), (3, 0.5, -0.2), (5, 1.2, 1.2)] {
            let t = eval_fixed_start_termsum(&cfg, &KernelQuery::new(n, x1, n, x2), &quad).unwrap();
            assert!((t - eval_gue_level_cd(n, x1, x2)).abs() < 1e-10);
        }
    }

    #[test]
    fn size_limits() {
        let quad = QuadratureSettings::default();
        let cfg = Configuration::new(vec![0.0]).unwrap();
        assert!(matches!(
            eval_fixed_start_termsum(&cfg, &KernelQuery::new(2, 0.0, 10, 0.0), &quad),
            Err(Error::SizeLimit(_))
        ));
        assert!(matches!(
            eval_fixed_start_termsum(&cfg, &KernelQuery::new(1, 0.0, 2, 0.0), &quad),
            Err(Error::InvalidLevels(_))
        ));
    }
}
