use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelQuery;
use crate::contours::{integrate, integrate_real, ContourSpec, QuadratureSettings};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Parameter `a` of the extended sine kernel, `Im(a) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedSineParams {
    pub a: Complex64,
}

impl ExtendedSineParams {
    pub fn new(a: Complex64) -> Result<Self> {
        if !(a.im > 0.0) || !a.re.is_finite() {
            return Err(Error::InvalidConfiguration(format!("extended sine parameter needs Im(a) > 0, got {a}")));
        }
        Ok(ExtendedSineParams { a })
    }

    /// The bulk parameter `X/2 + i pi rho_sc(X)`.
    pub fn bulk(energy: f64) -> Result<Self> {
        if energy.abs() >= 2.0 {
            return Err(Error::EdgeEnergy(energy));
        }
        Self::new(Complex64::new(energy / 2.0, PI * crate::special_fns::semicircle_density(energy)))
    }
}

/// `sin(phi (x2 - x1)) / (pi (x2 - x1))`, equal to `phi / pi` on the diagonal.
pub fn eval_sine(phi: f64, x1: f64, x2: f64) -> f64 {
    let d = x2 - x1;
    if d.abs() * phi < 1e-8 {
        // Two-term Taylor expansion of the sinc.
        return phi / PI * (1.0 - (phi * d).powi(2) / 6.0);
    }
    (phi * d).sin() / (PI * d)
}

/// Extended (semi-discrete) sine kernel.
///
/// For `n1 >= n2` this is a segment integral from `conj(a)` to `a`. For
/// `n2 > n1` it is the symmetric limit of the two vertical rays above and
/// below `a`, evaluated in closed form when `x1 = x2` and otherwise on
/// horizontal rays where the integrand decays exponentially.
pub fn eval_extended_sine(p: &ExtendedSineParams, q: &KernelQuery, quad: &QuadratureSettings) -> Result<Complex64> {
    let a = ExtendedSineParams::new(p.a)?.a;
    let k = q.n1 as i64 - q.n2 as i64;
    let d = q.x2 - q.x1;
    let f = |z: Complex64| z.powi(k as i32) * (z * d).exp();
    if k >= 0 {
        let seg = integrate(f, &ContourSpec::Segment { from: a.conj(), to: a }, quad)?;
        return Ok(seg.value / (2.0 * PI * I));
    }
    let m = (-k) as i32;
    let rays = if d == 0.0 {
        // Antiderivatives are explicit; for a simple pole the symmetric limit
        // of log(c + iL) - log(c - iL) is i pi.
        if m == 1 {
            I * (PI - 2.0 * a.arg())
        } else {
            (a.powi(1 - m) - a.conj().powi(1 - m)) / (m - 1) as f64
        }
    } else {
        // Rotate both rays to horizontal ones along which exp(z d) decays;
        // the closing arcs vanish and no pole is crossed.
        let dir = -d.signum();
        let reach = (40.0 + (a.re * d).abs() + m as f64 * (1.0 + a.norm()).ln()) / d.abs();
        let mut bps = vec![0.0];
        let mut t = 0.25 * a.im;
        while t < reach {
            bps.push(t);
            t *= 2.0;
        }
        bps.push(reach);
        let ray = |start: Complex64| {
            integrate_real(|t| f(start + dir * t) * dir, &bps, quad).map(|e| e.value)
        };
        ray(a)? - ray(a.conj())?
    };
    Ok(-rays / (2.0 * PI * I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::factorial;

    fn q(n1: usize, x1: f64, n2: usize, x2: f64) -> KernelQuery {
        KernelQuery::new(n1, x1, n2, x2)
    }

    #[test]
    fn sine_values() {
        assert!((eval_sine(PI, 0.3, 0.3) - 1.0).abs() < 1e-15);
        assert!((eval_sine(PI, 0.0, 0.5) - 2.0 / PI).abs() < 1e-15);
        assert!(eval_sine(2.0, 0.0, PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_equal_level() {
        let p = ExtendedSineParams::new(Complex64::new(0.3, 1.7)).unwrap();
        let v = eval_extended_sine(&p, &q(2, 0.4, 2, 0.4), &QuadratureSettings::default()).unwrap();
        assert!((v.re - 1.7 / PI).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn slope_pi_is_sine_kernel() {
        let p = ExtendedSineParams::new(Complex64::new(0.0, PI)).unwrap();
        for (x1, x2) in [(0.0, 0.5), (-0.7, 1.1), (1.0, -0.25)] {
            let v = eval_extended_sine(&p, &q(1, x1, 1, x2), &QuadratureSettings::default()).unwrap();
            assert!((v.re - eval_sine(PI, x1, x2)).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugated_sine_for_general_a() {
        let a = Complex64::new(0.4, 2.0);
        let p = ExtendedSineParams::new(a).unwrap();
        let (x1, x2) = (0.2, 1.3);
        let v = eval_extended_sine(&p, &q(3, x1, 3, x2), &QuadratureSettings::default()).unwrap();
        let expected = eval_sine(a.im, x1, x2) * (a.re * (x2 - x1)).exp();
        assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn log_branch_closed_form() {
        let a = Complex64::new(0.5, 1.0);
        let p = ExtendedSineParams::new(a).unwrap();
        let v = eval_extended_sine(&p, &q(1, 0.3, 2, 0.3), &QuadratureSettings::default()).unwrap();
        assert!((v.re - (-0.5 + a.arg() / PI)).abs() < 1e-7, "{v}");
        assert!(v.im.abs() < 1e-7);
        // On the imaginary axis the symmetric limit vanishes.
        let p0 = ExtendedSineParams::new(Complex64::new(0.0, 1.0)).unwrap();
        let v0 = eval_extended_sine(&p0, &q(1, 0.3, 2, 0.3), &QuadratureSettings::default()).unwrap();
        assert!(v0.norm() < 1e-7);
    }

    /// Ray pair = full line minus the segment; the full line follows from residues.
    #[test]
    fn ray_pair_matches_residue_oracle() {
        let quad = QuadratureSettings::default();
        for (a, n1, n2, d) in [
            (Complex64::new(0.6, 0.9), 0usize, 2usize, 1.3f64),
            (Complex64::new(-0.4, 1.5), 1, 3, 0.7),
            (Complex64::new(0.3, 1.2), 0, 1, -0.8),
            (Complex64::new(-0.5, 0.8), 2, 5, -1.1),
        ] {
            let k = n2 - n1;
            let res = d.powi(k as i32 - 1) / factorial(k - 1);
            let line = match (d > 0.0, a.re > 0.0) {
                (true, true) => 2.0 * PI * I * res,
                (false, false) => -2.0 * PI * I * res,
                _ => Complex64::new(0.0, 0.0),
            };
            let f = |z: Complex64| z.powi(-(k as i32)) * (z * d).exp();
            let seg = integrate(f, &ContourSpec::Segment { from: a.conj(), to: a }, &quad).unwrap().value;
            let expected = -(line - seg) / (2.0 * PI * I);
            let p = ExtendedSineParams::new(a).unwrap();
            let v = eval_extended_sine(&p, &q(n1, 0.0, n2, d), &quad).unwrap();
            assert!((v - expected).norm() < 1e-7, "a={a} k={k} d={d}: {v} vs {expected}");
        }
    }

    #[test]
    fn rejects_real_parameter() {
        assert!(ExtendedSineParams::new(Complex64::new(1.0, 0.0)).is_err());
        assert!(ExtendedSineParams::bulk(2.0).is_err());
    }
}
