//! Kernel of the corners process with a fixed top row (uniform Gelfand-Tsetlin
//! pattern below `x^(m)`).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fixed_start::{double_integral, SplitIntegrand};
use super::{Configuration, KernelQuery};
use crate::contours::{ContourSpec, Estimate, QuadratureSettings};
use crate::eynard_mehta::phi_conv;
use crate::error::{Error, Result};
use crate::special_fns::{factorial, hermite_eval, ln_factorial};

fn validate(cfg: &Configuration, q: &KernelQuery) -> Result<usize> {
    let m = cfg.level();
    if q.n1 < 1 || q.n1 + 1 > m || q.n2 < 1 || q.n2 > m {
        return Err(Error::InvalidLevels(format!(
            "fixed-top kernel needs 1 <= n1 <= m-1 and 1 <= n2 <= m (m = {m}), got ({}, {})",
            q.n1, q.n2
        )));
    }
    Ok(m)
}

/// Fixed-top kernel `K^(n1, x1; n2, x2)` as a double closed-contour integral.
///
/// The z-contour encloses every `x_k >= x1`, and also `x2` whenever `x2 >= x1`
/// so that the residue at `w = z` reproduces the `-phi` term. The w-integral
/// around `x2` is done in divided-difference form.
pub fn eval_metcalfe(cfg: &Configuration, q: &KernelQuery, quad: &QuadratureSettings) -> Result<Estimate> {
    let m = validate(cfg, q)?;
    let xs = cfg.values();
    let x2_inside = q.x2 >= q.x1;
    let mut below: Vec<f64> = xs.iter().cloned().filter(|&x| x < q.x1).collect();
    let mut enclosed: Vec<f64> = xs.iter().cloned().filter(|&x| x >= q.x1).collect();
    if x2_inside {
        enclosed.push(q.x2);
    } else {
        below.push(q.x2);
    }
    let gap = below.iter().map(|b| q.x1 - b).fold(f64::INFINITY, f64::min);
    let lo = q.x1 - if gap.is_finite() { gap / 2.0 } else { 1.0 };
    let hi = enclosed.iter().cloned().fold(q.x1, f64::max) + 1.0;
    // A rectangle rather than a circle: adaptive panels on its left edge
    // resolve poles just outside it, which trapezoid sums on a circle cannot.
    let h = 0.5 * (hi - lo);
    let corner = |x: f64, y: f64| Complex64::new(x, y);
    let z_path = ContourSpec::Polyline {
        vertices: vec![corner(lo, -h), corner(hi, -h), corner(hi, h), corner(lo, h), corner(lo, -h)],
    };
    // The w-ring stays strictly inside the rectangle or strictly left of it.
    let w_radius = if x2_inside { 0.5 * (q.x2 - lo).min(hi - q.x2) } else { 0.5 * (lo - q.x2) }.min(0.5);

    let integ = SplitIntegrand {
        u: xs,
        a1: q.x2,
        e1: (m - q.n2 + 1) as f64,
        a2: q.x1,
        e2: (m - q.n1 - 1) as f64,
        quad: 0.0,
        lin: 0.0,
    };
    // 1/(2 pi i)^2 = -1/(4 pi^2)
    let log_pref = Complex64::new(ln_factorial(m - q.n2) - ln_factorial(m - q.n1 - 1) - (4.0 * PI * PI).ln(), PI);
    let est = double_integral(&integ, &z_path, Complex64::from(q.x2), w_radius, 0.0, log_pref, 32, quad, |_| None)?;
    Ok(est)
}

/// Term-sum form: `-phi^(n1,n2)(x1,x2) + sum_i (m-i)! h_{n2-i}(x2)/(n2-i)!
/// sum_k phi^(n1,m)(x1, x_k) rho_i(x_k)`, with `rho_i(x_j) = [h^{-1}]_{ji}` from
/// a direct inverse of `h_{kj} = h_{m-k}(x_j)`.
pub fn eval_metcalfe_termsum(cfg: &Configuration, q: &KernelQuery) -> Result<f64> {
    let m = validate(cfg, q)?;
    let xs = cfg.values();
    let h = DMatrix::from_fn(m, m, |k, j| hermite_eval(m - 1 - k, xs[j]));
    let h_inv = h
        .try_inverse()
        .ok_or(Error::DegenerateConfiguration(xs[0], xs[m - 1]))?;
    let mut total = -phi_conv(q.n1, q.n2, q.x1, q.x2);
    for i in 1..=q.n2 {
        let coeff = factorial(m - i) * hermite_eval(q.n2 - i, q.x2) / factorial(q.n2 - i);
        let inner: f64 = (0..m).map(|k| phi_conv(q.n1, m, q.x1, xs[k]) * h_inv[(k, i - 1)]).sum();
        total += coeff * inner;
    }
    Ok(total)
}
