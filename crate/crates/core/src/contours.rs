//! Complex-path quadrature: trapezoid rule on circles, adaptive Gauss-Legendre
//! on segments, truncated vertical lines and ray pairs, and iterated double
//! integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A one-dimensional integration path in the complex plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContourSpec {
    /// Circle `center + radius e^{i theta}`; `orientation = +1` is counterclockwise.
    Circle { center: Complex64, radius: f64, orientation: i8 },
    /// Upward line `b + i t`, `|t| <= half_height`.
    VerticalLine { abscissa: f64, half_height: f64 },
    /// Upward pair of rays `b + i t` with `inner_cut <= |t| <= outer_height`.
    RayPair { abscissa: f64, inner_cut: f64, outer_height: f64 },
    /// Straight segment from `from` to `to`.
    Segment { from: Complex64, to: Complex64 },
    /// Chain of straight segments through the given vertices.
    Polyline { vertices: Vec<Complex64> },
}

impl ContourSpec {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        ContourSpec::Circle { center, radius, orientation: 1 }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::ContourIntersection(msg.to_string()));
        match self {
            ContourSpec::Circle { radius, orientation, .. } => {
                if !(*radius > 0.0) {
                    return bad("circle radius must be positive");
                }
                if orientation.abs() != 1 {
                    return bad("circle orientation must be +1 or -1");
                }
            }
            ContourSpec::VerticalLine { half_height, .. } => {
                if !(*half_height > 0.0) {
                    return bad("half height must be positive");
                }
            }
            ContourSpec::RayPair { inner_cut, outer_height, .. } => {
                if !(*inner_cut > 0.0 && outer_height > inner_cut) {
                    return bad("ray pair needs 0 < inner_cut < outer_height");
                }
            }
            ContourSpec::Segment { .. } => {}
            ContourSpec::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return bad("polyline needs at least two vertices");
                }
            }
        }
        Ok(())
    }
}

/// Refinement stops once successive estimates differ by less than this
/// multiple of the integral of `|f|`, whatever the requested tolerances.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Node counts and tolerances shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    /// Gauss-Legendre nodes per panel; also the initial trapezoid node count on circles.
    pub nodes_per_panel: usize,
    /// Cap on adaptive panels (and on trapezoid nodes / `nodes_per_panel`).
    pub max_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { nodes_per_panel: 16, max_panels: 4096, abs_tol: 1e-12, rel_tol: 1e-11 }
    }
}

impl QuadratureSettings {
    /// Same settings with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSettings { abs_tol: self.abs_tol / factor, rel_tol: self.rel_tol / factor, ..*self }
    }

    fn accept(&self, err: f64, value: f64) -> bool {
        err <= self.abs_tol.max(self.rel_tol * value)
    }
}

/// A quadrature result with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub abs_err: f64,
    /// Set when a truncated infinite path still carried a non-negligible tail.
    pub truncation_warning: bool,
}

impl Estimate {
    fn new(value: Complex64, abs_err: f64) -> Self {
        Estimate { value, abs_err, truncation_warning: false }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule(n: usize) -> std::borrow::Cow<'static, (Vec<f64>, Vec<f64>)> {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=64).map(|k| gauss_legendre(k.max(1))).collect());
    if n <= 64 {
        std::borrow::Cow::Borrowed(&rules[n])
    } else {
        std::borrow::Cow::Owned(gauss_legendre(n))
    }
}

fn gl_panel<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    (x, w): &(Vec<f64>, Vec<f64>),
) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let v = f(mid + half * xi);
        s += *wi * v;
        mag += wi * v.norm();
    }
    (s * half, mag * half.abs())
}

/// Adaptive Gauss-Legendre quadrature of a complex function over real panels.
///
/// `breakpoints` must be increasing; each initial panel is bisected until the
/// one-panel and two-panel estimates agree. Panels are summed left to right.
pub fn integrate_real<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breakpoints: &[f64],
    q: &QuadratureSettings,
) -> Result<Estimate> {
    assert!(breakpoints.len() >= 2);
    let r = rule(q.nodes_per_panel.max(4));
    let n = r.as_ref();
    let total_len = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    let mut panels_used = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for win in breakpoints.windows(2) {
        // Depth-first refinement keeps the summation order deterministic.
        let (whole, _) = gl_panel(&mut f, win[0], win[1], n);
        let mut stack = vec![(win[0], win[1], whole)];
        while let Some((a, b, est)) = stack.pop() {
            let m = 0.5 * (a + b);
            let (left, left_mag) = gl_panel(&mut f, a, m, n);
            let (right, right_mag) = gl_panel(&mut f, m, b, n);
            let refined = left + right;
            let diff = (refined - est).norm();
            panels_used += 1;
            let share = (b - a) / total_len;
            let local_tol = (q.abs_tol * share)
                .max(q.rel_tol * refined.norm())
                .max(ROUNDOFF * (left_mag + right_mag));
            if diff <= local_tol || (b - a) < 1e-13 * total_len.max(1.0) {
                total += refined;
                err += diff;
            } else if panels_used > q.max_panels {
                return Err(Error::NonConvergence { last: total + refined, previous: total + est });
            } else {
                stack.push((m, b, right));
                stack.push((a, m, left));
            }
        }
    }
    Ok(Estimate::new(total, err))
}

/// Trapezoid rule on a circle, doubling the node count until successive
/// estimates agree.
pub fn integrate_closed<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    c: &ContourSpec,
    q: &QuadratureSettings,
) -> Result<Estimate> {
    c.validate()?;
    let ContourSpec::Circle { center, radius, orientation } = *c else {
        return Err(Error::ContourIntersection("integrate_closed needs a circle".into()));
    };
    let max_nodes = (q.nodes_per_panel.max(4) * q.max_panels).max(64);
    let mut n = (2 * q.nodes_per_panel).max(8);
    let node = |j: usize, n: usize| {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        (center + radius * e, I * radius * e)
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for j in 0..n {
        let (z, dz) = node(j, n);
        let v = f(z) * dz;
        sum += v;
        mag += v.norm();
    }
    let mut est = sum * (2.0 * PI / n as f64);
    loop {
        let n2 = 2 * n;
        if n2 > max_nodes {
            return Err(Error::NonConvergence { last: est * orientation as f64, previous: est });
        }
        for j in (1..n2).step_by(2) {
            let (z, dz) = node(j, n2);
            let v = f(z) * dz;
            sum += v;
            mag += v.norm();
        }
        let new_est = sum * (2.0 * PI / n2 as f64);
        let diff = (new_est - est).norm();
        n = n2;
        let done = q.accept(diff, new_est.norm()) || diff <= ROUNDOFF * mag * (2.0 * PI / n2 as f64);
        est = new_est;
        if done {
            return Ok(Estimate::new(est * orientation as f64, diff));
        }
    }
}

/// Truncation half-height for a line integrand carrying `e^{z^2/2}` times a
/// polynomial factor of total degree `poly_degree`.
pub fn truncation_height(abscissa: f64, abs_tol: f64, poly_degree: f64) -> f64 {
    let w = -abs_tol.ln();
    let mut h = (2.0 * (abscissa * abscissa / 2.0 + w)).sqrt();
    for _ in 0..2 {
        h = (2.0 * (abscissa * abscissa / 2.0 + w + poly_degree * (1.0 + h).ln())).sqrt();
    }
    h
}

/// Breakpoints of roughly unit spacing on `[a, b]`, refined near zero.
fn unit_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let k = ((b - a).ceil() as usize).clamp(1, 4096);
    (0..=k).map(|j| a + (b - a) * j as f64 / k as f64).collect()
}

/// `int_{b - iH}^{b + iH} f(z) dz` by composite Gauss-Legendre panels.
///
/// Flags a truncation warning when the estimated tail beyond `+-H` exceeds `abs_tol`.
pub fn integrate_vertical<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    line: &ContourSpec,
    q: &QuadratureSettings,
) -> Result<Estimate> {
    line.validate()?;
    let ContourSpec::VerticalLine { abscissa, half_height } = *line else {
        return Err(Error::ContourIntersection("integrate_vertical needs a vertical line".into()));
    };
    // Gaussian-type tails beyond H contribute about |f(b +- iH)| / H.
    let tail = (f(Complex64::new(abscissa, half_height)).norm()
        + f(Complex64::new(abscissa, -half_height)).norm())
        / half_height.max(1.0);
    let mut est = integrate_real(
        |t| f(Complex64::new(abscissa, t)) * I,
        &unit_breakpoints(-half_height, half_height),
        q,
    )?;
    est.truncation_warning = tail > q.abs_tol;
    Ok(est)
}

/// Vertical line with the half-height chosen by [`truncation_height`].
pub fn vertical_line(abscissa: f64, q: &QuadratureSettings, poly_degree: f64) -> ContourSpec {
    ContourSpec::VerticalLine {
        abscissa,
        half_height: truncation_height(abscissa, q.abs_tol, poly_degree),
    }
}

fn integrate_segment<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    from: Complex64,
    to: Complex64,
    q: &QuadratureSettings,
) -> Result<Estimate> {
    let d = to - from;
    let len = d.norm();
    if len == 0.0 {
        return Ok(Estimate::new(Complex64::new(0.0, 0.0), 0.0));
    }
    let pieces = (len.ceil() as usize).clamp(1, 4096);
    let bps: Vec<f64> = (0..=pieces).map(|j| j as f64 / pieces as f64).collect();
    integrate_real(|s| f(from + d * s) * d, &bps, q)
}

/// Integral of `f` along any [`ContourSpec`].
pub fn integrate<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    c: &ContourSpec,
    q: &QuadratureSettings,
) -> Result<Estimate> {
    c.validate()?;
    match c {
        ContourSpec::Circle { .. } => integrate_closed(f, c, q),
        ContourSpec::VerticalLine { .. } => integrate_vertical(f, c, q),
        ContourSpec::RayPair { abscissa, inner_cut, outer_height } => {
            let b = *abscissa;
            let lower = integrate_real(
                |t| f(Complex64::new(b, t)) * I,
                &unit_breakpoints(-outer_height, -inner_cut),
                q,
            )?;
            let upper = integrate_real(
                |t| f(Complex64::new(b, t)) * I,
                &unit_breakpoints(*inner_cut, *outer_height),
                q,
            )?;
            Ok(Estimate::new(lower.value + upper.value, lower.abs_err + upper.abs_err))
        }
        ContourSpec::Segment { from, to } => integrate_segment(&mut f, *from, *to, q),
        ContourSpec::Polyline { vertices } => {
            let mut total = Estimate::new(Complex64::new(0.0, 0.0), 0.0);
            for w in vertices.windows(2) {
                let e = integrate_segment(&mut f, w[0], w[1], q)?;
                total.value += e.value;
                total.abs_err += e.abs_err;
            }
            Ok(total)
        }
    }
}

fn check_disjoint(a: &ContourSpec, b: &ContourSpec) -> Result<()> {
    use ContourSpec::*;
    match (a, b) {
        (Circle { center, radius, .. }, VerticalLine { abscissa, .. })
        | (VerticalLine { abscissa, .. }, Circle { center, radius, .. })
        | (Circle { center, radius, .. }, RayPair { abscissa, .. })
        | (RayPair { abscissa, .. }, Circle { center, radius, .. }) => {
            if (center.re - abscissa).abs() <= *radius {
                return Err(Error::ContourIntersection(format!(
                    "circle around {center} of radius {radius} reaches the line Re z = {abscissa}"
                )));
            }
        }
        (Circle { center: c1, radius: r1, .. }, Circle { center: c2, radius: r2, .. }) => {
            let d = (c1 - c2).norm();
            if d <= r1 + r2 && d >= (r1 - r2).abs() {
                return Err(Error::ContourIntersection(format!(
                    "circles around {c1} and {c2} intersect"
                )));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Iterated integral `int_{w_contour} dw int_{z_contour} dz f(z, w)`.
///
/// The inner (z) integral uses tolerances ten times tighter than the outer one.
pub fn integrate_double<F: FnMut(Complex64, Complex64) -> Complex64>(
    mut f: F,
    z_contour: &ContourSpec,
    w_contour: &ContourSpec,
    q: &QuadratureSettings,
) -> Result<Estimate> {
    z_contour.validate()?;
    w_contour.validate()?;
    check_disjoint(z_contour, w_contour)?;
    let inner_q = q.tightened(10.0);
    let mut inner_err: Option<Error> = None;
    let mut inner_abs_err = 0.0_f64;
    let outer = integrate(
        |w| {
            if inner_err.is_some() {
                return Complex64::new(0.0, 0.0);
            }
            match integrate(|z| f(z, w), z_contour, &inner_q) {
                Ok(e) => {
                    inner_abs_err = inner_abs_err.max(e.abs_err);
                    e.value
                }
                Err(e) => {
                    inner_err = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        w_contour,
        q,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(Estimate::new(outer.value, outer.abs_err + inner_abs_err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::{factorial, hermite_eval};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn residue_exactness() {
        let q = QuadratureSettings::default();
        let a = c(0.3, -0.2);
        for k in -3i32..=3 {
            let e = integrate_closed(|z| (z - a).powi(k), &ContourSpec::circle(a, 0.7), &q).unwrap();
            let expected = if k == -1 { c(0.0, 2.0 * PI) } else { c(0.0, 0.0) };
            assert!((e.value - expected).norm() < 1e-12, "k={k}");
        }
        let e = integrate_closed(|z| z.exp(), &ContourSpec::circle(c(1.0, 1.0), 2.0), &q).unwrap();
        assert!(e.value.norm() < 1e-12);
    }

    #[test]
    fn hermite_contour_form() {
        let q = QuadratureSettings::default();
        let (n, x) = (5usize, 1.3);
        let e = integrate_closed(
            |t| (t * x - t * t / 2.0).exp() / t.powi(n as i32 + 1),
            &ContourSpec::circle(c(0.0, 0.0), 1.0),
            &q,
        )
        .unwrap();
        let v = e.value * factorial(n) / c(0.0, 2.0 * PI);
        assert!((v.re - hermite_eval(n, x)).abs() < 1e-8 && v.im.abs() < 1e-8);
    }

    #[test]
    fn gaussian_line_integral() {
        let q = QuadratureSettings::default();
        for b in [0.5, 1.5] {
            let line = vertical_line(b, &q, 0.0);
            let e = integrate_vertical(|z| (z * z / 2.0).exp(), &line, &q).unwrap();
            assert!((e.value - c(0.0, (2.0 * PI).sqrt())).norm() < 1e-10, "b={b}");
            assert!(!e.truncation_warning);
        }
        let line = vertical_line(0.0, &q, 0.0);
        assert_eq!(integrate_vertical(|_| c(0.0, 0.0), &line, &q).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn truncation_warning_on_short_line() {
        let q = QuadratureSettings::default();
        let line = ContourSpec::VerticalLine { abscissa: 0.0, half_height: 2.0 };
        assert!(integrate_vertical(|z| (z * z / 2.0).exp(), &line, &q).unwrap().truncation_warning);
    }

    #[test]
    fn double_integral_cases() {
        let q = QuadratureSettings::default();
        let line = vertical_line(0.0, &q, 2.0);
        let circle = ContourSpec::circle(c(1.0, 0.0), 0.1);
        let e = integrate_double(|z, w| 1.0 / ((z - 2.0) * (w - z)), &line, &circle, &q).unwrap();
        assert!(e.value.norm() < 1e-10);

        let zc = ContourSpec::circle(c(0.0, 0.0), 1.0);
        let wc = ContourSpec::circle(c(5.0, 0.0), 0.5);
        let sep = integrate_double(|z, w| (z * z).exp() / (z - 0.2) * (w * 0.5).cos() / (w - 5.1), &zc, &wc, &q)
            .unwrap();
        let gz = integrate(|z| (z * z).exp() / (z - 0.2), &zc, &q).unwrap().value;
        let hw = integrate(|w| (w * 0.5).cos() / (w - 5.1), &wc, &q).unwrap().value;
        assert!((sep.value - gz * hw).norm() < 1e-10);

        let swapped =
            integrate_double(|w, z| (z * z).exp() / (z - 0.2) * (w * 0.5).cos() / (w - 5.1), &wc, &zc, &q)
                .unwrap();
        assert!((sep.value - swapped.value).norm() < 1e-10);

        let bad = ContourSpec::circle(c(0.05, 0.0), 0.1);
        assert!(matches!(
            integrate_double(|_, _| c(1.0, 0.0), &line, &bad, &q),
            Err(Error::ContourIntersection(_))
        ));
    }

    #[test]
    fn segment_and_polyline() {
        let q = QuadratureSettings::default();
        let seg = ContourSpec::Segment { from: c(0.0, 0.0), to: c(1.0, 1.0) };
        let e = integrate(|z| z * z, &seg, &q).unwrap();
        assert!((e.value - c(1.0, 1.0).powi(3) / 3.0).norm() < 1e-13);
        let poly = ContourSpec::Polyline { vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)] };
        let e = integrate(|z| z * z, &poly, &q).unwrap();
        assert!((e.value - c(1.0, 1.0).powi(3) / 3.0).norm() < 1e-13);
    }
}
