//! The fixed-start kernel as a double contour integral.
//!
//! With `G(z) = (z-a2)^{e2} e^{c z^2/2 + l z} / prod(z-u_r)` and
//! `F(w) = e^{-c w^2/2 - l w} prod(w-u_r) / (w-a1)^{e1}`, the kernel is a
//! prefactor times `int dz oint dw G(z) F(w) / (w - z)` with a small circle
//! around `a1`. Because `F` is analytic away from `a1`, the inner integral
//! equals `oint_C (F(w) - F(z)) / (w - z) dw` for *any* loop `C` around `a1`,
//! whether or not the z-path crosses it. The divided difference is smooth, so
//! the trapezoid rule on `C` stays spectrally accurate, and `G(z) F(z)` is the
//! explicit rational function `(z-a2)^{e2} / (z-a1)^{e1}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{separating_abscissa, Configuration, KernelQuery};
use crate::asymptotics::{find_critical_point, ActionParams};
use crate::contours::{integrate, truncation_height, ContourSpec, Estimate, QuadratureSettings};
use crate::error::{Error, Result};
use crate::special_fns::ln_factorial;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `sum_r ln(z - u_r)` modulo `2 pi i`, taking one logarithm per block of eight factors.
pub(crate) fn log_prod(z: Complex64, u: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for chunk in u.chunks(8) {
        let mut p = Complex64::new(1.0, 0.0);
        for &ur in chunk {
            p *= z - ur;
        }
        acc += p.ln();
    }
    acc
}

/// The factorized integrand `G(z) F(w) / (w - z)`.
pub(super) struct SplitIntegrand<'a> {
    pub u: &'a [f64],
    pub a1: f64,
    pub e1: f64,
    pub a2: f64,
    pub e2: f64,
    pub quad: f64,
    pub lin: f64,
}

impl SplitIntegrand<'_> {
    fn log_f_base(&self, w: Complex64) -> Complex64 {
        -self.quad * w * w / 2.0 - self.lin * w + log_prod(w, self.u)
    }

    fn log_f(&self, w: Complex64, base: Complex64) -> Complex64 {
        base - self.e1 * (w - self.a1).ln()
    }

    fn log_g(&self, z: Complex64) -> Complex64 {
        let zero = if self.e2 == 0.0 { Complex64::new(0.0, 0.0) } else { self.e2 * (z - self.a2).ln() };
        self.quad * z * z / 2.0 + self.lin * z - log_prod(z, self.u) + zero
    }

    fn log_r(&self, z: Complex64) -> Complex64 {
        let zero = if self.e2 == 0.0 { Complex64::new(0.0, 0.0) } else { self.e2 * (z - self.a2).ln() };
        zero - self.e1 * (z - self.a1).ln()
    }
}

/// Trapezoid nodes on the w-circle with `F` values scaled by `exp(-shift)`.
struct Ring {
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    f_scaled: Vec<Complex64>,
    shift: f64,
}

fn ring_nodes(center: Complex64, radius: f64, n: usize, phase: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    (0..n)
        .map(|j| {
            let e = Complex64::from_polar(1.0, phase + 2.0 * PI * j as f64 / n as f64);
            (center + radius * e, I * radius * e * (2.0 * PI / n as f64))
        })
        .unzip()
}

impl Ring {
    fn new(nodes: Vec<Complex64>, weights: Vec<Complex64>, log_f: Vec<Complex64>) -> Self {
        let shift = log_f.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let f_scaled = log_f.iter().map(|l| (l - shift).exp()).collect();
        Ring { nodes, weights, f_scaled, shift }
    }

    /// `G(z) sum_j w_j F(w_j)/(w_j - z) - R(z) sum_j w_j/(w_j - z)` with the prefactor folded in.
    fn z_integrand(&self, log_g: Complex64, log_r: Complex64, z: Complex64) -> Complex64 {
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s0 = Complex64::new(0.0, 0.0);
        for ((w, om), f) in self.nodes.iter().zip(&self.weights).zip(&self.f_scaled) {
            let d = om / (w - z);
            s1 += d * f;
            s0 += d;
        }
        (log_g + self.shift).exp() * s1 - log_r.exp() * s0
    }
}

/// Optional overrides of the contour choices for the fixed-start kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedStartContours {
    /// Abscissa `b` of the z-line.
    pub abscissa: Option<f64>,
    /// Radius of the w-circle around `x1`.
    pub w_radius: Option<f64>,
}

fn validate_levels(m: usize, q: &KernelQuery) -> Result<()> {
    if q.n1 <= m || q.n2 <= m {
        return Err(Error::InvalidLevels(format!(
            "fixed-start kernel needs n1, n2 > m = {m}, got ({}, {})",
            q.n1, q.n2
        )));
    }
    Ok(())
}

/// Default abscissa: centred in the pole-free gap separating
/// `{x_r <= x2} ∪ {x1 if x1 <= x2}` from the remaining poles.
pub(crate) fn default_abscissa(cfg: &Configuration, q: &KernelQuery) -> f64 {
    let mut left: Vec<f64> = cfg.values().iter().cloned().filter(|&x| x <= q.x2).collect();
    let mut right: Vec<f64> = cfg.values().iter().cloned().filter(|&x| x > q.x2).collect();
    if q.x1 <= q.x2 {
        left.push(q.x1);
    } else {
        right.push(q.x1);
    }
    separating_abscissa(&left, &right, q.x2 + 1.0)
}

/// Fixed-start kernel `K_{x^(m)}(n1, x1; n2, x2)` with default contours.
pub fn eval_fixed_start(cfg: &Configuration, q: &KernelQuery, quad: &QuadratureSettings) -> Result<Estimate> {
    eval_fixed_start_with(cfg, q, &FixedStartContours::default(), quad)
}

/// Fixed-start kernel with explicit contour overrides.
pub fn eval_fixed_start_with(
    cfg: &Configuration,
    q: &KernelQuery,
    contours: &FixedStartContours,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    let m = cfg.level();
    validate_levels(m, q)?;
    let big_n1 = q.n1 - m;
    let big_n2 = q.n2 - m - 1;
    let integrand = SplitIntegrand {
        u: cfg.values(),
        a1: q.x1,
        e1: (big_n1 + 1) as f64,
        a2: q.x2,
        e2: big_n2 as f64,
        quad: 1.0,
        lin: 0.0,
    };
    let b = contours.abscissa.unwrap_or_else(|| default_abscissa(cfg, q));
    if cfg.values().contains(&b) || b == q.x1 {
        return Err(Error::ContourIntersection(format!("abscissa {b} passes through a pole")));
    }
    let radius = contours.w_radius.unwrap_or_else(|| ((big_n1 + 1) as f64).sqrt().clamp(0.75, 4.0));
    let degree = (big_n2 + m + big_n1 + 1) as f64;
    let line = ContourSpec::VerticalLine {
        abscissa: b,
        half_height: truncation_height(b, quad.abs_tol, degree).max(2.0 * b.abs() + 6.0),
    };
    // -1/(2 pi i)^2 = 1/(4 pi^2)
    let log_pref = Complex64::from(ln_factorial(big_n1) - ln_factorial(big_n2) - (4.0 * PI * PI).ln());
    let n_start = (2 * (big_n1 + m) + 32).next_power_of_two();
    double_integral(&integrand, &line, Complex64::from(q.x1), radius, 0.0, log_pref, n_start, quad, |_| None)
}

/// Runs the split double integral, doubling the ring size until two estimates agree.
#[allow(clippy::too_many_arguments)]
pub(super) fn double_integral<'c>(
    integ: &SplitIntegrand<'_>,
    z_path: &ContourSpec,
    center: Complex64,
    radius: f64,
    phase: f64,
    log_pref: Complex64,
    n_start: usize,
    quad: &QuadratureSettings,
    cached_base: impl Fn(usize) -> Option<&'c [Complex64]>,
) -> Result<Estimate> {
    let eval = |n: usize, base: Option<&[Complex64]>| -> Result<Estimate> {
        let (nodes, weights) = ring_nodes(center, radius, n, phase);
        let log_f: Vec<Complex64> = match base {
            Some(b) => nodes.iter().zip(b).map(|(w, lb)| integ.log_f(*w, *lb)).collect(),
            None => nodes.iter().map(|w| integ.log_f(*w, integ.log_f_base(*w))).collect(),
        };
        let ring = Ring::new(nodes, weights, log_f);
        integrate(
            |z| ring.z_integrand(integ.log_g(z) + log_pref, integ.log_r(z) + log_pref, z),
            z_path,
            quad,
        )
    };
    let mut n = n_start.max(16);
    let mut prev = eval(n, cached_base(n))?;
    let mut prev_diff = f64::INFINITY;
    loop {
        let n2 = 2 * n;
        let cur = eval(n2, cached_base(n2))?;
        let diff = (cur.value - prev.value).norm();
        // Stagnation means the ring is resolved and the z-quadrature noise
        // floor dominates; report that floor as the error.
        let stalled = diff >= 0.5 * prev_diff && diff <= 1e-6 * (1.0 + cur.value.norm());
        if diff <= quad.abs_tol.max(quad.rel_tol * cur.value.norm()) * 10.0 || stalled {
            return Ok(Estimate { abs_err: cur.abs_err + diff, ..cur });
        }
        prev_diff = diff;
        if n2 >= 1 << 16 {
            return Err(Error::NonConvergence { last: cur.value, previous: prev.value });
        }
        n = n2;
        prev = cur;
    }
}

/// A query in bulk coordinates: levels `m + T + n_i`, positions `X sqrt(m) + x_i / sqrt(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkQuery {
    pub n1: i64,
    pub x1: f64,
    pub n2: i64,
    pub x2: f64,
}

/// Evaluates `(1/sqrt m) K_{x^(m)}(m+T+n1, X sqrt m + x1/sqrt m; m+T+n2, X sqrt m + x2/sqrt m)`
/// in the variables `z = X sqrt m + (T/sqrt m) zeta`.
///
/// The zeta-path runs along the rays through the critical point `z0` of the
/// action and its conjugate, joined through the real axis in the gap that
/// separates the poles as the vertical line would. The w-circle is centred at
/// the origin with radius `|z0|`. Logarithms of the configuration product on
/// that circle are cached per ring size, so a grid of queries at fixed `(X, T)`
/// shares most of the work.
pub struct BulkEvaluator {
    u: Vec<f64>,
    m: usize,
    t: usize,
    energy: f64,
    s: f64,
    z0: Complex64,
    radius: f64,
    phase: f64,
    quad: QuadratureSettings,
    bases: Vec<OnceLock<Vec<Complex64>>>,
}

const RING_SIZES: usize = 8;

impl BulkEvaluator {
    pub fn new(cfg: &Configuration, energy: f64, t: usize, quad: &QuadratureSettings) -> Result<Self> {
        let params = ActionParams::new(cfg.clone(), energy, t)?;
        let saddle = find_critical_point(&params, 1e-12)?;
        Ok(Self::with_saddle(cfg, energy, t, saddle.z0, quad))
    }

    /// Uses the supplied point in place of the computed critical point.
    pub fn with_saddle(cfg: &Configuration, energy: f64, t: usize, z0: Complex64, quad: &QuadratureSettings) -> Self {
        let m = cfg.level();
        let sm = (m as f64).sqrt();
        let s = t as f64 / sm;
        let u = cfg.values().iter().map(|x| (x - energy * sm) / s).collect();
        let n0 = Self::ring_size(0, t);
        BulkEvaluator {
            u,
            m,
            t,
            energy,
            s,
            z0,
            radius: z0.norm(),
            phase: z0.arg() + PI / n0 as f64,
            quad: *quad,
            bases: (0..RING_SIZES).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn saddle(&self) -> Complex64 {
        self.z0
    }

    fn ring_size(k: usize, t: usize) -> usize {
        ((16.0 * (t as f64).sqrt()) as usize + 64).next_power_of_two() << k
    }

    fn base(&self, n: usize) -> Option<&[Complex64]> {
        let k = (0..RING_SIZES).find(|&k| Self::ring_size(k, self.t) == n)?;
        let v = self.bases[k].get_or_init(|| {
            let (nodes, _) = ring_nodes(Complex64::new(0.0, 0.0), self.radius, n, self.phase);
            let probe = SplitIntegrand { u: &self.u, a1: 0.0, e1: 0.0, a2: 0.0, e2: 0.0, quad: self.s * self.s, lin: self.energy * self.t as f64 };
            nodes.iter().map(|w| probe.log_f_base(*w)).collect()
        });
        Some(v.as_slice())
    }

    pub fn eval(&self, bq: &BulkQuery) -> Result<Estimate> {
        let t = self.t as i64;
        if t + bq.n1 < 1 || t + bq.n2 < 1 {
            return Err(Error::InvalidLevels(format!("levels m+T+n must exceed m, got offsets ({}, {})", bq.n1, bq.n2)));
        }
        let tf = self.t as f64;
        let (a1, a2) = (bq.x1 / tf, bq.x2 / tf);
        if a1.abs() >= self.radius {
            return Err(Error::ContourIntersection("w-circle does not enclose x1/T".into()));
        }
        let integ = SplitIntegrand {
            u: &self.u,
            a1,
            e1: (t + bq.n1 + 1) as f64,
            a2,
            e2: (t + bq.n2 - 1) as f64,
            quad: self.s * self.s,
            lin: self.energy * tf,
        };
        let mut left: Vec<f64> = self.u.iter().cloned().filter(|&x| x <= a2).collect();
        let mut right: Vec<f64> = self.u.iter().cloned().filter(|&x| x > a2).collect();
        if a1 <= a2 {
            left.push(a1);
        } else {
            right.push(a1);
        }
        let b = separating_abscissa(&left, &right, a2 + 0.5);
        let far = self.far_radius(&integ);
        let z0 = self.z0;
        let path = ContourSpec::Polyline {
            vertices: vec![(far * z0).conj(), z0.conj(), Complex64::from(b), z0, far * z0],
        };
        let log_pref = Complex64::from(
            (bq.n2 - bq.n1 - 1) as f64 * self.s.ln() - 0.5 * (self.m as f64).ln()
                + ln_factorial((t + bq.n1) as usize)
                - ln_factorial((t + bq.n2 - 1) as usize)
                - (4.0 * PI * PI).ln(),
        );
        double_integral(&integ, &path, Complex64::new(0.0, 0.0), self.radius, self.phase, log_pref, Self::ring_size(0, self.t), &self.quad, |n| self.base(n))
    }

    /// Ray length beyond which `|G|` has dropped by `e^{-45}` relative to the saddle.
    fn far_radius(&self, integ: &SplitIntegrand<'_>) -> f64 {
        let at_saddle = integ.log_g(self.z0).re;
        let mut r = 2.0;
        while r < 64.0 && integ.log_g(r * self.z0).re - at_saddle > -45.0 {
            r *= 1.5;
        }
        r
    }
}

/// One-off bulk evaluation; see [`BulkEvaluator`].
pub fn eval_fixed_start_bulk(
    cfg: &Configuration,
    energy: f64,
    t: usize,
    bq: &BulkQuery,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    BulkEvaluator::new(cfg, energy, t, quad)?.eval(bq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::integrate_real;
    use crate::kernels::eval_gue_level_cd;
    use crate::special_fns::SQRT_2PI;

    fn quad() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn empty_start_level_one() {
        let v = eval_fixed_start(&Configuration::empty(), &KernelQuery::new(1, 0.0, 1, 0.0), &quad()).unwrap();
        assert!((v.value.re - 1.0 / SQRT_2PI).abs() < 1e-10 && v.value.im.abs() < 1e-10);
    }

    #[test]
    fn empty_start_matches_gue_levels() {
        for n in 1..=5 {
            for x in [-1.3, 0.0, 0.7] {
                let v = eval_fixed_start(&Configuration::empty(), &KernelQuery::new(n, x, n, x), &quad()).unwrap();
                assert!((v.value.re - eval_gue_level_cd(n, x, x)).abs() < 1e-9, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn contour_choice_does_not_matter() {
        let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
        let q = KernelQuery::new(4, 0.3, 3, -0.2);
        let base = eval_fixed_start(&cfg, &q, &quad()).unwrap().value;
        for (b, r) in [(0.1, 0.75), (0.9, 1.2), (-0.1, 0.5)] {
            let c = FixedStartContours { abscissa: Some(b), w_radius: Some(r) };
            let v = eval_fixed_start_with(&cfg, &q, &c, &quad()).unwrap().value;
            assert!((v - base).norm() < 1e-9, "b={b} r={r}: {v} vs {base}");
        }
        let bad = FixedStartContours { abscissa: Some(1.0), w_radius: None };
        assert!(matches!(eval_fixed_start_with(&cfg, &q, &bad, &quad()), Err(Error::ContourIntersection(_))));
    }

    #[test]
    fn diagonal_counts_particles() {
        let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
        for n in [3, 4] {
            let bps: Vec<f64> = (-8..=8).map(|k| k as f64).collect();
            let total = integrate_real(
                |x| eval_fixed_start(&cfg, &KernelQuery::new(n, x, n, x), &quad()).unwrap().value,
                &bps,
                &QuadratureSettings { abs_tol: 1e-9, rel_tol: 1e-9, ..quad() },
            )
            .unwrap();
            assert!((total.value.re - n as f64).abs() < 1e-6, "n={n}: {}", total.value);
        }
    }

    #[test]
    fn rejects_low_levels() {
        let cfg = Configuration::new(vec![0.0]).unwrap();
        assert!(matches!(eval_fixed_start(&cfg, &KernelQuery::new(1, 0.0, 2, 0.0), &quad()), Err(Error::InvalidLevels(_))));
    }

    #[test]
    fn bulk_matches_direct() {
        let m = 40;
        let t = 6;
        let x = 0.4;
        let cfg = Configuration::semicircle_quantiles(m);
        let ev = BulkEvaluator::new(&cfg, x, t, &quad()).unwrap();
        let sm = (m as f64).sqrt();
        let direct = |n: i64, y1: f64, k: i64, y2: f64| {
            let q = KernelQuery::new(
                (m as i64 + t as i64 + n) as usize,
                x * sm + y1 / sm,
                (m as i64 + t as i64 + k) as usize,
                x * sm + y2 / sm,
            );
            eval_fixed_start(&cfg, &q, &quad()).unwrap().value / sm
        };
        for (y1, y2) in [(0.0, 0.0), (0.5, -0.3)] {
            let d = ev.eval(&BulkQuery { n1: 0, x1: y1, n2: 0, x2: y1 }).unwrap().value;
            let expect = direct(0, y1, 0, y1);
            assert!((d - expect).norm() < 1e-8 * expect.norm(), "{d} vs {expect}");
            let ab = ev.eval(&BulkQuery { n1: 0, x1: y1, n2: 1, x2: y2 }).unwrap().value;
            let ba = ev.eval(&BulkQuery { n1: 1, x1: y2, n2: 0, x2: y1 }).unwrap().value;
            let expect = direct(0, y1, 1, y2) * direct(1, y2, 0, y1);
            assert!((ab * ba - expect).norm() < 1e-8 * expect.norm().max(1e-3), "{} vs {expect}", ab * ba);
        }
    }
}
