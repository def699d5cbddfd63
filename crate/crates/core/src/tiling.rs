//! Uniformly random lozenge tilings of a polygon whose top boundary encodes a
//! fixed configuration, and their scaling limit.
//!
//! Levels follow the usual interlacing-array picture: level `n` carries `n`
//! particles `y_1 > ... > y_n` with `y^{n+1}_j >= y^n_j > y^{n+1}_{j+1}`, and
//! the top level `H = N + m` is frozen to the polygon's boundary.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contours::{integrate_closed, integrate_real, ContourSpec, QuadratureSettings};
use crate::error::{Error, Result};
use crate::kernels::{eval_fixed_start, Configuration, KernelQuery};
use crate::special_fns::{ln_factorial, SignedLog};
use crate::statistics::{gauge_invariant_distance, KernelDistanceReport};

/// Half-integer boundary data `A_1 < B_1 < ... < A_{m+2} < B_{m+2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    /// Even scale parameter.
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PolygonSpec {
    /// Height of the polygon, equal to the number of top-level particles.
    pub fn height(&self) -> usize {
        self.n + self.m
    }

    /// `sqrt(N/2)`.
    pub fn scale(&self) -> f64 {
        (self.n as f64 / 2.0).sqrt()
    }

    /// Top-level particles, the integers inside each `[A_i, B_i]`, decreasing.
    pub fn top_row(&self) -> Vec<i64> {
        let mut t: Vec<i64> = self
            .a
            .iter()
            .zip(&self.b)
            .flat_map(|(&a, &b)| ((a + 0.5) as i64)..((b + 0.5) as i64))
            .collect();
        t.sort_unstable_by(|x, y| y.cmp(x));
        t
    }

    /// Inclusive range of admissible positions at level `n`.
    pub fn position_range(&self, level: usize) -> (i64, i64) {
        let t = self.top_row();
        let depth = (self.height() - level) as i64;
        (*t.last().unwrap() + depth, t[0])
    }
}

/// Builds the polygon whose interior slots sit at `floor(sqrt(N/2) x_r)`.
pub fn build_polygon_spec(cfg: &Configuration, n: usize) -> Result<PolygonSpec> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidConfiguration(format!("N must be a positive even integer, got {n}")));
    }
    let m = cfg.level();
    let nf = n as f64;
    let s = (nf / 2.0).sqrt();
    let mut a = vec![-nf - 0.5];
    let mut b = vec![-nf / 2.0 - 0.5];
    // Configuration entries are decreasing, so walking them backwards gives increasing slots.
    for &x in cfg.values().iter().rev() {
        let ai = (s * x).floor() - 0.5;
        a.push(ai);
        b.push(ai + 1.0);
    }
    a.push(nf / 2.0 - 0.5);
    b.push(nf - 0.5);
    for i in 0..a.len() - 1 {
        if !(b[i] < a[i + 1]) {
            return Err(Error::SlotCollision(format!(
                "segment [{}, {}] meets segment [{}, {}] at N = {n}",
                a[i],
                b[i],
                a[i + 1],
                b[i + 1]
            )));
        }
    }
    let total: f64 = a.iter().zip(&b).map(|(a, b)| b - a).sum();
    debug_assert_eq!(total, (n + m) as f64);
    Ok(PolygonSpec { n, m, a, b })
}

/// A kernel argument pair on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteKernelQuery {
    pub n1: usize,
    pub x1: i64,
    pub n2: usize,
    pub x2: i64,
}

impl DiscreteKernelQuery {
    pub fn new(n1: usize, x1: i64, n2: usize, x2: i64) -> Self {
        DiscreteKernelQuery { n1, x1, n2, x2 }
    }

    fn validate(&self, spec: &PolygonSpec) -> Result<()> {
        let h = spec.height();
        if self.n1 == 0 || self.n1 > h || self.n2 == 0 || self.n2 >= h {
            return Err(Error::RangeError(format!(
                "levels ({}, {}) outside n1 in [1, {h}], n2 in [1, {}]",
                self.n1,
                self.n2,
                h - 1
            )));
        }
        Ok(())
    }
}

fn binom_i128(n: i64, k: i64) -> Option<i128> {
    if k < 0 || n < k {
        return Some(0);
    }
    let mut r: i128 = 1;
    for i in 0..k {
        r = r.checked_mul((n - i) as i128)? / (i + 1) as i128;
    }
    Some(r)
}

fn ln_binom(n: i64, k: i64) -> f64 {
    ln_factorial(n as usize) - ln_factorial(k as usize) - ln_factorial((n - k) as usize)
}

/// Indicator term plus the residues at `w = z` picked up when the `w` contour
/// shrinks onto its own poles. Every summand is an integer.
fn rational_part(h: usize, q: &DiscreteKernelQuery) -> f64 {
    let d = (h - q.n1) as i64;
    let e2 = (h - q.n2 - 1) as i64;
    let mut terms: Vec<(i8, i64, i64, i64, i64)> = Vec::new();
    if q.n2 < q.n1 && q.x2 <= q.x1 {
        let k = (q.n1 - q.n2 - 1) as i64;
        terms.push((-1, q.x1 - q.x2 + k, k, 0, 0));
    }
    for l in 0..=d {
        let u = q.x1 - l;
        if u < q.x2 {
            break;
        }
        let sign = if l % 2 == 0 { 1 } else { -1 };
        terms.push((sign, d, l, u - q.x2 + e2, e2));
    }
    let exact: Option<i128> = terms.iter().try_fold(0i128, |acc, &(s, n1, k1, n2, k2)| {
        let t = binom_i128(n1, k1)?.checked_mul(binom_i128(n2, k2)?)?;
        acc.checked_add(s as i128 * t)
    });
    match exact {
        Some(v) => v as f64,
        None => terms
            .iter()
            .map(|&(s, n1, k1, n2, k2)| s as f64 * (ln_binom(n1, k1) + ln_binom(n2, k2)).exp())
            .sum(),
    }
}

fn signed_log_product(values: impl Iterator<Item = f64>) -> SignedLog {
    values.fold(SignedLog::ONE, |acc, v| acc.mul(SignedLog::from_value(v)))
}

/// Correlation kernel of the uniform tiling measure.
///
/// The `w` integral is collapsed onto its poles `x1 - l`, which turns the
/// nested pair of closed contours into a finite residue sum in `w` and an
/// upward line `Re z = x2 - 1/2` in `z`. Products of length `H` are carried
/// as complex logarithms.
pub fn eval_polygon_kernel(spec: &PolygonSpec, q: &DiscreteKernelQuery, quad: &QuadratureSettings) -> Result<Complex64> {
    q.validate(spec)?;
    let h = spec.height();
    let top = spec.top_row();
    let d = h - q.n1;
    let e2 = h - q.n2 - 1;
    let rational = rational_part(h, q);

    let ln_c = ln_factorial(d) - ln_factorial(e2);
    let weights: Vec<(f64, f64, f64)> = (0..=d)
        .filter_map(|l| {
            let w = (q.x1 - l as i64) as f64;
            let qw = signed_log_product(top.iter().map(|&t| w - t as f64));
            if qw.is_zero() {
                return None;
            }
            let sign = qw.sign as f64 * if l % 2 == 0 { 1.0 } else { -1.0 };
            Some((w, sign, qw.log_abs + ln_c - ln_factorial(l) - ln_factorial(d - l)))
        })
        .collect();
    if weights.is_empty() {
        return Ok(Complex64::new(rational, 0.0));
    }

    let a = q.x2 as f64 - 0.5;
    let x2 = q.x2 as f64;
    let integrand = |t: f64| -> Complex64 {
        let z = Complex64::new(a, t);
        let mut log_pq = Complex64::new(0.0, 0.0);
        for j in 1..=e2 {
            log_pq += (z - x2 + j as f64).ln();
        }
        for &s in &top {
            log_pq -= (z - s as f64).ln();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(w, sign, lw) in &weights {
            acc += sign * (log_pq + lw).exp() / (w - z);
        }
        acc
    };

    // Conjugate symmetry in t: the line integral is twice the real part over t >= 0.
    let cut = 16.0 * spec.scale() + 16.0;
    let mut bps = vec![0.0, 0.25, 0.5];
    while *bps.last().unwrap() < cut {
        let next = 2.0 * bps.last().unwrap();
        bps.push(next.min(cut));
    }
    let head = integrate_real(integrand, &bps, quad)?;
    // Algebraic tail through t = cut / v.
    let tail = integrate_real(
        |v: f64| {
            if v <= 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                integrand(cut / v) * (cut / (v * v))
            }
        },
        &[0.0, 0.5, 1.0],
        quad,
    )?;
    let line = 2.0 * (head.value + tail.value).re / (2.0 * PI);
    Ok(Complex64::new(rational - line, 0.0))
}

/// The kernel with both contours kept closed: residues at top-level particles
/// `>= x2` in `z`, and a trapezoid rule on `|w| = radius` in `w`.
///
/// The residue sum cancels heavily as `N` grows; intended for `N <= 24`.
pub fn eval_polygon_kernel_nested(
    spec: &PolygonSpec,
    q: &DiscreteKernelQuery,
    radius: f64,
    quad: &QuadratureSettings,
) -> Result<Complex64> {
    q.validate(spec)?;
    if spec.n > 24 {
        return Err(Error::SizeLimit(format!("nested evaluation supports N <= 24, got {}", spec.n)));
    }
    let h = spec.height();
    if radius <= spec.n as f64 {
        return Err(Error::ContourIntersection(format!("w circle of radius {radius} must enclose [-N, N]")));
    }
    let top = spec.top_row();
    let d = h - q.n1;
    let e2 = h - q.n2 - 1;
    let c = (ln_factorial(d) - ln_factorial(e2)).exp();
    let x1 = q.x1 as f64;
    let x2 = q.x2 as f64;

    let mut indicator = 0.0;
    if q.n2 < q.n1 && q.x2 <= q.x1 {
        let k = q.n1 - q.n2 - 1;
        indicator = -(1..=k).map(|l| x1 - x2 + l as f64).product::<f64>() / ln_factorial(k).exp();
    }
    // The w integrand reaches radius^deg on the circle; roundoff sets the floor.
    let deg = (h as i32 - 1) - (d as i32 + 1);
    let wq = QuadratureSettings { abs_tol: quad.abs_tol.max(1e-14 * radius.powi(deg.max(0))), ..*quad };
    let mut sum = Complex64::new(0.0, 0.0);
    for (r, &tr) in top.iter().enumerate() {
        if tr < q.x2 {
            continue;
        }
        let t = tr as f64;
        let pz: f64 = (1..=e2).map(|l| t - x2 + l as f64).product();
        let dq: f64 = top.iter().enumerate().filter(|&(s, _)| s != r).map(|(_, &ts)| t - ts as f64).product();
        let w_int = integrate_closed(
            |w| {
                let num: Complex64 =
                    top.iter().enumerate().filter(|&(s, _)| s != r).map(|(_, &ts)| w - ts as f64).product();
                let den: Complex64 = (0..=d).map(|l| w - x1 + l as f64).product();
                num / den
            },
            &ContourSpec::circle(Complex64::new(0.0, 0.0), radius),
            &wq,
        )?;
        sum += pz / dq * w_int.value / Complex64::new(0.0, 2.0 * PI);
    }
    Ok(indicator + c * sum)
}

/// Ratio of the boundary Pochhammer products at scaled arguments,
/// `(-N - w s)_{N/2} (N/2 - w s)_{N/2} / ((-N - z s)_{N/2} (N/2 - z s)_{N/2})`
/// with `s = sqrt(N/2)`. Tends to `exp(z^2/2 - w^2/2)`.
pub fn pochhammer_ratio(n: usize, z: Complex64, w: Complex64) -> Complex64 {
    let nf = n as f64;
    let s = (nf / 2.0).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n / 2 {
        let k = k as f64;
        acc += (-nf - w * s + k).ln() + (nf / 2.0 - w * s + k).ln();
        acc -= (-nf - z * s + k).ln() + (nf / 2.0 - z * s + k).ln();
    }
    acc.exp()
}

/// Polygon kernel at limit coordinates.
///
/// Level `n > m` of the limit process is the polygon level at depth `n - m`
/// below the top, and positions are `floor(x sqrt(N/2))`. The factor
/// `sqrt(N/2)^{1 + n1 - n2}` is a density rescaling times a gauge factor.
pub fn eval_rescaled_polygon_kernel(
    spec: &PolygonSpec,
    n1: usize,
    x1: f64,
    n2: usize,
    x2: f64,
    quad: &QuadratureSettings,
) -> Result<Complex64> {
    let m = spec.m;
    let h = spec.height();
    if n1 <= m || n2 <= m || n1 - m >= h || n2 - m >= h {
        return Err(Error::InvalidLevels(format!("limit levels must satisfy m < n < m + H, got ({n1}, {n2})")));
    }
    let s = spec.scale();
    let q = DiscreteKernelQuery::new(h - (n1 - m), (x1 * s).floor() as i64, h - (n2 - m), (x2 * s).floor() as i64);
    let k = eval_polygon_kernel(spec, &q, quad)?;
    Ok(k * s.powf(1.0 + n1 as f64 - n2 as f64))
}

/// One row of an `N` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingSweepRow {
    pub n: usize,
    pub report: KernelDistanceReport,
}

/// Gauge-invariant distance from the rescaled polygon kernel to the limit
/// kernel, for each `N`, on a fixed set of limit points.
pub fn tiling_sweep(
    cfg: &Configuration,
    ns: &[usize],
    points: &[(usize, f64)],
    quad: &QuadratureSettings,
) -> Result<Vec<TilingSweepRow>> {
    let specs: Vec<PolygonSpec> = ns.iter().map(|&n| build_polygon_spec(cfg, n)).collect::<Result<_>>()?;
    let p = points.len();
    let limit: Vec<Complex64> = (0..p * p)
        .into_par_iter()
        .map(|ij| {
            let (a, b) = (points[ij / p], points[ij % p]);
            Ok(eval_fixed_start(cfg, &KernelQuery::new(a.0, a.1, b.0, b.1), quad)?.value)
        })
        .collect::<Result<_>>()?;
    let index = |n: usize, x: f64| points.iter().position(|&(pn, px)| pn == n && px == x).unwrap();
    specs
        .par_iter()
        .map(|spec| {
            let report = gauge_invariant_distance(
                |n1, x1, n2, x2| eval_rescaled_polygon_kernel(spec, n1, x1, n2, x2, quad),
                |n1, x1, n2, x2| Ok(limit[index(n1, x1) * p + index(n2, x2)]),
                points,
            )?;
            Ok(TilingSweepRow { n: spec.n, report })
        })
        .collect()
}

/// Exact correlations of the uniform measure, by enumerating interlacing
/// arrays level by level.
#[derive(Debug, Clone)]
pub struct TilingEnumeration {
    height: usize,
    /// `above[n - 1]`: number of partial arrays from the top down to each level-`n` row.
    above: Vec<HashMap<Vec<i64>, u128>>,
    /// `below[n - 1]`: number of completions of each level-`n` row downwards.
    below: Vec<HashMap<Vec<i64>, u128>>,
    total: u128,
}

fn children(y: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(y.len().saturating_sub(1))];
    for j in 0..y.len().saturating_sub(1) {
        let mut next = Vec::new();
        for prefix in &out {
            for v in (y[j + 1] + 1)..=y[j] {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl TilingEnumeration {
    /// Enumerates all arrays below the polygon's top row. Limited to `H <= 12`.
    pub fn new(spec: &PolygonSpec) -> Result<Self> {
        let h = spec.height();
        if h > 12 {
            return Err(Error::SizeLimit(format!("enumeration supports height <= 12, got {h}")));
        }
        let mut above: Vec<HashMap<Vec<i64>, u128>> = vec![HashMap::new(); h];
        above[h - 1].insert(spec.top_row(), 1);
        for n in (1..h).rev() {
            let mut next = HashMap::new();
            for (y, &c) in &above[n] {
                for ch in children(y) {
                    *next.entry(ch).or_insert(0) += c;
                }
            }
            above[n - 1] = next;
        }
        let mut below: Vec<HashMap<Vec<i64>, u128>> = vec![HashMap::new(); h];
        below[0] = above[0].keys().map(|k| (k.clone(), 1)).collect();
        for n in 1..h {
            let lower = &below[n - 1];
            let cur = above[n].keys().map(|y| (y.clone(), children(y).iter().map(|c| lower[c]).sum())).collect();
            below[n] = cur;
        }
        let total = below[h - 1][&spec.top_row()];
        Ok(TilingEnumeration { height: h, above, below, total })
    }

    /// Number of tilings.
    pub fn total(&self) -> u128 {
        self.total
    }

    /// Probability that `(n, x)` is occupied.
    pub fn one_point(&self, n: usize, x: i64) -> f64 {
        let s: u128 = self.above[n - 1]
            .iter()
            .filter(|(y, _)| y.contains(&x))
            .map(|(y, &c)| c * self.below[n - 1][y])
            .sum();
        s as f64 / self.total as f64
    }

    /// Probability that two distinct lattice points are both occupied.
    pub fn two_point(&self, p: (usize, i64), q: (usize, i64)) -> f64 {
        let (hi, lo) = if p.0 >= q.0 { (p, q) } else { (q, p) };
        assert!(hi.0 <= self.height && lo.0 >= 1);
        let mut v: HashMap<Vec<i64>, u128> =
            self.above[hi.0 - 1].iter().filter(|(y, _)| y.contains(&hi.1)).map(|(y, &c)| (y.clone(), c)).collect();
        for _ in lo.0..hi.0 {
            let mut next = HashMap::new();
            for (y, c) in &v {
                for ch in children(y) {
                    *next.entry(ch).or_insert(0) += c;
                }
            }
            v = next;
        }
        let s: u128 = v.iter().filter(|(y, _)| y.contains(&lo.1)).map(|(y, &c)| c * self.below[lo.0 - 1][y]).sum();
        s as f64 / self.total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det2(k: impl Fn(usize, i64, usize, i64) -> f64, p: (usize, i64), q: (usize, i64)) -> f64 {
        k(p.0, p.1, p.0, p.1) * k(q.0, q.1, q.0, q.1) - k(p.0, p.1, q.0, q.1) * k(q.0, q.1, p.0, p.1)
    }

    #[test]
    fn spec_examples() {
        let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
        let s = build_polygon_spec(&cfg, 100).unwrap();
        assert_eq!(s.a, vec![-100.5, -8.5, 6.5, 49.5]);
        assert_eq!(s.b, vec![-50.5, -7.5, 7.5, 99.5]);
        for n in [2, 8, 50, 100, 400] {
            if let Ok(s) = build_polygon_spec(&cfg, n) {
                let sum: f64 = s.a.iter().zip(&s.b).map(|(a, b)| b - a).sum();
                assert_eq!(sum, (n + 2) as f64);
                assert!(s.a.iter().chain(&s.b).all(|v| (v - v.floor() - 0.5).abs() == 0.0));
                assert_eq!(s.top_row().len(), n + 2);
            }
        }
        assert!(matches!(build_polygon_spec(&cfg, 7), Err(Error::InvalidConfiguration(_))));
        let close = Configuration::new(vec![0.1, 0.05]).unwrap();
        assert!(matches!(build_polygon_spec(&close, 20), Err(Error::SlotCollision(_))));
        assert!(matches!(build_polygon_spec(&cfg, 2), Err(Error::SlotCollision(_))));
    }

    #[test]
    fn rational_part_pure_arithmetic() {
        // d = 0, e2 = 2: residue binom(4, 2) = 6 against the indicator -binom(4, 2).
        assert_eq!(rational_part(5, &DiscreteKernelQuery::new(5, 3, 2, 1)), 0.0);
        // Equal points on one level: only the l = 0 residue, equal to one.
        assert_eq!(rational_part(5, &DiscreteKernelQuery::new(3, 0, 3, 0)), 1.0);
        // d = 2, e2 = 1: 3 - 2 * 2 + 1.
        assert_eq!(rational_part(5, &DiscreteKernelQuery::new(3, 2, 3, 0)), 0.0);
    }

    #[test]
    fn two_particle_top_row_density() {
        // H = 2 with top row {a > b}: the level-one particle is uniform on (b, a].
        let spec = PolygonSpec { n: 2, m: 0, a: vec![-2.5, 0.5], b: vec![-1.5, 1.5] };
        assert_eq!(spec.top_row(), vec![1, -2]);
        let quad = QuadratureSettings::default();
        for x in -4..4 {
            let k = eval_polygon_kernel(&spec, &DiscreteKernelQuery::new(1, x, 1, x), &quad).unwrap().re;
            let want = if (-1..=1).contains(&x) { 1.0 / 3.0 } else { 0.0 };
            assert!((k - want).abs() < 1e-12, "x = {x}: {k}");
        }
    }

    #[test]
    fn matches_enumeration() {
        let quad = QuadratureSettings::default();
        for (cfg, n) in [(vec![0.3], 8), (vec![1.0, -1.0], 6), (vec![], 6)] {
            let cfg = Configuration::new(cfg).unwrap();
            let spec = build_polygon_spec(&cfg, n).unwrap();
            let en = TilingEnumeration::new(&spec).unwrap();
            let h = spec.height();
            let k = |n1: usize, x1: i64, n2: usize, x2: i64| {
                eval_polygon_kernel(&spec, &DiscreteKernelQuery::new(n1, x1, n2, x2), &quad).unwrap().re
            };
            for lvl in 1..h {
                let (lo, hi) = spec.position_range(lvl);
                let mut count = 0.0;
                for x in lo - 1..=hi + 1 {
                    let kd = k(lvl, x, lvl, x);
                    assert!((kd - en.one_point(lvl, x)).abs() < 1e-9, "level {lvl}, x {x}");
                    count += kd;
                }
                assert!((count - lvl as f64).abs() < 1e-9);
            }
            for (p, q) in [((3, 0), (3, 2)), ((2, -1), (4, 1)), ((5, 2), (1, 0)), ((h - 1, 3), (h - 2, 3))] {
                let want = en.two_point(p, q);
                assert!((det2(k, p, q) - want).abs() < 1e-9, "{p:?} {q:?}");
            }
        }
    }

    #[test]
    fn nested_form_agrees_and_is_radius_independent() {
        let quad = QuadratureSettings::default();
        let cfg = Configuration::new(vec![0.3]).unwrap();
        let spec = build_polygon_spec(&cfg, 8).unwrap();
        for q in [
            DiscreteKernelQuery::new(4, 0, 4, 0),
            DiscreteKernelQuery::new(6, 1, 3, -1),
            DiscreteKernelQuery::new(2, -1, 5, 2),
        ] {
            let a = eval_polygon_kernel(&spec, &q, &quad).unwrap();
            let b = eval_polygon_kernel_nested(&spec, &q, 9.0, &quad).unwrap();
            let c = eval_polygon_kernel_nested(&spec, &q, 12.0, &quad).unwrap();
            assert!((a - b).norm() < 1e-9 && (b - c).norm() < 1e-9, "{q:?}: {a} {b} {c}");
        }
        assert!(eval_polygon_kernel_nested(&spec, &DiscreteKernelQuery::new(4, 0, 4, 0), 8.0, &quad).is_err());
    }

    #[test]
    fn pochhammer_ratio_limit() {
        let z = Complex64::new(0.4, 0.9);
        let w = Complex64::new(0.1, -0.3);
        let r = pochhammer_ratio(10_000, z, w);
        let lim = (z * z / 2.0 - w * w / 2.0).exp();
        assert!((r - lim).norm() < 1e-2, "{r} vs {lim}");
    }

    #[test]
    fn rescaled_density_approaches_limit() {
        let quad = QuadratureSettings::default();
        let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
        let limit = eval_fixed_start(&cfg, &KernelQuery::new(3, 0.5, 3, 0.5), &quad).unwrap().value.re;
        let err = |n| {
            let spec = build_polygon_spec(&cfg, n).unwrap();
            (eval_rescaled_polygon_kernel(&spec, 3, 0.5, 3, 0.5, &quad).unwrap().re - limit).abs()
        };
        let (coarse, fine) = (err(50), err(800));
        assert!(fine < 0.01 && fine < coarse / 4.0, "{coarse} {fine}");
    }

    #[test]
    fn query_ranges() {
        let spec = build_polygon_spec(&Configuration::new(vec![0.3]).unwrap(), 8).unwrap();
        let quad = QuadratureSettings::default();
        assert!(matches!(
            eval_polygon_kernel(&spec, &DiscreteKernelQuery::new(9, 0, 9, 0), &quad),
            Err(Error::RangeError(_))
        ));
        assert!(eval_polygon_kernel(&spec, &DiscreteKernelQuery::new(9, 0, 8, 0), &quad).is_ok());
        assert!(matches!(
            eval_polygon_kernel(&spec, &DiscreteKernelQuery::new(0, 0, 1, 0), &quad),
            Err(Error::RangeError(_))
        ));
    }
}
