//! The action governing the rescaled fixed-start kernel, its critical point,
//! and diagnostics on the starting configuration.
//!
//! With `u_r = (x_r / sqrt(m) - X) / (T / m)` the action is
//! `S_m(z) = z X + log_H(z) + T z^2 / (2m) - (1/T) sum_r log_H(z - u_r)`,
//! where `log_H` has its cut on the negative imaginary axis. Its limit is
//! `S_*(z) = X (z + i) / 2 + log_H(z) + i pi rho_sc(X) (z - i)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Configuration;
use crate::special_fns::{semicircle_cdf, semicircle_density};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Logarithm with the branch cut along the negative imaginary axis.
pub fn log_upper(z: Complex64) -> Complex64 {
    (z * -I).ln() + I * (PI / 2.0)
}

/// Parameters of the action: start configuration, energy and time horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionParams {
    pub cfg: Configuration,
    pub energy: f64,
    pub t: usize,
    /// Rescaled configuration `u_r`.
    pub u: Vec<f64>,
}

impl ActionParams {
    pub fn new(cfg: Configuration, energy: f64, t: usize) -> Result<Self> {
        if !(energy.abs() < 2.0) {
            return Err(Error::EdgeEnergy(energy));
        }
        if t == 0 {
            return Err(Error::InvalidLevels("time horizon T must be at least 1".into()));
        }
        let m = cfg.level() as f64;
        let scale = t as f64 / m;
        let u: Vec<f64> = cfg.values().iter().map(|x| (x / m.sqrt() - energy) / scale).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfiguration("rescaled configuration is not finite".into()));
        }
        Ok(ActionParams { cfg, energy, t, u })
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    /// `T / m`, taken as zero for the empty configuration.
    fn time_ratio(&self) -> f64 {
        if self.u.is_empty() {
            0.0
        } else {
            self.t as f64 / self.u.len() as f64
        }
    }

    /// The limit point `-X/2 + i sqrt(1 - X^2/4)`.
    pub fn limit_critical_point(&self) -> Complex64 {
        limit_critical_point(self.energy)
    }
}

pub fn limit_critical_point(energy: f64) -> Complex64 {
    Complex64::new(-energy / 2.0, (1.0 - energy * energy / 4.0).sqrt())
}

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 {
        Ok(())
    } else {
        Err(Error::LowerHalfPlane(z))
    }
}

/// `S_m` and its first three derivatives by direct summation.
pub fn eval_action(p: &ActionParams, z: Complex64, order: usize) -> Result<Complex64> {
    check_upper(z)?;
    let tf = p.t as f64;
    let ratio = p.time_ratio();
    let v = match order {
        0 => {
            let s: Complex64 = p.u.iter().map(|&u| log_upper(z - u)).sum();
            z * p.energy + log_upper(z) + ratio * z * z / 2.0 - s / tf
        }
        1 => {
            let s: Complex64 = p.u.iter().map(|&u| (z - u).inv()).sum();
            p.energy + z.inv() + ratio * z - s / tf
        }
        2 => {
            let s: Complex64 = p.u.iter().map(|&u| (z - u).powi(-2)).sum();
            -z.powi(-2) + ratio + s / tf
        }
        3 => {
            let s: Complex64 = p.u.iter().map(|&u| (z - u).powi(-3)).sum();
            2.0 * z.powi(-3) - 2.0 * s / tf
        }
        _ => return Err(Error::IndexOutOfRange(format!("action derivative order {order} (max 3)"))),
    };
    Ok(v)
}

/// Limit action `S_*` (order 0) or its derivative `X/2 + 1/z + i pi rho_sc(X)` (order 1).
pub fn eval_limit_action(energy: f64, z: Complex64, order: usize) -> Result<Complex64> {
    check_upper(z)?;
    let a = I * (PI * semicircle_density(energy));
    match order {
        0 => Ok(energy * (z + I) / 2.0 + log_upper(z) + a * (z - I)),
        1 => Ok(energy / 2.0 + z.inv() + a),
        _ => Err(Error::IndexOutOfRange(format!("limit action order {order} (max 1)"))),
    }
}

/// Critical point of `S_m` in the upper half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    pub z0: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub limit_reference: Complex64,
}

const MAX_NEWTON: usize = 200;
const MIN_IM: f64 = 0.01;

/// Damped Newton iteration on `S_m'` from the limit point.
pub fn find_critical_point(p: &ActionParams, tol: f64) -> Result<SaddleResult> {
    if p.u.is_empty() {
        return Err(Error::InvalidConfiguration("critical point needs a nonempty configuration".into()));
    }
    let limit = p.limit_critical_point();
    let mut z = limit;
    let mut trajectory = vec![z];
    let mut residual = eval_action(p, z, 1)?.norm();
    for it in 0..MAX_NEWTON {
        if residual < tol {
            return Ok(SaddleResult { z0: z, residual, iterations: it, limit_reference: limit });
        }
        let d1 = eval_action(p, z, 1)?;
        let d2 = eval_action(p, z, 2)?;
        let mut step = d1 / d2;
        let mut halvings = 0;
        while !((z - step).im > MIN_IM) || !(z - step).is_finite() {
            step *= 0.5;
            halvings += 1;
            if halvings > 60 {
                trajectory.push(z - step);
                return Err(Error::LeftHalfPlaneEscape { trajectory });
            }
        }
        z -= step;
        trajectory.push(z);
        residual = eval_action(p, z, 1)?.norm();
    }
    if residual < tol {
        return Ok(SaddleResult { z0: z, residual, iterations: MAX_NEWTON, limit_reference: limit });
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON, residual })
}

/// Number of grid cells in `[re_lo, re_hi] x [im_lo, im_hi]` around which
/// `S_m'` has nonzero winding number. Poles lie on the real axis, so with
/// `im_lo > 0` every winding cell holds a zero.
pub fn count_critical_cells(
    p: &ActionParams,
    re: (f64, f64),
    im: (f64, f64),
    cells: usize,
    samples_per_edge: usize,
) -> Result<usize> {
    if !(im.0 > 0.0) {
        return Err(Error::LowerHalfPlane(Complex64::new(re.0, im.0)));
    }
    let dx = (re.1 - re.0) / cells as f64;
    let dy = (im.1 - im.0) / cells as f64;
    let count = (0..cells * cells)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % cells, c / cells);
            let corners = [
                Complex64::new(re.0 + i as f64 * dx, im.0 + j as f64 * dy),
                Complex64::new(re.0 + (i + 1) as f64 * dx, im.0 + j as f64 * dy),
                Complex64::new(re.0 + (i + 1) as f64 * dx, im.0 + (j + 1) as f64 * dy),
                Complex64::new(re.0 + i as f64 * dx, im.0 + (j + 1) as f64 * dy),
            ];
            let mut total = 0.0;
            let mut prev = eval_action(p, corners[0], 1).map(|v| v.arg()).unwrap_or(0.0);
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                for s in 1..=samples_per_edge {
                    let z = a + (b - a) * (s as f64 / samples_per_edge as f64);
                    let arg = eval_action(p, z, 1).map(|v| v.arg()).unwrap_or(prev);
                    let mut d = arg - prev;
                    if d > PI {
                        d -= 2.0 * PI;
                    } else if d < -PI {
                        d += 2.0 * PI;
                    }
                    total += d;
                    prev = arg;
                }
            }
            usize::from((total / (2.0 * PI)).round() != 0.0)
        })
        .sum();
    Ok(count)
}

/// Diagnostics of the start configuration near energy `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStats {
    /// `int f d mu_m = (1/T) sum_r f(u_r)` per test function.
    pub mu_integrals: Vec<f64>,
    /// `(R, d_m(R))` pairs.
    pub d_values: Vec<(f64, f64)>,
    /// Sup distance between the empirical CDF of `x / sqrt(m)` and the semicircle CDF.
    pub rigidity: f64,
}

/// `d_m(R) = (1/m) sum over |X - x_r/sqrt(m)| >= R T/m of 1 / (X - x_r/sqrt(m))`.
pub fn d_m(cfg: &Configuration, energy: f64, t: usize, r: f64) -> f64 {
    let m = cfg.level() as f64;
    let cut = r * t as f64 / m;
    cfg.values()
        .iter()
        .map(|x| energy - x / m.sqrt())
        .filter(|d| d.abs() >= cut)
        .map(|d| 1.0 / d)
        .sum::<f64>()
        / m
}

/// Kolmogorov distance of the scaled empirical distribution to the semicircle law.
pub fn rigidity_distance(cfg: &Configuration) -> f64 {
    let m = cfg.level();
    let mut ys: Vec<f64> = cfg.values().iter().map(|x| x / (m as f64).sqrt()).collect();
    ys.sort_by(f64::total_cmp);
    ys.iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = semicircle_cdf(y);
            (f - i as f64 / m as f64).abs().max((f - (i + 1) as f64 / m as f64).abs())
        })
        .fold(0.0, f64::max)
}

pub fn local_stats(
    cfg: &Configuration,
    energy: f64,
    t: usize,
    test_fns: &[&dyn Fn(f64) -> f64],
    rs: &[f64],
) -> Result<LocalStats> {
    let p = ActionParams::new(cfg.clone(), energy, t)?;
    let mu_integrals = test_fns.iter().map(|f| p.u.iter().map(|&u| f(u)).sum::<f64>() / t as f64).collect();
    let d_values = rs.iter().map(|&r| (r, d_m(cfg, energy, t, r))).collect();
    Ok(LocalStats { mu_integrals, d_values, rigidity: rigidity_distance(cfg) })
}

/// Inputs of the local-density and intermediate-scale checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub energy: f64,
    pub t: usize,
    pub d: f64,
    pub q: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub r: f64,
    pub delta: f64,
}

/// Outcome of one clause, with the worst window when it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub passed: bool,
    /// `(left, right, count)` of the most extreme window seen.
    pub worst_window: Option<(f64, f64, usize)>,
    pub bounds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub local_density_windows: ClauseReport,
    pub local_density_global: ClauseReport,
    /// `(1/m) sum over R T/m <= |X - y_r| <= delta of 1/(X - y_r)`, `y = x / sqrt(m)`.
    pub intermediate_sum: f64,
}

/// Counts of sorted `ys` in `[a, a + len]` (closed) and `(a, a + len)` (open).
fn window_counts(ys: &[f64], a: f64, len: f64) -> (usize, usize) {
    let lo_closed = ys.partition_point(|&y| y < a);
    let hi_closed = ys.partition_point(|&y| y <= a + len);
    let lo_open = ys.partition_point(|&y| y <= a);
    let hi_open = ys.partition_point(|&y| y < a + len);
    (hi_closed - lo_closed, hi_open.saturating_sub(lo_open))
}

/// Left endpoints where window counts change: the range ends and every point
/// shifted so it sits at either end of the window.
fn candidate_starts(ys: &[f64], lo: f64, hi: f64, len: f64) -> Vec<f64> {
    let mut c = vec![lo, hi - len];
    for &y in ys {
        c.push(y);
        c.push(y - len);
    }
    c.retain(|&a| a >= lo && a + len <= hi);
    c
}

pub fn check_assumptions(cfg: &Configuration, ap: &AssumptionParams) -> Result<AssumptionReport> {
    if !(ap.energy.abs() < 2.0) {
        return Err(Error::EdgeEnergy(ap.energy));
    }
    let m = cfg.level() as f64;
    let mut ys: Vec<f64> = cfg.values().iter().map(|x| x / m.sqrt()).collect();
    ys.sort_by(f64::total_cmp);

    let len = ap.d / m;
    let (lo, hi) = (ap.energy - ap.q / m, ap.energy + ap.q / m);
    let bounds = (ap.rho_lower * ap.d, ap.rho_upper * ap.d);
    let mut part1 = ClauseReport { passed: true, worst_window: None, bounds };
    let mut worst_excess = f64::NEG_INFINITY;
    for a in candidate_starts(&ys, lo, hi, len) {
        let (closed, open) = window_counts(&ys, a, len);
        let excess = (bounds.0 - open as f64).max(closed as f64 - bounds.1);
        if excess > worst_excess {
            worst_excess = excess;
            let count = if bounds.0 - open as f64 >= closed as f64 - bounds.1 { open } else { closed };
            part1.worst_window = Some((a, a + len, count));
        }
    }
    part1.passed = worst_excess <= 0.0;

    let qlen = ap.q / m;
    let bound2 = ap.rho_upper * ap.q;
    let mut part2 = ClauseReport { passed: true, worst_window: None, bounds: (0.0, bound2) };
    let mut worst = 0usize;
    for (i, &y) in ys.iter().enumerate() {
        let count = ys.partition_point(|&v| v <= y + qlen) - i;
        if count >= worst {
            worst = count;
            part2.worst_window = Some((y, y + qlen, count));
        }
    }
    part2.passed = worst as f64 <= bound2;

    let cut = ap.r * ap.t as f64 / m;
    let intermediate_sum = ys
        .iter()
        .map(|y| ap.energy - y)
        .filter(|d| d.abs() >= cut && d.abs() <= ap.delta)
        .map(|d| 1.0 / d)
        .sum::<f64>()
        / m;
    Ok(AssumptionReport { local_density_windows: part1, local_density_global: part2, intermediate_sum })
}

/// Default horizon used for saddle sweeps: `T = ceil(m^0.4)`.
pub fn default_horizon(m: usize) -> usize {
    (m as f64).powf(0.4).ceil() as usize
}
