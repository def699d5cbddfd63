//! Basis functions, Gram matrix and resummation identities behind the
//! term-sum form of the fixed-start kernel.
//!
//! Conventions: `phi(x, y) = 1_{x <= y}`, `phi(virt, y) = 1`, and for `a < b`
//! the `(b - a)`-fold convolution is `phi^(a,b)(x, y) = 1_{x <= y} (y - x)^{b-a-1} / (b-a-1)!`.
//! The final-level functions are `psi_k(x | N) = h_{N-k}(x) e^{-x^2/2}` and the
//! initial-level functions are `upsilon_k(x_j | m) = [h^{-1}]_{jk} e^{x_j^2/2}`
//! with `h_{kj} = h_{m-k}(x_j)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contours::{integrate, integrate_double, integrate_real, ContourSpec, QuadratureSettings};
use crate::error::{Error, Result};
use crate::kernels::{Configuration, KernelQuery};
use crate::special_fns::{
    elem_symmetric_all, factorial, gaussian_tail, hermite_eval, hermite_functions, ln_factorial, SQRT_2PI,
};

/// `phi^(a,b)(x, y) = 1_{a<b} 1_{x<=y} (y-x)^{b-a-1} / (b-a-1)!`.
pub fn phi_conv(a: usize, b: usize, x: f64, y: f64) -> f64 {
    if a >= b || x > y {
        return 0.0;
    }
    (y - x).powi((b - a - 1) as i32) / factorial(b - a - 1)
}

/// `kappa(x)`, the standard Gaussian upper tail.
pub fn kappa(x: f64) -> f64 {
    gaussian_tail(x)
}

/// `psi_k(x | n)`: `h_{n-k}(x) e^{-x^2/2}` for `n >= k`, otherwise the
/// incomplete integral `int_x^inf (y-x)^{k-n-1} e^{-y^2/2} dy / (k-n-1)!`.
pub fn psi(k: usize, n: usize, x: f64, quad: &QuadratureSettings) -> Result<f64> {
    if k == 0 {
        return Err(Error::IndexOutOfRange("psi index k starts at 1".into()));
    }
    if n >= k {
        return Ok(hermite_eval(n - k, x) * (-x * x / 2.0).exp());
    }
    let p = k - n - 1;
    let upper = (-x).max(0.0) + 10.0 + 2.0 * (p as f64).sqrt();
    let bps: Vec<f64> = (0..=upper.ceil() as usize).map(|i| i as f64).collect();
    let est = integrate_real(
        |t| Complex64::from(t.powi(p as i32) * (-(t + x) * (t + x) / 2.0).exp()),
        &bps,
        quad,
    )?;
    Ok(est.value.re / factorial(p))
}

/// `phi~^(a,b)(x, y)` in closed form:
/// `phi^(a,b)(x,y) - sum_{k=a+1}^{b} h_{b-k}(y) psi_k(x|a) / (sqrt(2 pi) (b-k)!)`.
pub fn phi_tilde_conv(a: usize, b: usize, x: f64, y: f64, quad: &QuadratureSettings) -> Result<f64> {
    if a >= b {
        return Ok(0.0);
    }
    let mut v = phi_conv(a, b, x, y);
    for k in a + 1..=b {
        v -= hermite_eval(b - k, y) * psi(k, a, x, quad)? / (SQRT_2PI * factorial(b - k));
    }
    Ok(v)
}

/// `(phi~ * phi~^(a,b))(virt, y) = 1_{a<=b} h_{b-a}(y) / (sqrt(2 pi) (b-a)!)`.
pub fn phi_tilde_virt(a: usize, b: usize, y: f64) -> f64 {
    if a > b {
        return 0.0;
    }
    hermite_eval(b - a, y) / (SQRT_2PI * factorial(b - a))
}

/// Identifies one of the basis function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum BasisFunctionId {
    /// `phi^(a,b)(x, y)`; arguments `[x, y]`.
    Phi { a: usize, b: usize },
    /// `phi~^(a,b)(x, y)`; arguments `[x, y]`.
    PhiTilde { a: usize, b: usize },
    /// `(phi~ * phi~^(a,b))(virt, y)`; arguments `[y]`.
    PhiVirt { a: usize, b: usize },
    /// `psi_k(x | n)`; arguments `[x]`.
    Psi { k: usize, n: usize },
    /// `upsilon_k(x | n)` for `n >= m`; arguments `[x]` (a configuration point when `n = m`).
    Upsilon { k: usize, n: usize },
    /// `rho_i(x_j | m) = [h^{-1}]_{ji}`; arguments `[x_j]`, a configuration point.
    Rho { i: usize },
    /// `kappa(x)`; arguments `[x]`.
    Kappa,
}

fn args_n<const N: usize>(args: &[f64]) -> Result<[f64; N]> {
    args.try_into()
        .map_err(|_| Error::DimensionMismatch(format!("expected {N} arguments, got {}", args.len())))
}

fn config_index(cfg: &Configuration, x: f64) -> Result<usize> {
    cfg.values()
        .iter()
        .position(|&v| v == x)
        .ok_or_else(|| Error::IndexOutOfRange(format!("{x} is not a configuration point")))
}

/// Evaluates any basis function at the given arguments.
pub fn eval_basis_function(
    id: BasisFunctionId,
    args: &[f64],
    cfg: &Configuration,
    quad: &QuadratureSettings,
) -> Result<f64> {
    let m = cfg.level();
    match id {
        BasisFunctionId::Phi { a, b } => {
            let [x, y] = args_n::<2>(args)?;
            Ok(phi_conv(a, b, x, y))
        }
        BasisFunctionId::PhiTilde { a, b } => {
            let [x, y] = args_n::<2>(args)?;
            phi_tilde_conv(a, b, x, y, quad)
        }
        BasisFunctionId::PhiVirt { a, b } => {
            let [y] = args_n::<1>(args)?;
            Ok(phi_tilde_virt(a, b, y))
        }
        BasisFunctionId::Psi { k, n } => {
            let [x] = args_n::<1>(args)?;
            psi(k, n, x, quad)
        }
        BasisFunctionId::Upsilon { k, n } => {
            let [x] = args_n::<1>(args)?;
            if k == 0 || k > m || n < m {
                return Err(Error::IndexOutOfRange(format!("upsilon_{k}(.|{n}) with m = {m}")));
            }
            let ups = InitialLevel::new(cfg)?.upsilon();
            if n == m {
                let j = config_index(cfg, x)?;
                return Ok(ups[(j, k - 1)]);
            }
            Ok((0..m).map(|j| ups[(j, k - 1)] * phi_conv(m, n, cfg.values()[j], x)).sum())
        }
        BasisFunctionId::Rho { i } => {
            let [x] = args_n::<1>(args)?;
            if i == 0 || i > m {
                return Err(Error::IndexOutOfRange(format!("rho_{i} with m = {m}")));
            }
            let j = config_index(cfg, x)?;
            Ok(InitialLevel::new(cfg)?.h_inverse()[(j, i - 1)])
        }
        BasisFunctionId::Kappa => {
            let [x] = args_n::<1>(args)?;
            Ok(kappa(x))
        }
    }
}

/// Change-of-basis matrices at the initial level.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialLevel {
    /// `V^{-1}` for `V_{kj} = x_j^{m-k}`, from the residue formula.
    pub v_inverse: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub r_inverse: DMatrix<f64>,
    /// `h_{kj} = h_{m-k}(x_j)`.
    pub h: DMatrix<f64>,
    xs: Vec<f64>,
}

fn r_entry(m: usize, k: usize, j: usize, alternating: bool) -> f64 {
    if j < k || (j - k) % 2 == 1 {
        return 0.0;
    }
    let r = (j - k) / 2;
    let sign = if alternating && r % 2 == 1 { -1.0 } else { 1.0 };
    sign * (ln_factorial(m - k) - ln_factorial(m - j) - ln_factorial(r)).exp() * 0.5f64.powi(r as i32)
}

impl InitialLevel {
    pub fn new(cfg: &Configuration) -> Result<Self> {
        let xs = cfg.values().to_vec();
        let m = xs.len();
        if let Some(w) = xs.windows(2).find(|w| (w[0] - w[1]).abs() < 1e-12) {
            return Err(Error::DegenerateConfiguration(w[0], w[1]));
        }
        let v_inverse = DMatrix::from_fn(m, m, |k, j| {
            let others: Vec<f64> = xs.iter().enumerate().filter(|&(r, _)| r != k).map(|(_, &x)| -x).collect();
            let e = elem_symmetric_all(&others);
            // e here is e_{j}(-x), which already carries the (-1)^j sign.
            let denom: f64 = xs.iter().enumerate().filter(|&(r, _)| r != k).map(|(_, &x)| xs[k] - x).product();
            e[j] / denom
        });
        // Indices are 1-based in the formulas; shift by one consistently.
        let r = DMatrix::from_fn(m, m, |k, j| r_entry(m, k + 1, j + 1, true));
        let r_inverse = DMatrix::from_fn(m, m, |k, j| r_entry(m, k + 1, j + 1, false));
        let h = DMatrix::from_fn(m, m, |k, j| hermite_eval(m - 1 - k, xs[j]));
        Ok(InitialLevel { v_inverse, r, r_inverse, h, xs })
    }

    /// `V_{kj} = x_j^{m-k}`.
    pub fn vandermonde(&self) -> DMatrix<f64> {
        let m = self.xs.len();
        DMatrix::from_fn(m, m, |k, j| self.xs[j].powi((m - 1 - k) as i32))
    }

    /// `h^{-1} = V^{-1} R^{-1}`.
    pub fn h_inverse(&self) -> DMatrix<f64> {
        &self.v_inverse * &self.r_inverse
    }

    /// Matrix with entries `upsilon_k(x_j | m)` at `(j, k)`.
    pub fn upsilon(&self) -> DMatrix<f64> {
        let mut u = self.h_inverse();
        for (j, x) in self.xs.iter().enumerate() {
            u.row_mut(j).scale_mut((x * x / 2.0).exp());
        }
        u
    }
}

/// `(V^{-1}, R, R^{-1}, h)` for the configuration.
pub fn initial_level_coefficients(
    cfg: &Configuration,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let il = InitialLevel::new(cfg)?;
    Ok((il.v_inverse, il.r, il.r_inverse, il.h))
}

/// Configurations at levels `m, m+1, ..., m+L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingChain {
    pub levels: Vec<Configuration>,
}

impl InterlacingChain {
    /// Checks level sizes only; interlacing is left to the weight.
    pub fn new(levels: Vec<Configuration>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::DimensionMismatch("chain needs at least one level".into()));
        }
        for w in levels.windows(2) {
            if w[1].level() != w[0].level() + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "consecutive levels have sizes {} and {}",
                    w[0].level(),
                    w[1].level()
                )));
            }
        }
        Ok(InterlacingChain { levels })
    }

    pub fn interlaces(&self) -> bool {
        self.levels.windows(2).all(|w| w[0].interlaces(&w[1]))
    }
}

/// Unnormalized weight of a chain above `cfg`: the product of the
/// initial-level, interlacing and final-level determinants.
pub fn weight_eval(chain: &InterlacingChain, cfg: &Configuration) -> Result<f64> {
    if chain.levels[0] != *cfg {
        return Err(Error::DimensionMismatch("chain does not start at the configuration".into()));
    }
    if !chain.interlaces() {
        return Ok(0.0);
    }
    let m = cfg.level();
    let init = if m == 0 { 1.0 } else { InitialLevel::new(cfg)?.upsilon().determinant() };
    let mut inter = 1.0;
    for w in chain.levels.windows(2) {
        let (lo, hi) = (w[0].values(), w[1].values());
        let k = hi.len();
        let block = DMatrix::from_fn(k, k, |i, j| if i + 1 == k { 1.0 } else { f64::from(u8::from(lo[i] <= hi[j])) });
        inter *= block.determinant();
    }
    let top = chain.levels.last().map(|c| c.values()).unwrap_or(&[]);
    let n = top.len();
    let fin = DMatrix::from_fn(n, n, |i, j| hermite_eval(n - 1 - i, top[j]) * (-top[j] * top[j] / 2.0).exp()).determinant();
    Ok(init * inter * fin)
}

/// Gram matrix with per-entry quadrature error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub size: usize,
    pub entries: Vec<Vec<f64>>,
    pub abs_err: Vec<Vec<f64>>,
}

impl GramMatrix {
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - f64::from(u8::from(i == j))).abs());
            }
        }
        worst
    }

    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let m = DMatrix::from_fn(self.size, self.size, |i, j| self.entries[i][j]);
        let sv = m.singular_values();
        sv.max() / sv.min()
    }
}

/// Half-width of the window outside which `|poly| e^{-y^2/2}` is negligible.
fn gaussian_window(degree: usize) -> f64 {
    10.0 + 2.0 * (degree as f64).sqrt()
}

/// Gram matrix of the modified functions for levels `m .. m+L`.
pub fn gram_matrix(cfg: &Configuration, l: usize, quad: &QuadratureSettings) -> Result<GramMatrix> {
    let m = cfg.level();
    if m > 6 || l > 3 {
        return Err(Error::SizeLimit(format!("gram matrix supports m <= 6, L <= 3 (got m = {m}, L = {l})")));
    }
    if l == 0 {
        return Err(Error::InvalidLevels("gram matrix needs L >= 1".into()));
    }
    let big_m = m + l;
    let c = gaussian_window(2 * big_m);
    let ups = if m > 0 { Some(InitialLevel::new(cfg)?.upsilon()) } else { None };
    let xs = cfg.values();
    // psi_k(x_r | m) for k in m+1..=M, reused across rows.
    let psi_tab: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| (m + 1..=big_m).map(|k| psi(k, m, x, quad)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![0.0; big_m]; big_m];
    let mut abs_err = vec![vec![0.0; big_m]; big_m];
    for j in 1..=big_m {
        let psi_j = |y: f64| hermite_eval(big_m - j, y) * (-y * y / 2.0).exp();
        // Convolution of phi~^(m, M)(x_r, .) against psi_j, split at the kink.
        let mut conv = Vec::with_capacity(m);
        for (r, &xr) in xs.iter().enumerate() {
            let f = |y: f64| {
                let mut t = phi_conv(m, big_m, xr, y);
                for (idx, k) in (m + 1..=big_m).enumerate() {
                    t -= hermite_eval(big_m - k, y) * psi_tab[r][idx] / (SQRT_2PI * factorial(big_m - k));
                }
                Complex64::from(t * psi_j(y))
            };
            let mut bps = vec![-c - xr.abs(), xr, c + xr.abs()];
            bps.sort_by(f64::total_cmp);
            conv.push(integrate_real(f, &bps, quad)?);
        }
        for k in 1..=big_m {
            let (v, e) = if k <= m {
                let u = ups.as_ref().expect("m > 0");
                let mut v = 0.0;
                let mut e = 0.0;
                for r in 0..m {
                    v += u[(r, k - 1)] * conv[r].value.re;
                    e += u[(r, k - 1)].abs() * conv[r].abs_err;
                }
                (v, e)
            } else {
                let est = integrate_real(
                    |y| Complex64::from(phi_tilde_virt(k, big_m, y) * psi_j(y)),
                    &[-c, 0.0, c],
                    quad,
                )?;
                (est.value.re, est.abs_err)
            };
            entries[k - 1][j - 1] = v;
            abs_err[k - 1][j - 1] = e;
        }
    }
    Ok(GramMatrix { size: big_m, entries, abs_err })
}

/// One identity check: both sides and their difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResummationCheck {
    pub lemma: String,
    pub params: serde_json::Value,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
}

impl ResummationCheck {
    fn new(lemma: &str, params: serde_json::Value, lhs: Complex64, rhs: Complex64) -> Self {
        ResummationCheck { lemma: lemma.into(), params, lhs, rhs, abs_diff: (lhs - rhs).norm() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResummationReport {
    pub checks: Vec<ResummationCheck>,
}

impl ResummationReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.checks.iter().map(|c| c.abs_diff).fold(0.0, f64::max)
    }
}

/// The four pieces of the term-sum kernel, each as a function of the query.
pub(crate) struct TermSum {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub fourth: f64,
}

impl TermSum {
    pub fn total(&self) -> f64 {
        self.first + self.second + self.third + self.fourth
    }
}

pub(crate) fn term_sum(cfg: &Configuration, q: &KernelQuery, quad: &QuadratureSettings) -> Result<TermSum> {
    let m = cfg.level();
    let (n1, n2, x1, x2) = (q.n1, q.n2, q.x1, q.x2);
    let xs = cfg.values();
    let g1 = (-x1 * x1 / 2.0).exp();
    let first = -phi_conv(n1, n2, x1, x2);
    let mut third = 0.0;
    for k in m + 1..=n2 {
        third += hermite_eval(n2 - k, x2) * psi(k, n1, x1, quad)? / (SQRT_2PI * factorial(n2 - k));
    }
    let (mut second, mut fourth) = (0.0, 0.0);
    if m > 0 {
        let ups = InitialLevel::new(cfg)?.upsilon();
        let mut inner = vec![0.0; m];
        for (j, &xj) in xs.iter().enumerate() {
            for k in m + 1..=n2 {
                inner[j] += hermite_eval(n2 - k, x2) * psi(k, m, xj, quad)? / (SQRT_2PI * factorial(n2 - k));
            }
        }
        for l in 1..=m {
            let h1 = hermite_eval(n1 - l, x1) * g1;
            let up: f64 = (0..m).map(|j| ups[(j, l - 1)] * phi_conv(m, n2, xs[j], x2)).sum();
            let dn: f64 = (0..m).map(|j| ups[(j, l - 1)] * inner[j]).sum();
            second += up * h1;
            fourth -= dn * h1;
        }
    }
    Ok(TermSum { first, second, third, fourth })
}

/// `(n1-m)!/(n2-m-1)! * sign / (2 pi i)^2 * G(z) F(w) / (w - z)` with the Gaussian factors.
fn resummation_integrand<'a>(
    cfg: &'a Configuration,
    q: &KernelQuery,
    sign: f64,
) -> impl Fn(Complex64, Complex64) -> Complex64 + 'a {
    let m = cfg.level();
    let pref = sign * (ln_factorial(q.n1 - m) - ln_factorial(q.n2 - m - 1)).exp() / -(4.0 * PI * PI);
    let (x1, x2, e2, e1) = (q.x1, q.x2, (q.n2 - m - 1) as i32, (q.n1 - m + 1) as i32);
    move |z: Complex64, w: Complex64| {
        let mut ratio = Complex64::new(1.0, 0.0);
        for &x in cfg.values() {
            ratio *= (w - x) / (z - x);
        }
        pref * (z - x2).powi(e2) / (w - x1).powi(e1) * ((z * z - w * w) / 2.0).exp() / (w - z) * ratio
    }
}

/// Left and right sides of the two resummation identities and the Gaussian
/// line-integral identity, at one query.
pub fn verify_resummation(cfg: &Configuration, q: &KernelQuery, quad: &QuadratureSettings) -> Result<ResummationReport> {
    let m = cfg.level();
    if m > 3 || q.n2 > m + 5 || q.n1 > m + 5 {
        return Err(Error::SizeLimit(format!("resummation checks need m <= 3 and n - m <= 5 (got m = {m})")));
    }
    if q.n1 <= m || q.n2 <= m {
        return Err(Error::InvalidLevels(format!("need n1, n2 > m = {m}")));
    }
    let ts = term_sum(cfg, q, quad)?;
    let params = serde_json::json!({"cfg": cfg.values(), "n1": q.n1, "x1": q.x1, "n2": q.n2, "x2": q.x2});
    let xs = cfg.values();
    // x2 only enters through the entire factor (z - x2)^(n2-m-1), so it does
    // not constrain the circle radii.
    let mut pts: Vec<f64> = xs.to_vec();
    pts.push(q.x1);
    pts.sort_by(f64::total_cmp);
    let min_sep = pts.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(1.0, f64::min);
    let rad = 0.4 * min_sep;
    let w_circle = ContourSpec::circle(Complex64::from(q.x1), rad);
    let parity = |k: i64| if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sign = parity(q.n2 as i64 - q.n1 as i64 - 1);

    // Middle term: z around each configuration point <= x2.
    let f = resummation_integrand(cfg, q, sign);
    let mut rhs_mid = Complex64::new(0.0, 0.0);
    for &xj in xs.iter().filter(|&&x| x <= q.x2) {
        let zc = ContourSpec::circle(Complex64::from(xj), rad);
        rhs_mid += integrate_double(&f, &zc, &w_circle, quad)?.value;
    }
    let mut checks = vec![ResummationCheck::new("middle_term", params.clone(), Complex64::from(ts.second), rhs_mid)];

    // Final two terms: z on a line left of everything.
    let d = pts[0] - rad - 1.0;
    let line = crate::contours::vertical_line(d, &quad.tightened(100.0), (q.n2 + q.n1 + m) as f64);
    let rhs_last = integrate_double(&f, &line, &w_circle, quad)?.value;
    checks.push(ResummationCheck::new(
        "final_terms",
        params,
        Complex64::from(ts.third + ts.fourth),
        rhs_last,
    ));

    checks.push(verify_gaussian_line_identity(Complex64::new(q.x1, 0.5), d, q.x2, m, q.n2, quad)?);
    Ok(ResummationReport { checks })
}

/// `(1/2 pi i) int_{d+iR} (z-x2)^{n2-m-1} e^{z^2/2} / (z - r) dz` against its
/// half-line form `(n2-m-1)! (-1)^{n2-m} / sqrt(2 pi) int_0^inf e^{-r y - y^2/2}
/// sum_l h_{n2-l}(x2) y^{l-m-1} / ((n2-l)! (l-m-1)!) dy`, for `Re(r) > d`.
pub fn verify_gaussian_line_identity(
    r: Complex64,
    d: f64,
    x2: f64,
    m: usize,
    n2: usize,
    quad: &QuadratureSettings,
) -> Result<ResummationCheck> {
    if !(r.re > d) || n2 <= m {
        return Err(Error::InvalidConfiguration("need Re(r) > d and n2 > m".into()));
    }
    let p = (n2 - m - 1) as i32;
    let line = crate::contours::vertical_line(d, &quad.tightened(100.0), (p + 1) as f64);
    let lhs = integrate(|z| (z - x2).powi(p) * (z * z / 2.0).exp() / (z - r), &line, &quad.tightened(10.0))?.value
        / Complex64::new(0.0, 2.0 * PI);
    let upper = gaussian_window(2 * (n2 - m)) + r.re.abs();
    let bps: Vec<f64> = (0..=upper.ceil() as usize).map(|i| i as f64).collect();
    let sum = |y: f64| -> f64 {
        (m + 1..=n2)
            .map(|l| hermite_eval(n2 - l, x2) / factorial(n2 - l) * y.powi((l - m - 1) as i32) / factorial(l - m - 1))
            .sum()
    };
    let half = integrate_real(|y| (-r * y - y * y / 2.0).exp() * sum(y), &bps, &quad.tightened(10.0))?.value;
    let sign = if (n2 - m) % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = half * factorial(n2 - m - 1) * sign / SQRT_2PI;
    let params = serde_json::json!({"r": [r.re, r.im], "d": d, "x2": x2, "m": m, "n2": n2});
    Ok(ResummationCheck::new("gaussian_line", params, lhs, rhs))
}

/// The series form `e^{-x^2/2} sum_k h_k(x) h_{k+b-a}(y) / (sqrt(2 pi) (k+b-a)!)`,
/// summed with normalized Hermite functions up to `terms` terms.
pub fn phi_tilde_series(a: usize, b: usize, x: f64, y: f64, terms: usize) -> f64 {
    if a >= b {
        return 0.0;
    }
    let s = b - a;
    let px = hermite_functions(terms, x);
    let py = hermite_functions(terms + s, y);
    let mut total = 0.0;
    // sqrt(k! / (k+s)!) carried incrementally.
    let mut ratio = (1..=s).map(|j| 1.0 / (j as f64).sqrt()).product::<f64>();
    for k in 0..terms {
        total += px[k] * py[k + s] * ratio;
        ratio *= ((k + 1) as f64 / (k + 1 + s) as f64).sqrt();
    }
    total * ((y * y - x * x) / 4.0).exp()
}
