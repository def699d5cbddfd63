//! Scalar special functions: probabilists' Hermite polynomials, elementary
//! symmetric polynomials, the semicircle law and log-Pochhammer symbols.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::{factorial::ln_factorial as statrs_ln_factorial, gamma::ln_gamma};

/// `sqrt(2 pi)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Probabilists' Hermite polynomial `h_n(x)` via `h_{k+1} = x h_k - k h_{k-1}`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `h_0(x), ..., h_n(x)`.
pub fn hermite_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// `sum_r C(n,r) y^{n-r} h_r(x)`, which equals `h_n(x + y)`.
pub fn hermite_shift_expand(n: usize, x: f64, y: f64) -> f64 {
    let h = hermite_all(n, x);
    let mut binom = 1.0;
    let mut total = 0.0;
    for (r, hr) in h.iter().enumerate() {
        total += binom * y.powi((n - r) as i32) * hr;
        binom *= (n - r) as f64 / (r + 1) as f64;
    }
    total
}

/// Orthonormal Hermite functions `h_j(x) e^{-x^2/4} / sqrt(sqrt(2 pi) j!)` for `j < n`.
///
/// The normalized recurrence stays bounded for large `n`, unlike `h_j` itself.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push((-x * x / 4.0).exp() / SQRT_2PI.sqrt());
    if n >= 2 {
        out.push(x * out[0]);
    }
    for j in 1..n.saturating_sub(1) {
        let next = (x * out[j] - (j as f64).sqrt() * out[j - 1]) / ((j + 1) as f64).sqrt();
        out.push(next);
    }
    out
}

/// Coefficients `e_0, ..., e_k` of `prod_i (t + a_i) = sum_r e_r t^{k-r}`.
pub fn elem_symmetric_all(args: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; args.len() + 1];
    e[0] = 1.0;
    for (i, &a) in args.iter().enumerate() {
        for r in (1..=i + 1).rev() {
            e[r] += a * e[r - 1];
        }
    }
    e
}

/// The `r`-th elementary symmetric polynomial of `args`.
pub fn elem_symmetric(r: usize, args: &[f64]) -> f64 {
    if r > args.len() {
        return 0.0;
    }
    elem_symmetric_all(args)[r]
}

/// Semicircle density on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Semicircle cumulative distribution function.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// `(density, cdf)` of the semicircle law at `x`.
pub fn semicircle(x: f64) -> (f64, f64) {
    (semicircle_density(x), semicircle_cdf(x))
}

/// Inverse of [`semicircle_cdf`] on `[0, 1]`, by bisection to machine precision.
pub fn semicircle_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if semicircle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian upper tail `kappa(x) = (2 pi)^{-1/2} int_x^inf e^{-t^2/2} dt`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    statrs_ln_factorial(n as u64)
}

/// `n!` as a float; exact up to `20!`.
pub fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n).map(|k| k as f64).product()
    } else {
        ln_factorial(n).exp()
    }
}

/// Signed logarithm of a real product: `value = sign * exp(log_abs)`.
///
/// `sign == 0` marks an exact zero, in which case `log_abs` is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub log_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { log_abs: 0.0, sign: 1 };
    pub const ZERO: SignedLog = SignedLog { log_abs: f64::NEG_INFINITY, sign: 0 };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog { log_abs: v.abs().ln(), sign: if v > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        SignedLog { log_abs: self.log_abs + other.log_abs, sign: self.sign * other.sign }
    }

    pub fn div(self, other: SignedLog) -> SignedLog {
        assert!(!other.is_zero(), "division by an exact zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        SignedLog { log_abs: self.log_abs - other.log_abs, sign: self.sign * other.sign }
    }

    pub fn value(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign as f64 * self.log_abs.exp()
        }
    }
}

/// `log |(a)_k|` with sign, where `(a)_k = a (a+1) ... (a+k-1)`.
pub fn log_pochhammer(a: f64, k: usize) -> SignedLog {
    // Switch to log-gamma when all factors share a sign and the product is long.
    if k > 64 && a > 0.0 {
        return SignedLog { log_abs: ln_gamma(a + k as f64) - ln_gamma(a), sign: 1 };
    }
    let mut acc = SignedLog::ONE;
    for j in 0..k {
        acc = acc.mul(SignedLog::from_value(a + j as f64));
        if acc.is_zero() {
            return acc;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite_sum(n: usize, x: f64) -> f64 {
        let mut total = 0.0;
        for r in 0..=n / 2 {
            let c = (ln_factorial(n) - ln_factorial(r) - ln_factorial(n - 2 * r)).exp()
                * 2f64.powi(-(r as i32));
            let s = if r % 2 == 0 { 1.0 } else { -1.0 };
            total += s * c * x.powi((n - 2 * r) as i32);
        }
        total
    }

    #[test]
    fn hermite_small_degrees() {
        assert_eq!(hermite_eval(2, 1.0), 0.0);
        assert_eq!(hermite_eval(3, 2.0), 2.0);
        let s = hermite_sum(10, 1.7);
        assert!((hermite_eval(10, 1.7) - s).abs() < 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn shift_expansion() {
        assert!((hermite_shift_expand(1, 0.5, 0.5) - 1.0).abs() < 1e-15);
        assert!((hermite_shift_expand(6, 0.3, -1.2) - hermite_eval(6, -0.9)).abs() < 1e-12);
        assert_eq!(hermite_shift_expand(7, 0.4, 0.0), hermite_eval(7, 0.4));
    }

    #[test]
    fn hermite_functions_match_unnormalized() {
        let x = 0.7;
        let psi = hermite_functions(12, x);
        for (j, p) in psi.iter().enumerate() {
            let direct =
                hermite_eval(j, x) * (-x * x / 4.0).exp() / (SQRT_2PI * factorial(j)).sqrt();
            assert!((p - direct).abs() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn elementary_symmetric() {
        assert_eq!(elem_symmetric(2, &[1.0, 2.0, 3.0]), 11.0);
        assert_eq!(elem_symmetric(0, &[4.0]), 1.0);
        assert_eq!(elem_symmetric(0, &[]), 1.0);
        assert_eq!(elem_symmetric(4, &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn semicircle_values() {
        assert!((semicircle(0.0).0 - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle(2.0), (0.0, 1.0));
        assert_eq!(semicircle(-2.0), (0.0, 0.0));
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        for p in [0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((semicircle_cdf(semicircle_quantile(p)) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn pochhammer() {
        let p = log_pochhammer(3.0, 2);
        assert!((p.log_abs - 12f64.ln()).abs() < 1e-15 && p.sign == 1);
        assert_eq!(log_pochhammer(-0.3, 0), SignedLog::ONE);
        let p = log_pochhammer(1.5, 50);
        assert!((p.log_abs - (ln_gamma(51.5) - ln_gamma(1.5))).abs() < 1e-10);
        assert!(log_pochhammer(-2.0, 4).is_zero());
        let p = log_pochhammer(-2.5, 3);
        assert_eq!(p.sign, -1);
        assert!((p.value() - (-2.5 * -1.5 * -0.5)).abs() < 1e-14);
    }

    #[test]
    fn gaussian_tail_values() {
        assert!((gaussian_tail(0.0) - 0.5).abs() < 1e-16);
        assert!((gaussian_tail(1.0) + gaussian_tail(-1.0) - 1.0).abs() < 1e-15);
        // Reference values: erfc(0.8) / 2 and erfc(2) / 2.
        let t = gaussian_tail(0.8 * std::f64::consts::SQRT_2);
        assert!((t - 0.5 * 0.257_899_035_292_339_5).abs() < 1e-16);
        let t = gaussian_tail(2.0 * std::f64::consts::SQRT_2);
        assert!((t - 0.5 * 0.004_677_734_981_047_266).abs() < 1e-18);
    }
}
