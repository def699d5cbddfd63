//! Exact samplers for Hermitian minor processes, the rising process started
//! from a fixed configuration, uniform Gelfand-Tsetlin patterns and bordered
//! matrix pairs, plus the one-step transition density.
//!
//! Every replica draws from its own ChaCha8 stream `(seed, replica)`, so
//! results do not depend on the number of worker threads.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Configuration;
use crate::special_fns::SQRT_2PI;

/// Entry law of a Wigner matrix. Off-diagonal entries have independent real
/// and imaginary parts of variance 1/2; diagonal entries are real with variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EntryDistribution {
    GueComplex,
    RademacherComplex,
    /// Symmetrized Pareto with tail index `4 + 2 eps`, standardized.
    HeavyTail { eps: f64 },
}

impl EntryDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EntryDistribution::HeavyTail { eps } if !(eps > 0.0 && eps.is_finite()) => Err(
                Error::InvalidDistribution(format!("heavy tail needs a finite 4+eps moment with eps > 0, got {eps}")),
            ),
            _ => Ok(()),
        }
    }

    /// A real draw with mean 0 and variance 1.
    fn unit_real<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryDistribution::GueComplex => rng.sample(StandardNormal),
            EntryDistribution::RademacherComplex => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::HeavyTail { eps } => {
                let alpha = 4.0 + 2.0 * eps;
                let u: f64 = 1.0 - rng.gen::<f64>();
                let x = u.powf(-1.0 / alpha) / (alpha / (alpha - 2.0)).sqrt();
                if rng.gen::<bool>() {
                    x
                } else {
                    -x
                }
            }
        }
    }

    pub fn off_diagonal<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.unit_real(rng), s * self.unit_real(rng))
    }

    pub fn diagonal<R: Rng>(&self, rng: &mut R) -> f64 {
        self.unit_real(rng)
    }
}

/// Replicas of a multilevel configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub model: String,
    pub params: serde_json::Value,
    /// Levels stored for each replica, in increasing order.
    pub levels: Vec<usize>,
    /// `replicas[r][i]` is the configuration at `levels[i]`.
    pub replicas: Vec<Vec<Configuration>>,
    /// Number of spectra in which coincident eigenvalues had to be split.
    pub perturbed: usize,
}

impl SampleBatch {
    pub fn replica_count(&self) -> usize {
        self.replicas.len()
    }

    fn level_index(&self, level: usize) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .ok_or_else(|| Error::IndexOutOfRange(format!("level {level} was not stored")))
    }

    /// The configurations at one level, one per replica.
    pub fn level(&self, level: usize) -> Result<Vec<&Configuration>> {
        let i = self.level_index(level)?;
        Ok(self.replicas.iter().map(|r| &r[i]).collect())
    }

    /// Whether consecutive stored levels interlace within `tol` in every replica.
    pub fn interlaces_within(&self, tol: f64) -> bool {
        self.replicas.iter().all(|r| {
            r.windows(2).zip(self.levels.windows(2)).all(|(c, l)| l[1] != l[0] + 1 || c[0].interlaces_within(&c[1], tol))
        })
    }

    /// Rows `(replica, level, index, value)` with 1-based index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replica,level,index,value\n");
        for (r, cfgs) in self.replicas.iter().enumerate() {
            for (l, c) in self.levels.iter().zip(cfgs) {
                for (i, v) in c.values().iter().enumerate() {
                    out.push_str(&format!("{r},{l},{},{v:e}\n", i + 1));
                }
            }
        }
        out
    }
}

/// RNG for one replica.
pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Below this size nalgebra's dense solver is faster than faer's.
const SMALL_EIGEN: usize = 48;

/// Eigenvalues of the leading `k x k` block of a Hermitian matrix, as a
/// decreasing configuration. Coincident values are split by 1e-14; the flag
/// reports whether that happened.
pub fn leading_minor_spectrum(h: &DMatrix<Complex64>, k: usize) -> (Configuration, bool) {
    let mut ev: Vec<f64> = if k <= SMALL_EIGEN {
        let block = h.view((0, 0), (k, k)).into_owned();
        block.symmetric_eigenvalues().iter().cloned().collect()
    } else {
        let m = Mat::<Complex64>::from_fn(k, k, |i, j| h[(i, j)]);
        m.self_adjoint_eigenvalues(Side::Lower).expect("Hermitian eigensolver failed")
    };
    ev.sort_by(|a, b| b.total_cmp(a));
    let mut perturbed = false;
    for i in 1..ev.len() {
        if ev[i] >= ev[i - 1] {
            ev[i] = ev[i - 1] - 1e-14 * (1.0 + ev[i - 1].abs());
            perturbed = true;
        }
    }
    (Configuration::new(ev).expect("finite decreasing spectrum"), perturbed)
}

fn wigner_matrix<R: Rng>(n: usize, dist: &EntryDistribution, rng: &mut R) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = Complex64::from(dist.diagonal(rng));
        for i in j + 1..n {
            let v = dist.off_diagonal(rng);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

fn run_replicas<F>(replicas: usize, seed: u64, levels: &[usize], draw: F) -> (Vec<Vec<Configuration>>, usize)
where
    F: Fn(&mut ChaCha8Rng) -> DMatrix<Complex64> + Sync,
{
    let out: Vec<(Vec<Configuration>, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let h = draw(&mut rng);
            let mut flag = false;
            let cfgs = levels
                .iter()
                .map(|&k| {
                    let (c, p) = leading_minor_spectrum(&h, k);
                    flag |= p;
                    c
                })
                .collect();
            (cfgs, flag)
        })
        .collect();
    let perturbed = out.iter().filter(|(_, p)| *p).count();
    (out.into_iter().map(|(c, _)| c).collect(), perturbed)
}

fn check_levels(levels: &[usize], max: usize, min: usize) -> Result<()> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidLevels("levels must be nonempty and increasing".into()));
    }
    if levels[0] < min || *levels.last().unwrap() > max {
        return Err(Error::InvalidLevels(format!("levels must lie in [{min}, {max}]")));
    }
    Ok(())
}

/// Wigner minors at selected levels.
pub fn sample_wigner_levels(
    n: usize,
    dist: &EntryDistribution,
    levels: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<SampleBatch> {
    dist.validate()?;
    check_levels(levels, n, 1)?;
    let (reps, perturbed) = run_replicas(replicas, seed, levels, |rng| wigner_matrix(n, dist, rng));
    Ok(SampleBatch {
        seed,
        model: "wigner".into(),
        params: serde_json::json!({"n": n, "dist": dist}),
        levels: levels.to_vec(),
        replicas: reps,
        perturbed,
    })
}

/// All minors `1..=n` of a Wigner matrix.
pub fn sample_wigner(n: usize, dist: &EntryDistribution, replicas: usize, seed: u64) -> Result<SampleBatch> {
    sample_wigner_levels(n, dist, &(1..=n).collect::<Vec<_>>(), replicas, seed)
}

/// All minors `1..=n` of a GUE matrix.
pub fn sample_gue_minors(n: usize, replicas: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidLevels("GUE size must be at least 1".into()));
    }
    let mut b = sample_wigner(n, &EntryDistribution::GueComplex, replicas, seed)?;
    b.model = "gue_minors".into();
    Ok(b)
}

/// Levels `m+1 ..= m+T` above a fixed configuration, from `diag(cfg)` with a
/// Gaussian border of width `T`.
pub fn sample_rising_from_config(cfg: &Configuration, t: usize, replicas: usize, seed: u64) -> Result<SampleBatch> {
    let m = cfg.level();
    let levels: Vec<usize> = (m + 1..=m + t).collect();
    sample_rising_levels(cfg, t, &levels, replicas, seed)
}

/// As [`sample_rising_from_config`], storing only the selected levels.
pub fn sample_rising_levels(
    cfg: &Configuration,
    t: usize,
    levels: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if t == 0 {
        return Err(Error::InvalidLevels("T must be at least 1".into()));
    }
    let m = cfg.level();
    check_levels(levels, m + t, m + 1)?;
    let gue = EntryDistribution::GueComplex;
    let (reps, perturbed) = run_replicas(replicas, seed, levels, |rng| {
        let n = m + t;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for (i, x) in cfg.values().iter().enumerate() {
            h[(i, i)] = Complex64::from(*x);
        }
        for j in m..n {
            h[(j, j)] = Complex64::from(gue.diagonal(rng));
            for i in 0..j {
                let v = gue.off_diagonal(rng);
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    });
    Ok(SampleBatch {
        seed,
        model: "rising_from_config".into(),
        params: serde_json::json!({"cfg": cfg.values(), "T": t}),
        levels: levels.to_vec(),
        replicas: reps,
        perturbed,
    })
}

/// Haar unitary from the QR factorization of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| EntryDistribution::GueComplex.off_diagonal(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform Gelfand-Tsetlin pattern with fixed top row, from the minors of
/// `U diag(top) U*` for Haar `U`. Levels `1..=m`.
pub fn sample_gt_uniform(top: &Configuration, replicas: usize, seed: u64) -> Result<SampleBatch> {
    let m = top.level();
    if m == 0 {
        return Err(Error::InvalidConfiguration("top row must be nonempty".into()));
    }
    let levels: Vec<usize> = (1..=m).collect();
    let d = DMatrix::<Complex64>::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        top.values().iter().map(|&x| Complex64::from(x)),
    ));
    let (mut reps, perturbed) = run_replicas(replicas, seed, &levels, |rng| {
        let u = haar_unitary(m, rng);
        &u * &d * u.adjoint()
    });
    // The top level is known exactly.
    for r in &mut reps {
        r[m - 1] = top.clone();
    }
    Ok(SampleBatch {
        seed,
        model: "gt_uniform".into(),
        params: serde_json::json!({"top": top.values()}),
        levels,
        replicas: reps,
        perturbed,
    })
}

/// Two Hermitian matrices of size `m + T` sharing their leading `m x m` block:
/// `a` is Wigner throughout, `b` has an independent GUE border.
#[derive(Debug, Clone, PartialEq)]
pub struct MtPair {
    pub m: usize,
    pub t: usize,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

pub fn sample_mt_pair(m: usize, t: usize, dist: &EntryDistribution, seed: u64) -> Result<MtPair> {
    sample_mt_pair_replica(m, t, dist, seed, 0)
}

/// The `replica`-th pair of a seeded family.
pub fn sample_mt_pair_replica(m: usize, t: usize, dist: &EntryDistribution, seed: u64, replica: usize) -> Result<MtPair> {
    dist.validate()?;
    let mut rng = replica_rng(seed, replica);
    let a = wigner_matrix(m + t, dist, &mut rng);
    let mut b = a.clone();
    let gue = EntryDistribution::GueComplex;
    for j in m..m + t {
        b[(j, j)] = Complex64::from(gue.diagonal(&mut rng));
        for i in 0..j {
            let v = gue.off_diagonal(&mut rng);
            b[(i, j)] = v;
            b[(j, i)] = v.conj();
        }
    }
    Ok(MtPair { m, t, a, b })
}

/// One-step transition density
/// `p(x; y) = 1_{x < y} Delta(y) / Delta(x) exp(-sum y^2/2 + sum x^2/2) / sqrt(2 pi)`.
pub fn transition_density(lower: &Configuration, upper: &Configuration) -> Result<f64> {
    if upper.level() != lower.level() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "upper level must have one more point ({} vs {})",
            upper.level(),
            lower.level()
        )));
    }
    if !lower.interlaces(upper) {
        return Ok(0.0);
    }
    let vdm = |v: &[f64]| -> f64 {
        let mut p = 1.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                p *= v[i] - v[j];
            }
        }
        p
    };
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / 2.0;
    Ok(vdm(upper.values()) / vdm(lower.values()) * (sq(lower.values()) - sq(upper.values())).exp() / SQRT_2PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_density_examples() {
        let lower = Configuration::new(vec![0.0]).unwrap();
        let upper = Configuration::new(vec![1.0, -1.0]).unwrap();
        let v = transition_density(&lower, &upper).unwrap();
        assert!((v - 2.0 * (-1.0f64).exp() / SQRT_2PI).abs() < 1e-15);
        let bad = Configuration::new(vec![-0.5, -1.0]).unwrap();
        assert_eq!(transition_density(&lower, &bad).unwrap(), 0.0);
        assert!(matches!(transition_density(&lower, &lower), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn determinism_and_interlacing() {
        let a = sample_gue_minors(6, 20, 7).unwrap();
        let b = sample_gue_minors(6, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.interlaces_within(1e-10));
        for r in &a.replicas {
            for (k, c) in r.iter().enumerate() {
                assert_eq!(c.level(), k + 1);
            }
        }
        let c = sample_gue_minors(6, 20, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rising_process_starts_above_config() {
        let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
        let b = sample_rising_from_config(&cfg, 3, 50, 1).unwrap();
        assert_eq!(b.levels, vec![3, 4, 5]);
        for r in &b.replicas {
            assert!(cfg.interlaces_within(&r[0], 1e-10));
        }
        assert!(b.interlaces_within(1e-10));
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = replica_rng(3, 0);
        let u = haar_unitary(5, &mut rng);
        let id = &u * u.adjoint();
        assert!((id - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn heavy_tail_validation() {
        assert!(EntryDistribution::HeavyTail { eps: 0.0 }.validate().is_err());
        assert!(EntryDistribution::HeavyTail { eps: 0.5 }.validate().is_ok());
    }

    #[test]
    fn mt_pair_shares_block() {
        let p = sample_mt_pair(4, 3, &EntryDistribution::RademacherComplex, 11).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(p.a[(i, j)], p.b[(i, j)]);
            }
        }
        assert_eq!(p.a, p.a.adjoint());
        assert_eq!(p.b, p.b.adjoint());
    }
}
