//! Empirical correlation functions, determinantal correlations, gauge
//! invariant kernel comparison and gap statistics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{BulkScaling, Configuration};
use crate::sampling::{replica_rng, SampleBatch};

/// Number of bootstrap resamples used for standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Uniform bins on `[lo, hi)`, shared by every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) || count == 0 {
            return Err(Error::InvalidConfiguration(format!("bad bins [{lo}, {hi}) x {count}")));
        }
        Ok(Bins { lo, hi, count })
    }

    /// The default resolution, a window split into 32 bins.
    pub fn window(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, 32)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if x < self.lo || x >= self.hi {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.lo + (i as f64 + 0.5) * self.width()).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count).map(|i| self.lo + i as f64 * self.width()).collect()
    }
}

/// Binned estimate of the `k`-point correlation function in bulk coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationGrid {
    pub k: usize,
    pub bins: Bins,
    pub replicas: usize,
    /// Row-major over `k` coordinates, first coordinate slowest.
    pub counts: Vec<f64>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub scaling: BulkScaling,
}

impl CorrelationGrid {
    /// Bin centers of a flat index.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        let c = self.bins.centers();
        let mut idx = vec![0; self.k];
        let mut rest = flat;
        for d in (0..self.k).rev() {
            idx[d] = rest % self.bins.count;
            rest /= self.bins.count;
        }
        idx.into_iter().map(|i| c[i]).collect()
    }

    /// CSV with bin centers, estimate, SE and an optional prediction column.
    pub fn to_csv(&self, prediction: Option<&[f64]>) -> String {
        let mut out = String::new();
        for d in 0..self.k {
            out.push_str(&format!("x{},", d + 1));
        }
        out.push_str("estimate,se");
        if prediction.is_some() {
            out.push_str(",kernel");
        }
        out.push('\n');
        for i in 0..self.estimates.len() {
            for c in self.center(i) {
                out.push_str(&format!("{c:e},"));
            }
            out.push_str(&format!("{:e},{:e}", self.estimates[i], self.std_errors[i]));
            if let Some(p) = prediction {
                out.push_str(&format!(",{:e}", p[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Sparse per-replica tuple census: `(flat bin, count)`.
fn census(points: &[f64], k: usize, bins: &Bins) -> Vec<(usize, u32)> {
    let idx: Vec<usize> = points.iter().filter_map(|&x| bins.index(x)).collect();
    let nb = bins.count;
    let mut map = std::collections::BTreeMap::<usize, u32>::new();
    match k {
        1 => {
            for &i in &idx {
                *map.entry(i).or_default() += 1;
            }
        }
        2 => {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    if a != b {
                        *map.entry(i * nb + j).or_default() += 1;
                    }
                }
            }
        }
        _ => {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    for (c, &l) in idx.iter().enumerate() {
                        if c != a && c != b {
                            *map.entry((i * nb + j) * nb + l).or_default() += 1;
                        }
                    }
                }
            }
        }
    }
    map.into_iter().collect()
}

/// Standard deviation over resamples of replica-level sums.
fn bootstrap_se(per_replica: &[Vec<(usize, u32)>], size: usize, norm: f64, seed: u64) -> Vec<f64> {
    let n = per_replica.len();
    let totals: Vec<Vec<f64>> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = replica_rng(seed, usize::MAX - b);
            let mut acc = vec![0.0; size];
            for _ in 0..n {
                for &(i, c) in &per_replica[rng.gen_range(0..n)] {
                    acc[i] += c as f64;
                }
            }
            acc
        })
        .collect();
    (0..size)
        .map(|i| {
            let mean = totals.iter().map(|t| t[i]).sum::<f64>() / BOOTSTRAP_RESAMPLES as f64;
            let var = totals.iter().map(|t| (t[i] - mean).powi(2)).sum::<f64>() / (BOOTSTRAP_RESAMPLES - 1) as f64;
            var.sqrt() / norm
        })
        .collect()
}

/// Binned `k`-point correlation at one level, in the bulk coordinates of `scaling`.
pub fn estimate_correlation(
    batch: &SampleBatch,
    level: usize,
    k: usize,
    scaling: &BulkScaling,
    bins: &Bins,
) -> Result<CorrelationGrid> {
    if !(1..=3).contains(&k) {
        return Err(Error::SizeLimit(format!("correlation order {k} (supported 1..=3)")));
    }
    let cfgs = batch.level(level)?;
    let offsets: Vec<Vec<f64>> = cfgs.iter().map(|c| c.values().iter().map(|&x| scaling.offset(x)).collect()).collect();
    estimate_correlation_points(&offsets, k, scaling, bins, batch.seed)
}

/// As [`estimate_correlation`], from per-replica point lists already in bulk coordinates.
pub fn estimate_correlation_points(
    replicas: &[Vec<f64>],
    k: usize,
    scaling: &BulkScaling,
    bins: &Bins,
    seed: u64,
) -> Result<CorrelationGrid> {
    if replicas.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let per: Vec<Vec<(usize, u32)>> = replicas.par_iter().map(|p| census(p, k, bins)).collect();
    if per.iter().all(|c| c.is_empty()) {
        return Err(Error::EmptyWindow);
    }
    let size = bins.count.pow(k as u32);
    let mut counts = vec![0.0; size];
    for c in &per {
        for &(i, n) in c {
            counts[i] += n as f64;
        }
    }
    let norm = replicas.len() as f64 * bins.width().powi(k as i32);
    let estimates = counts.iter().map(|c| c / norm).collect();
    let std_errors = bootstrap_se(&per, size, norm, seed);
    Ok(CorrelationGrid { k, bins: *bins, replicas: replicas.len(), counts, estimates, std_errors, scaling: *scaling })
}

/// `det[K(p_i, p_j)]` for points `(level, position)`.
pub fn determinantal_correlation<F>(kernel: F, points: &[(usize, f64)]) -> Result<f64>
where
    F: Fn(usize, f64, usize, f64) -> Result<Complex64>,
{
    let k = points.len();
    let mut m = DMatrix::<Complex64>::zeros(k, k);
    for (i, &(li, xi)) in points.iter().enumerate() {
        for (j, &(lj, xj)) in points.iter().enumerate() {
            m[(i, j)] = kernel(li, xi, lj, xj)?;
        }
    }
    let d = m.determinant();
    if d.im.abs() > 1e-8 * d.re.abs().max(1.0) {
        return Err(Error::NonNegligibleImaginaryPart(d.im));
    }
    Ok(d.re)
}

/// Deviations between two kernels through gauge-invariant functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDistanceReport {
    pub points: Vec<(usize, f64)>,
    pub diagonal: f64,
    pub cycles: f64,
    pub determinants: f64,
    pub max_deviation: f64,
}

/// Above this many points only consecutive triples enter the 3x3 comparison.
const ALL_TRIPLES_MAX: usize = 24;

/// Compares kernel matrices `A[i][j] = A(p_i, p_j)` and the same for `B`.
pub fn gauge_invariant_distance_matrices(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> (f64, f64, f64) {
    let p = a.nrows();
    let mut diag: f64 = 0.0;
    let mut cyc: f64 = 0.0;
    let mut det: f64 = 0.0;
    for i in 0..p {
        diag = diag.max((a[(i, i)] - b[(i, i)]).norm());
        for j in i + 1..p {
            cyc = cyc.max((a[(i, j)] * a[(j, i)] - b[(i, j)] * b[(j, i)]).norm());
        }
    }
    let sub_det = |m: &DMatrix<Complex64>, idx: [usize; 3]| DMatrix::from_fn(3, 3, |r, c| m[(idx[r], idx[c])]).determinant();
    let mut triples = Vec::new();
    if p <= ALL_TRIPLES_MAX {
        for i in 0..p {
            for j in i + 1..p {
                for l in j + 1..p {
                    triples.push([i, j, l]);
                }
            }
        }
    } else {
        triples.extend((0..p.saturating_sub(2)).map(|i| [i, i + 1, i + 2]));
    }
    for t in triples {
        det = det.max((sub_det(a, t) - sub_det(b, t)).norm());
    }
    (diag, cyc, det)
}

/// Gauge-invariant comparison of two kernels on a point set.
pub fn gauge_invariant_distance<A, B>(a: A, b: B, points: &[(usize, f64)]) -> Result<KernelDistanceReport>
where
    A: Fn(usize, f64, usize, f64) -> Result<Complex64> + Sync,
    B: Fn(usize, f64, usize, f64) -> Result<Complex64> + Sync,
{
    if points.len() < 2 {
        return Err(Error::DimensionMismatch("need at least two points".into()));
    }
    let fill = |f: &(dyn Fn(usize, f64, usize, f64) -> Result<Complex64> + Sync)| -> Result<DMatrix<Complex64>> {
        let p = points.len();
        let vals: Vec<Complex64> = (0..p * p)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij % p, ij / p);
                f(points[i].0, points[i].1, points[j].0, points[j].1)
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_vec(p, p, vals))
    };
    let ma = fill(&a)?;
    let mb = fill(&b)?;
    let (diagonal, cycles, determinants) = gauge_invariant_distance_matrices(&ma, &mb);
    Ok(KernelDistanceReport {
        points: points.to_vec(),
        diagonal,
        cycles,
        determinants,
        max_deviation: diagonal.max(cycles).max(determinants),
    })
}

/// Window counts and nearest-neighbour spacings in bulk coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub count_mean: f64,
    pub count_variance: f64,
    pub spacing_bins: Bins,
    pub spacing_counts: Vec<usize>,
    pub spacings: Vec<f64>,
}

pub fn counting_and_gaps(batch: &SampleBatch, level: usize, scaling: &BulkScaling, window: (f64, f64)) -> Result<GapStats> {
    let cfgs = batch.level(level)?;
    let offsets: Vec<Vec<f64>> = cfgs.iter().map(|c| c.values().iter().map(|&x| scaling.offset(x)).collect()).collect();
    gaps_from_points(&offsets, window)
}

/// As [`counting_and_gaps`] from per-replica point lists in bulk coordinates.
pub fn gaps_from_points(replicas: &[Vec<f64>], window: (f64, f64)) -> Result<GapStats> {
    let mut counts = Vec::with_capacity(replicas.len());
    let mut spacings = Vec::new();
    for pts in replicas {
        let mut inside: Vec<f64> = pts.iter().cloned().filter(|&x| x >= window.0 && x < window.1).collect();
        inside.sort_by(f64::total_cmp);
        counts.push(inside.len() as f64);
        spacings.extend(inside.windows(2).map(|w| w[1] - w[0]));
    }
    if counts.iter().all(|&c| c == 0.0) {
        return Err(Error::EmptyWindow);
    }
    let n = counts.len() as f64;
    let count_mean = counts.iter().sum::<f64>() / n;
    let count_variance = if counts.len() > 1 {
        counts.iter().map(|c| (c - count_mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let spacing_bins = Bins::new(0.0, 4.0, 40)?;
    let mut spacing_counts = vec![0; spacing_bins.count];
    for s in &spacings {
        if let Some(i) = spacing_bins.index(*s) {
            spacing_counts[i] += 1;
        }
    }
    Ok(GapStats { count_mean, count_variance, spacing_bins, spacing_counts, spacings })
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value `sqrt(-ln(alpha/2)/2) / sqrt(n_eff)` of the KS statistic.
pub fn ks_critical(alpha: f64, n_eff: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / n_eff.sqrt()
}

/// Offsets of every configuration in bulk coordinates.
pub fn bulk_offsets(cfgs: &[&Configuration], scaling: &BulkScaling) -> Vec<Vec<f64>> {
    cfgs.iter().map(|c| c.values().iter().map(|&x| scaling.offset(x)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{eval_sine, ScalingVariant};
    use rand_distr::{Distribution, Poisson};

    fn scaling() -> BulkScaling {
        BulkScaling::new(0.0, 1, ScalingVariant::SqrtN).unwrap()
    }

    #[test]
    #[allow(clippy::erasing_op, clippy::identity_op)]
    fn tuple_census_of_single_configuration() {
        let bins = Bins::new(0.0, 4.0, 4).unwrap();
        let pts = vec![vec![0.5, 1.5, 1.7, 3.2]];
        let g1 = estimate_correlation_points(&pts, 1, &scaling(), &bins, 1).unwrap();
        assert_eq!(g1.counts, vec![1.0, 2.0, 0.0, 1.0]);
        let g2 = estimate_correlation_points(&pts, 2, &scaling(), &bins, 1).unwrap();
        assert_eq!(g2.counts.iter().sum::<f64>(), 12.0);
        assert_eq!(g2.counts[1 * 4 + 1], 2.0);
        assert_eq!(g2.counts[0 * 4 + 1], 2.0);
        let g3 = estimate_correlation_points(&pts, 3, &scaling(), &bins, 1).unwrap();
        assert_eq!(g3.counts.iter().sum::<f64>(), 24.0);
        assert!(estimate_correlation_points(&[vec![9.0]], 1, &scaling(), &bins, 1).is_err());
    }

    #[test]
    fn poisson_pairs_factorize() {
        let bins = Bins::new(0.0, 1.0, 4).unwrap();
        let pois = Poisson::new(8.0).unwrap();
        let reps: Vec<Vec<f64>> = (0..4000)
            .map(|r| {
                let mut rng = replica_rng(5, r);
                let n = pois.sample(&mut rng) as usize;
                (0..n).map(|_| rng.gen::<f64>()).collect()
            })
            .collect();
        let g1 = estimate_correlation_points(&reps, 1, &scaling(), &bins, 2).unwrap();
        let g2 = estimate_correlation_points(&reps, 2, &scaling(), &bins, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let f = i * 4 + j;
                let pred = g1.estimates[i] * g1.estimates[j];
                assert!((g2.estimates[f] - pred).abs() < 3.0 * g2.std_errors[f] + 1e-9, "bin {i},{j}");
            }
        }
    }

    #[test]
    fn determinantal_small_cases() {
        let diag = |_: usize, x: f64, _: usize, y: f64| Ok(Complex64::from(if x == y { 2.0 + x } else { 0.0 }));
        assert_eq!(determinantal_correlation(diag, &[(1, 0.5)]).unwrap(), 2.5);
        assert!((determinantal_correlation(diag, &[(1, 0.0), (1, 1.0)]).unwrap() - 6.0).abs() < 1e-14);
        let sine = |_: usize, x: f64, _: usize, y: f64| Ok(Complex64::from(eval_sine(std::f64::consts::PI, x, y)));
        assert!(determinantal_correlation(sine, &[(1, 0.3), (1, 0.3)]).unwrap().abs() < 1e-12);
        let bad = |_: usize, _: f64, _: usize, _: f64| Ok(Complex64::new(0.0, 1.0));
        assert!(matches!(determinantal_correlation(bad, &[(1, 0.0)]), Err(Error::NonNegligibleImaginaryPart(_))));
    }

    #[test]
    fn gauge_distance_examples() {
        let pts: Vec<(usize, f64)> = (0..6).map(|i| (1, -1.0 + 0.4 * i as f64)).collect();
        let a = |_: usize, x: f64, _: usize, y: f64| Ok(Complex64::from(eval_sine(1.0, x, y)));
        let b = |_: usize, x: f64, _: usize, y: f64| Ok(Complex64::from(x.exp() * eval_sine(1.0, x, y) / y.exp()));
        assert!(gauge_invariant_distance(a, b, &pts).unwrap().max_deviation < 1e-10);
        assert_eq!(gauge_invariant_distance(a, a, &pts).unwrap().max_deviation, 0.0);
        let c = |_: usize, x: f64, _: usize, y: f64| Ok(Complex64::from(eval_sine(1.3, x, y)));
        let r = gauge_invariant_distance(a, c, &pts).unwrap();
        assert!((r.diagonal - 0.3 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn picket_fence_and_poisson_gaps() {
        let fence: Vec<Vec<f64>> = (0..10).map(|_| (0..20).map(|i| i as f64 * 0.5).collect()).collect();
        let g = gaps_from_points(&fence, (0.0, 10.0)).unwrap();
        assert!(g.spacings.iter().all(|&s| (s - 0.5).abs() < 1e-12));
        assert_eq!(g.spacing_counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(g.count_variance, 0.0);

        let pois = Poisson::new(50.0).unwrap();
        let reps: Vec<Vec<f64>> = (0..200)
            .map(|r| {
                let mut rng = replica_rng(9, r);
                let n = pois.sample(&mut rng) as usize;
                (0..n).map(|_| 10.0 * rng.gen::<f64>()).collect()
            })
            .collect();
        let g = gaps_from_points(&reps, (0.0, 10.0)).unwrap();
        let ks = ks_statistic(&g.spacings, |s| 1.0 - (-5.0 * s).exp());
        assert!(ks < ks_critical(0.05, g.spacings.len() as f64), "{ks}");
    }

    #[test]
    fn ks_two_sample_identical() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_two_sample(&a, &b), 1.0);
    }
}
