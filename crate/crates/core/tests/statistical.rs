use rgue::asymptotics::{default_horizon, eval_action, eval_limit_action, find_critical_point, limit_critical_point, ActionParams};
use rgue::kernels::{BulkScaling, Configuration, ScalingVariant};
use rgue::sampling::{sample_gue_minors, sample_rising_from_config, sample_wigner, EntryDistribution};
use rgue::statistics::{estimate_correlation, ks_critical, ks_two_sample, Bins};
use rgue::Complex64;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn bootstrap_error_shrinks_with_replicas() {
    let scaling = BulkScaling::new(0.0, 8, ScalingVariant::Density).unwrap();
    let bins = Bins::new(-3.0, 3.0, 6).unwrap();
    let se = |replicas: usize| {
        let batch = sample_gue_minors(8, replicas, 41).unwrap();
        let grid = estimate_correlation(&batch, 8, 1, &scaling, &bins).unwrap();
        grid.std_errors.iter().sum::<f64>() / grid.std_errors.len() as f64
    };
    let ratio = se(4000) / se(2000);
    let target = std::f64::consts::FRAC_1_SQRT_2;
    assert!((ratio / target - 1.0).abs() < 0.2, "SE ratio {ratio}");
}

#[test]
fn empty_start_has_the_law_of_gue_minors() {
    let t = 3;
    let replicas = 10_000;
    let rising = sample_rising_from_config(&Configuration::empty(), t, replicas, 7).unwrap();
    let minors = sample_gue_minors(t, replicas, 8).unwrap();
    for index in 0..t {
        let pick = |batch: &rgue::sampling::SampleBatch| -> Vec<f64> {
            batch.level(t).unwrap().iter().map(|c| c.values()[index]).collect()
        };
        let d = ks_two_sample(&pick(&rising), &pick(&minors));
        let crit = ks_critical(0.01, replicas as f64 / 2.0);
        assert!(d < crit, "eigenvalue {index}: KS {d} vs {crit}");
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = Configuration::new(vec![1.0, -1.0]).unwrap();
    let run = || {
        let a = sample_rising_from_config(&cfg, 3, 64, 99).unwrap();
        let b = sample_wigner(5, &EntryDistribution::HeavyTail { eps: 0.5 }, 64, 99).unwrap();
        let scaling = BulkScaling::new(0.0, 5, ScalingVariant::SqrtN).unwrap();
        let grid = estimate_correlation(&b, 5, 2, &scaling, &Bins::new(-2.0, 2.0, 8).unwrap()).unwrap();
        (a, b, grid.std_errors)
    };
    assert_eq!(in_pool(1, run), in_pool(3, run));
}

#[test]
fn critical_points_approach_the_limit_as_m_grows() {
    for energy in [0.0, 0.5, 1.0] {
        let dist: Vec<f64> = [200, 500, 1000, 2000]
            .iter()
            .map(|&m| {
                let p = ActionParams::new(Configuration::semicircle_quantiles(m), energy, default_horizon(m)).unwrap();
                let s = find_critical_point(&p, 1e-12).unwrap();
                assert!(s.z0.im > 0.0 && s.residual < 1e-10);
                (s.z0 - limit_critical_point(energy)).norm()
            })
            .collect();
        for w in dist.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "X = {energy}: {dist:?}");
        }
    }
}

#[test]
fn action_derivative_error_fits_the_bound() {
    // sup over a compact set of |S_m' - S_*'| / (log^2 m / T + |z| T / m)
    let fitted = |m: usize| {
        let t = default_horizon(m);
        let p = ActionParams::new(Configuration::semicircle_quantiles(m), 0.5, t).unwrap();
        let (lm, tf, mf) = ((m as f64).ln(), t as f64, m as f64);
        let mut c: f64 = 0.0;
        for i in 0..=10 {
            for j in 0..=10 {
                let z = Complex64::new(-1.0 + 0.2 * i as f64, 0.5 + 0.1 * j as f64);
                let diff = (eval_action(&p, z, 1).unwrap() - eval_limit_action(0.5, z, 1).unwrap()).norm();
                c = c.max(diff / (lm * lm / tf + z.norm() * tf / mf));
            }
        }
        c
    };
    let (c1, c2) = (fitted(500), fitted(1000));
    assert!(c1.is_finite() && c2.is_finite());
    assert!((c2 / c1) < 2.0 && (c2 / c1) > 0.5, "c(500) = {c1}, c(1000) = {c2}");
}
