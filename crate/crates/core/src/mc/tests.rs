use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::stats::{ks_critical_1pct, ks_statistic};
use super::*;
use crate::engine::{Coefficient, SeriesResult};

fn params(l: usize, t: f64, sweeps: usize) -> MCParams {
    MCParams::new(3, 3, l, t, sweeps)
}

#[test]
fn cold_start_without_sweeps_is_fully_ordered() {
    let mut p = params(4, 0.5, 0);
    p.thermalization = 0;
    let r = run_simulation(&p).unwrap();
    assert_eq!(r.estimate("s_n").unwrap().value, 1.0);
    assert_eq!(r.estimate("m_abs").unwrap().value, 1.0);
    assert_eq!(r.estimate("bond_energy").unwrap().value, -1.0);
    assert_eq!(r.samples, 1);
}

#[test]
fn heatbath_polar_angle_passes_ks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kappa in [0.0, 0.7, 6.0, 40.0] {
        let xs: Vec<f64> = (0..100_000).map(|_| sample_cos_theta(kappa, &mut rng)).collect();
        let exact = |c: f64| {
            if kappa == 0.0 {
                (c + 1.0) / 2.0
            } else {
                ((kappa * (c - 1.0)).exp() - (-2.0 * kappa).exp()) / (1.0 - (-2.0 * kappa).exp())
            }
        };
        let d = ks_statistic(&xs, exact);
        assert!(d < ks_critical_1pct(xs.len()), "kappa={kappa}: D={d}");
    }
}

#[test]
fn overrelaxation_preserves_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 3, 4] {
        let mut cfg = SpinConfig::hot(3, n, 4, &mut rng);
        let (beta, h) = (2.0, 0.3);
        let mut field = vec![0.0; n];
        for x in 0..cfg.volume() {
            let before = cfg.energy(beta, h);
            cfg.overrelax_site(x, beta, h, &mut field);
            let after = cfg.energy(beta, h);
            assert!((before - after).abs() < 1e-10, "N={n} x={x}: {before} {after}");
        }
    }
}

#[test]
fn spin_norms_stay_unit() {
    let mut p = MCParams::new(3, 3, 2, 1.0, 1_000_000);
    p.thermalization = 0;
    p.measure_every = 1000;
    p.mgf_a.clear();
    for algorithm in [Algorithm::Heatbath, Algorithm::Metropolis] {
        p.algorithm = algorithm;
        p.sweeps = if algorithm == Algorithm::Heatbath { 1_000_000 } else { 200_000 };
        let mut cfg = SpinConfig::cold(3, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut field = vec![0.0; 3];
        let mut proposal = vec![0.0; 3];
        for sweep in 0..p.sweeps {
            for x in 0..cfg.volume() {
                match algorithm {
                    Algorithm::Heatbath => cfg.heatbath_site(x, 1.0, 0.0, &mut field, &mut rng),
                    Algorithm::Metropolis => {
                        cfg.metropolis_site(x, 1.0, 0.0, 0.8, &mut field, &mut proposal, &mut rng);
                    }
                }
                cfg.overrelax_site(x, 1.0, 0.0, &mut field);
            }
            if sweep % 64 == 63 {
                cfg.renormalize();
            }
        }
        assert!(cfg.max_norm_error() < 1e-12, "{algorithm:?}: {}", cfg.max_norm_error());
    }
}

#[test]
fn heatbath_and_metropolis_agree_on_small_lattice() {
    let mut p = MCParams::new(3, 3, 2, 1.0, 400_000);
    p.thermalization = 2_000;
    p.overrelax = 0;
    p.mgf_a.clear();
    p.algorithm = Algorithm::Heatbath;
    let hb = run_simulation(&p).unwrap();
    p.algorithm = Algorithm::Metropolis;
    p.seed = 1;
    let mc = run_simulation(&p).unwrap();
    let (a, b) = (hb.estimate("bond_energy").unwrap(), mc.estimate("bond_energy").unwrap());
    let sigma = (a.error * a.error + b.error * b.error).sqrt();
    assert!((a.value - b.value).abs() < 3.0 * sigma, "{a:?} {b:?}");
    assert!(mc.acceptance_rates["metropolis"] > 0.2);
}

#[test]
fn infinite_temperature_is_disordered() {
    let mut p = MCParams::new(3, 3, 4, 1e12, 20_000);
    p.cold_start = false;
    p.thermalization = 100;
    let r = run_simulation(&p).unwrap();
    let e = r.estimate("bond_energy").unwrap();
    assert!(e.value.abs() < 3.0 * e.error + 1e-12, "{e:?}");
    let s = r.estimate("s_n").unwrap();
    assert!(s.value.abs() < 3.0 * s.error, "{s:?}");
}

#[test]
fn same_seed_same_result() {
    let mut p = params(4, 0.3, 500);
    p.seed = 42;
    let mut a = run_simulation(&p).unwrap();
    let mut b = run_simulation(&p).unwrap();
    a.wall_time = 0.0;
    b.wall_time = 0.0;
    assert_eq!(a, b);
    p.seed = 43;
    let mut c = run_simulation(&p).unwrap();
    c.wall_time = 0.0;
    assert_ne!(a, c);
}

#[test]
fn rejects_bad_params() {
    let mut p = params(5, 0.3, 10);
    assert!(run_simulation(&p).is_err());
    p.l = 4;
    p.temperature = -1.0;
    assert!(run_simulation(&p).is_err());
    p.temperature = 0.3;
    p.h = -0.1;
    assert!(run_simulation(&p).is_err());
    let json = r#"{"dim":3,"n_components":3,"l":4,"temperature":0.2,"sweeps":10,"algorithm":"heatbath","bogus":1}"#;
    assert!(serde_json::from_str::<MCParams>(json).is_err());
}

#[test]
fn torus_green_solves_the_zero_mode_free_poisson_equation() {
    let (d, l) = (3usize, 8usize);
    let g = torus_green(d, l);
    let cfg = SpinConfig::cold(d, 1, l);
    let volume = g.len();
    for x in 0..volume {
        let mut lap = 2.0 * d as f64 * g[x];
        for axis in 0..d {
            lap -= g[cfg.forward(x, axis)];
            lap -= g[cfg.shifted(x, axis, l - 1)];
        }
        let want = if x == 0 { 1.0 - 1.0 / volume as f64 } else { -1.0 / volume as f64 };
        assert!((lap - want).abs() < 1e-12);
    }
    assert!(g.iter().sum::<f64>().abs() < 1e-10);
}

#[test]
fn torus_series_approaches_infinite_volume() {
    let g16 = torus_green(3, 16)[0];
    let g32 = torus_green(3, 32)[0];
    let g_inf = 0.252_731_009_858_663;
    assert!(g32 < g_inf && g16 < g32);
    let s = torus_series(3, 16, 3);
    assert!((s.coefficients[1].value + g16).abs() < 1e-15);
}

fn synthetic_run(t: f64, m_abs: f64, error: f64) -> MCResult {
    let p = MCParams::new(3, 3, 16, t, 0);
    MCResult {
        schema_version: MC_SCHEMA_VERSION,
        params: p,
        algorithm_used: Algorithm::Heatbath,
        samples: 0,
        estimates: vec![
            Estimate { name: "m_abs".into(), value: m_abs, error, blocks: 16 },
            Estimate { name: MCResult::mgf_name(1.0), value: 3.0, error: 0.01, blocks: 16 },
        ],
        acceptance_rates: Default::default(),
        non_thermalized: false,
        wall_time: 0.0,
    }
}

#[test]
fn synthetic_cubic_residuals_give_slope_three() {
    let series = SeriesResult {
        coefficients: vec![
            Coefficient { value: 1.0, uncertainty: 0.0 },
            Coefficient { value: -0.25, uncertainty: 0.0 },
        ],
    };
    let runs: Vec<MCResult> = [0.15, 0.2, 0.3]
        .iter()
        .map(|&t| synthetic_run(t, 1.0 - 0.25 * t + 0.4 * t * t * t, 0.0))
        .collect();
    let report = verify_series(&series, &runs, 1, "m_abs", 1.5).unwrap();
    assert!((report.slope - 3.0).abs() < 1e-9, "{}", report.slope);
    assert_eq!(report.status, VerifyStatus::Pass);
    let noisy: Vec<MCResult> = [0.15, 0.2, 0.3]
        .iter()
        .map(|&t| synthetic_run(t, 1.0 - 0.25 * t + 1e-6, 1e-3))
        .collect();
    let report = verify_series(&series, &noisy, 1, "m_abs", 1.5).unwrap();
    assert_eq!(report.status, VerifyStatus::Inconclusive);
    assert!(verify_series(&series, &runs[..2], 1, "m_abs", 1.5).is_err());
}

#[test]
fn bound_reports_flag_violations() {
    let g00 = 0.252_731_009_858_663;
    let good = synthetic_run(0.2, 0.95, 1e-4);
    assert!(check_infrared(&good, g00).unwrap().pass);
    let bad = synthetic_run(0.2, 0.85, 1e-4);
    let report = check_infrared(&bad, g00).unwrap();
    assert!(!report.pass && (report.bound - (1.0 - 0.6 * g00)).abs() < 1e-15);
    let hot = synthetic_run(3.0, 0.01, 1e-3);
    assert!(check_infrared(&hot, g00).unwrap().pass);
    assert!(check_moment_bound(&good, 0.0, g00).unwrap().pass);
    // the fixture's generating function of 3.0 exceeds 2 e^{G/2} ≈ 2.27
    assert!(!check_moment_bound(&good, 1.0, g00).unwrap().pass);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    use rand_distr::{Cauchy, Distribution, Normal};
    let gauss: Vec<f64> = Normal::new(0.0, g00.sqrt()).unwrap().sample_iter(&mut rng).take(50_000).collect();
    assert!(moment_bound_from_samples(&gauss, 1.0, g00).pass);
    let heavy: Vec<f64> = Cauchy::new(0.0, 1.0).unwrap().sample_iter(&mut rng).take(50_000).map(|v: f64| v.abs().min(30.0)).collect();
    assert!(!moment_bound_from_samples(&heavy, 1.0, g00).pass);
}

#[test]
fn merged_chains_shrink_errors() {
    let mut p = params(4, 0.3, 2000);
    p.seed = 1;
    let a = run_simulation(&p).unwrap();
    p.seed = 2;
    let b = run_simulation(&p).unwrap();
    let m = merge_chains(&[a.clone(), b]).unwrap();
    assert!(m.estimate("m_abs").unwrap().error < a.estimate("m_abs").unwrap().error);
    let mut q = p.clone();
    q.temperature = 0.4;
    let c = run_simulation(&q).unwrap();
    assert!(merge_chains(&[a, c]).is_err());
}
