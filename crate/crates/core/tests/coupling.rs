use reglab_core::coupling::*;
use reglab_core::math::{ModulusG, SymMatrix, Vector};
use reglab_core::problem::{fixture, CoefficientField};
use reglab_core::Error;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erf;

fn field(id: &str, dim: usize) -> CoefficientField {
    fixture(id, dim).unwrap().field().unwrap().clone()
}

fn v1(x: f64) -> Vector {
    Vector::from_slice(&[x])
}

fn brownian(x: f64, y: f64, horizon: f64, dt: f64, n: usize, seed: u64) -> CouplingConfig {
    CouplingConfig::new(field("heat", 1), v1(x), v1(y), horizon, dt, n, seed).unwrap()
}

/// Position-dependent anisotropic `q ≥ I`, so `σ(x)` and `σ(y)` do not commute.
fn anisotropic() -> CoefficientField {
    CoefficientField::new("aniso", 2, 1.0, f64::INFINITY, |_, x| {
        let a = 1.0 + 0.5 * (1.0 + x[0].sin());
        let d = 1.0 + 0.3 * (1.0 + x[1].cos());
        let o = 0.4 * (x[0] + x[1]).sin();
        SymMatrix::from_rows(&[&[a, o], &[o, d]]).unwrap()
    })
    .unwrap()
}

#[test]
fn brownian_survival_matches_erf() {
    // Z = X − Y is a Brownian motion with variance 8t until it hits 0
    let cfg = brownian(1.0, 0.0, 1.0, 1e-3, 20_000, 7);
    let mesh = [0.25, 0.5, 1.0];
    let stats = coupling_probability(&cfg, &mesh).unwrap();
    for row in &stats.rows {
        let exact = erf(1.0 / (4.0 * row.t.sqrt()));
        assert!((row.p_hat - exact).abs() <= 3.0 * row.ci_half, "t = {}: {} vs {}", row.t, row.p_hat, exact);
    }
    assert!((stats.qv_rate - 8.0).abs() < 0.08, "qv rate {}", stats.qv_rate);
    assert!(stats.fitted_k > 0.0 && stats.fitted_k.is_finite());
}

#[test]
fn survival_is_monotone_in_time_and_distance() {
    let mesh: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
    let near = coupling_probability(&brownian(0.5, 0.0, 1.0, 1e-3, 4000, 3), &mesh).unwrap();
    let far = coupling_probability(&brownian(1.0, 0.0, 1.0, 1e-3, 4000, 3), &mesh).unwrap();
    for w in near.rows.windows(2) {
        assert!(w[1].p_hat <= w[0].p_hat);
    }
    for (a, b) in near.rows.iter().zip(&far.rows) {
        assert!(a.p_hat < b.p_hat);
    }
}

#[test]
fn coupled_paths_stay_bitwise_equal() {
    let cfg = CouplingConfig::new(field("ou", 2), Vector::from_slice(&[0.3, 0.0]), Vector::from_slice(&[0.0, 0.2]), 1.0, 1e-3, 500, 11).unwrap();
    let mesh = [0.1, 0.5, 1.0];
    let s = simulate_pair(&cfg, &mesh).unwrap();
    let mut coupled = 0;
    for p in 0..s.paths.len() {
        for m in 0..mesh.len() {
            if !s.uncoupled_at(p, m) {
                coupled += 1;
                assert_eq!(s.x_at(p, m), s.y_at(p, m));
            }
        }
        if let Some(tc) = s.coupling_time(p) {
            assert!(tc > 0.0 && tc <= 1.0);
        }
    }
    assert!(coupled > 100);
}

#[test]
fn cross_covariance_matches_mirror_matrix() {
    let mut cfg = CouplingConfig::new(anisotropic(), Vector::from_slice(&[0.4, -0.2]), Vector::from_slice(&[-0.3, 0.5]), 1.0, 1e-2, 200_000, 5).unwrap();
    let m = pair_increment_moments(&cfg).unwrap();
    assert!(m.relative_error < 0.05, "{:?}", m);
    // mirror term alone in 1D: Cov = −2λ dt
    cfg = brownian(1.0, 0.0, 1.0, 1e-2, 200_000, 5);
    let m = pair_increment_moments(&cfg).unwrap();
    assert!((m.empirical.get(0, 0) / (-0.02) - 1.0).abs() < 0.05);
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64)
}

#[test]
fn x_marginal_matches_single_diffusion() {
    let f = field("ou", 1);
    let (t, dt, n) = (0.5, 2e-3, 20_000);
    let cfg = CouplingConfig::new(f.clone(), v1(1.0), v1(-0.5), t, dt, n, 21).unwrap();
    let pair = simulate_pair(&cfg, &[t]).unwrap();
    let xs: Vec<f64> = (0..n).map(|p| pair.x_at(p, 0)[0]).collect();
    let zs: Vec<f64> = simulate_single(&f, &v1(1.0), t, dt, n, 99).unwrap().iter().map(|v| v[0]).collect();
    let ((mx, vx), (mz, vz)) = (mean_var(&xs), mean_var(&zs));
    assert!((mx - mz).abs() < 3.0 * ((vx + vz) / n as f64).sqrt(), "{mx} vs {mz}");
    assert!((vx - vz).abs() < 3.0 * (2.0 * (vx * vx + vz * vz) / n as f64).sqrt(), "{vx} vs {vz}");
    // OU exact law: mean e^{−t} x, variance 1 − e^{−2t}
    let var = 1.0 - (-2.0 * t).exp();
    assert!((mx - (-t).exp()).abs() < 3.0 * (var / n as f64).sqrt());
    assert!((vx - var).abs() < 3.0 * var * (2.0 / (n - 1) as f64).sqrt());
}

#[test]
fn y_marginal_shift_is_of_order_eps() {
    // Y jumps onto X once |X − Y| ≤ ε, so its mean moves by at most ε
    let f = field("ou", 1);
    let (t, dt, n) = (0.5, 2e-3, 20_000);
    let cfg = CouplingConfig::new(f, v1(1.0), v1(-0.5), t, dt, n, 21).unwrap();
    let pair = simulate_pair(&cfg, &[t]).unwrap();
    let (my, _) = mean_var(&(0..n).map(|p| pair.y_at(p, 0)[0]).collect::<Vec<_>>());
    let shift = my + 0.5 * (-t).exp();
    assert!(shift.abs() < cfg.eps(), "{shift} vs eps {}", cfg.eps());
}

#[test]
fn mc_difference_of_heat_indicator() {
    let (x, y, t) = (0.2, -0.1, 0.25);
    let cfg = brownian(x, y, t, 1e-3, 20_000, 17);
    let est = mc_solution(&cfg, |z: &Vector| if z[0] > 0.0 { 1.0 } else { 0.0 }, t).unwrap();
    let phi = Normal::new(0.0, 1.0).unwrap();
    let exact = phi.cdf(x / (2.0 * t).sqrt()) - phi.cdf(y / (2.0 * t).sqrt());
    assert!((est.difference - exact).abs() <= 3.0 * est.ci + 0.01, "{} vs {exact}", est.difference);
    assert!(est.coupling_inequality);
    assert!(est.pathwise_equal_after_coupling);
    assert_eq!(est.u0_sup, 1.0);
}

#[test]
fn same_seed_same_statistics_for_any_thread_count() {
    let cfg = brownian(0.7, 0.0, 0.5, 1e-3, 2000, 42);
    let mesh = [0.1, 0.5];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| coupling_probability(&cfg, &mesh).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.coupling_times, b.coupling_times);
    assert_eq!(a.rows.iter().map(|r| r.p_hat).collect::<Vec<_>>(), b.rows.iter().map(|r| r.p_hat).collect::<Vec<_>>());
    let other = coupling_probability(&brownian(0.7, 0.0, 0.5, 1e-3, 2000, 43), &mesh).unwrap();
    assert_ne!(a.coupling_times, other.coupling_times);
}

#[test]
fn csv_outputs() {
    let stats = coupling_probability(&brownian(1.0, 0.0, 1.0, 1e-2, 200, 1), &[0.5, 1.0]).unwrap();
    let mut buf = Vec::new();
    stats.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,p_hat,ci_half,n\n0.5,"));
    assert_eq!(text.lines().count(), 3);
    let mut buf = Vec::new();
    stats.write_histogram_csv(1.0, 4, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let total: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, stats.coupling_times.len());
}

#[test]
fn bad_configs() {
    let f = field("heat", 1);
    assert!(CouplingConfig::new(f.clone(), v1(0.0), Vector::from_slice(&[0.0, 1.0]), 1.0, 1e-3, 10, 0).is_err());
    assert!(CouplingConfig::new(f.clone(), v1(0.0), v1(1.0), 1.0, 0.0, 10, 0).is_err());
    assert!(CouplingConfig::new(f.clone(), v1(0.0), v1(1.0), 1.0, 1e-3, 0, 0).is_err());
    let cfg = brownian(1.0, 0.0, 1.0, 1e-2, 10, 0);
    assert!(coupling_probability(&cfg, &[2.0]).is_err());
    let same = brownian(0.5, 0.5, 1.0, 1e-2, 10, 0);
    assert_eq!(pair_increment_moments(&same).unwrap_err(), Error::CoincidentPoints);
    // starting coupled: survival is zero everywhere
    let s = coupling_probability(&same, &[0.5]).unwrap();
    assert_eq!(s.rows[0].p_hat, 0.0);
    let p = simulate_pair(&same, &[0.5, 1.0]).unwrap();
    assert!(p.paths.iter().all(|r| r.coupling_step == Some(0) && r.x == r.y));
}

#[test]
fn heat_residual_closed_form() {
    let heat = field("heat", 2);
    let g = ModulusG::zero();
    let (t0, delta) = (0.5, 1.0);
    let (k, c0) = (3.0, 2.0);
    let samples = sample_points(2, t0, delta, 2.0, 500, 4);
    let aux = reglab_core::math::AuxFunction::new(&g, 1.0, delta).unwrap();
    for p in &samples {
        let r = residual_at(&heat, 1.0, &aux, k, c0, t0, p).unwrap();
        assert!((r - (2.0 * c0 * (p.t - t0) + k)).abs() < 1e-9);
    }
    let zero = supersolution_residual(&heat, 1.0, &g, 0.0, 0.0, t0, delta, &samples).unwrap();
    assert!(zero.min_residual.abs() < 1e-12);
}

#[test]
fn theorem_constants_give_nonnegative_residual() {
    let g = ModulusG::zero();
    let (t0, delta) = (0.5, 1.0);
    let aux = reglab_core::math::AuxFunction::new(&g, 1.0, delta).unwrap();
    let (k, c0) = theorem_constants(2.0, 0.0, t0, aux.f_delta());
    assert!(k > c0 * t0);
    for (id, dim) in [("heat", 1), ("heat", 2), ("ou", 1), ("ou", 2)] {
        let samples = sample_points(dim, t0, delta, 3.0, 10_000, 8);
        let rep = supersolution_residual(&field(id, dim), 1.0, &g, k, c0, t0, delta, &samples).unwrap();
        assert_eq!(rep.n, 10_000);
        assert!(rep.min_residual >= -1e-6, "{id} {dim}: {}", rep.min_residual);
    }
}

#[test]
fn residual_rejects_bad_samples() {
    let heat = field("heat", 1);
    let g = ModulusG::zero();
    let on_diag = [SamplePoint { t: 0.5, x: v1(0.1), y: v1(0.1) }];
    assert_eq!(supersolution_residual(&heat, 1.0, &g, 1.0, 1.0, 0.5, 1.0, &on_diag).unwrap_err(), Error::SamplePointOnDiagonal);
    let late = [SamplePoint { t: 0.8, x: v1(0.1), y: v1(0.0) }];
    assert!(supersolution_residual(&heat, 1.0, &g, 1.0, 1.0, 0.5, 1.0, &late).is_err());
    let far = [SamplePoint { t: 0.5, x: v1(2.0), y: v1(0.0) }];
    assert!(supersolution_residual(&heat, 1.0, &g, 1.0, 1.0, 0.5, 1.0, &far).is_err());
}

#[test]
fn ou_pairs_contract_in_mean() {
    let cfg = CouplingConfig::new(field("ou", 1), v1(0.8), v1(-0.4), 1.0, 1e-3, 4000, 2).unwrap();
    let mesh: Vec<f64> = (1..=5).map(|i| 0.2 * i as f64).collect();
    let s = simulate_pair(&cfg, &mesh).unwrap();
    for m in 0..mesh.len() {
        let gaps: Vec<f64> = (0..s.paths.len()).map(|p| (s.x_at(p, m) - s.y_at(p, m)).norm()).collect();
        let n = gaps.len() as f64;
        let mean = gaps.iter().sum::<f64>() / n;
        let sd = (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean <= 1.2 + 3.0 * sd / n.sqrt(), "t = {}: {mean}", mesh[m]);
    }
}

#[test]
fn survival_near_one_for_short_times_and_linear_in_distance() {
    let mesh = [1e-3, 0.5];
    let runs: Vec<CouplingStats> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&d| coupling_probability(&brownian(d, 0.0, 0.5, 1e-4, 4000, 9), &mesh).unwrap())
        .collect();
    assert!(runs[2].rows[0].p_hat > 0.99);
    // erf is nearly linear here, so halving the distance nearly halves P
    let exact = |d: f64| erf(d / (4.0 * 0.5f64.sqrt()));
    for (s, d) in runs.iter().zip([0.25, 0.5, 1.0]) {
        assert!((s.rows[1].p_hat - exact(d)).abs() < 3.0 * s.rows[1].ci_half + 0.01);
    }
    assert!(runs[0].rows[1].p_hat < runs[1].rows[1].p_hat && runs[1].rows[1].p_hat < runs[2].rows[1].p_hat);
    let ratio = runs[1].rows[1].p_hat / runs[2].rows[1].p_hat;
    assert!((ratio - exact(0.5) / exact(1.0)).abs() < 0.08, "{ratio}");
    let ks: Vec<f64> = runs.iter().map(|s| s.fitted_k).collect();
    assert!(ks.iter().all(|k| (k / ks[2] - 1.0).abs() < 0.35), "{ks:?}");
}

#[test]
fn constant_datum_has_zero_difference() {
    let est = mc_solution(&brownian(0.5, -0.5, 1.0, 1e-3, 1000, 4), |_: &Vector| 2.5, 1.0).unwrap();
    assert_eq!(est.difference, 0.0);
    assert_eq!(est.u_x, 2.5);
}

#[test]
fn indicator_difference_at_unit_time() {
    let est = mc_solution(&brownian(0.5, -0.5, 1.0, 1e-3, 20_000, 6), |z: &Vector| if z[0] > 0.0 { 1.0 } else { 0.0 }, 1.0).unwrap();
    let phi = Normal::new(0.0, 1.0).unwrap();
    let exact = phi.cdf(0.5 / 2f64.sqrt()) - phi.cdf(-0.5 / 2f64.sqrt());
    assert!((exact - 0.2763).abs() < 1e-4);
    assert!((est.difference - exact).abs() <= 3.0 * est.ci, "{} vs {exact}", est.difference);
    assert!(est.difference <= 2.0 * erf(0.25) + 3.0 * est.ci);
}
