use std::f64::consts::PI;

use reglab_core::estimator::bounds::{is_stable, log_log_slope};
use reglab_core::estimator::liouville::aux_ratios;
use reglab_core::estimator::*;
use reglab_core::math::{ModulusG, Vector};
use reglab_core::problem::{fixture, fixtures, CoefficientField, Problem};
use reglab_core::solver::*;

fn mesh(t_end: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

fn field(id: &str, dim: usize) -> CoefficientField {
    fixture(id, dim).unwrap().field().unwrap().clone()
}

fn run(f: &CoefficientField, u0: impl Fn(&Vector) -> f64, grid: &Grid, horizon: f64, snaps: Vec<f64>, dt_frac: f64) -> GridSolution {
    let dt = dt_frac * max_stable_dt(&[f], grid, 0.0).unwrap();
    solve_linear(f, u0, horizon, grid, &SchemeConfig::new(dt).with_snapshots(snaps)).unwrap()
}

#[test]
fn heat_sine_passes_pw_with_sharp_constants() {
    let grid = Grid::new(1, PI, 401).unwrap();
    let sol = run(&field("heat", 1), |x| x[0].sin(), &grid, 1.0, mesh(1.0, 20), 0.5);
    let rep = verify_theorem_pw(&sol, &ModulusG::zero(), 1.0).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.to_text());
    assert_eq!(rep.constants["c1"], 3.0);
    assert_eq!(rep.constants["c2"], 0.25);
    // at t = 0.25 the interior maximum slope is e^{-t} cos(0) = e^{-0.25}
    let row = rep.rows.iter().find(|r| (r.t - 0.25).abs() < 1e-12).unwrap();
    assert!((row.measured - (-0.25f64).exp()).abs() < 1e-3, "{}", row.measured);
    for r in &rep.rows {
        assert!((r.margin + r.measured - r.bound).abs() <= 1e-12 * r.bound.abs().max(1.0));
    }
}

#[test]
fn ou_tanh_passes_pw() {
    let grid = Grid::new(1, 8.0, 401).unwrap();
    let sol = run(&fixtures::ou(1).unwrap(), |x| x[0].tanh(), &grid, 1.0, mesh(1.0, 10), 0.5);
    let rep = verify_theorem_pw(&sol, &ModulusG::zero(), 1.0).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.to_text());
}

#[test]
fn constant_datum_has_zero_lipschitz() {
    let grid = Grid::new(2, 3.0, 31).unwrap();
    let sol = run(&field("heat", 2), |_| 2.0, &grid, 0.5, mesh(0.5, 5), 0.9);
    let rep = verify_theorem_pw(&sol, &ModulusG::zero(), 1.0).unwrap();
    assert!(rep.rows.iter().all(|r| r.measured == 0.0 && r.pass));
}

#[test]
fn seminorms_scale_linearly() {
    let f = fixtures::quartic(1).unwrap().with_source(|_, x| x[0].cos());
    let grid = Grid::new(1, 3.0, 121).unwrap();
    // q = 1 + x⁴ would make the default margin swallow the box
    let scheme = SchemeConfig::new(0.9 * max_stable_dt(&[&f], &grid, 0.0).unwrap())
        .with_margin(1.0)
        .with_snapshots(vec![0.1]);
    let base = solve_linear(&f, |x| x[0].sin(), 0.2, &grid, &scheme).unwrap();
    for s in [0.5, 3.0, 17.0] {
        let fs = f.clone().with_source(move |_, x| s * x[0].cos());
        let scaled = solve_linear(&fs, |x| s * x[0].sin(), 0.2, &grid, &scheme).unwrap();
        let a = seminorms(&base, 0.1, 0.5, 0.5).unwrap();
        let b = seminorms(&scaled, 0.1, 0.5, 0.5).unwrap();
        for (x, y) in [(a.lip, b.lip), (a.holder, b.holder), (a.osc, b.osc)] {
            assert!((s * x - y).abs() <= 1e-12 * y.abs(), "{s}: {x} {y}");
        }
    }
}

#[test]
fn potential_gradient_constant_is_refinement_stable() {
    let f = field("heat_potential", 1);
    let fit = |n: usize| {
        let grid = Grid::new(1, 4.0, n).unwrap();
        let sol = run(&f, |x| x[0].sin(), &grid, 1.0, mesh(1.0, 10), 0.5);
        verify_cauchy_bounds(&sol, 1.0, 2.0).unwrap().fitted_constant.unwrap()
    };
    let (a, b) = (fit(201), fit(401));
    assert!(a.is_finite() && a > 0.0);
    assert!(is_stable(b, a), "{a} {b}");
}

#[test]
fn gradient_from_rough_source_grows_like_sqrt_t() {
    let f = field("heat", 1).with_source(|_, x| x[0].signum());
    let grid = Grid::new(1, 4.0, 801).unwrap();
    let times: Vec<f64> = (0..8).map(|i| 0.01 * 2f64.powi(i) / 2.0).collect();
    let sol = run(&f, |_| 0.0, &grid, 0.64, times, 0.5);
    let rep = verify_cauchy_bounds(&sol, 0.0, 0.0).unwrap();
    let slope = rep.slope.unwrap();
    assert!((0.4..=0.6).contains(&slope), "{slope}");
}

#[test]
fn ou_conserves_lipschitz_bound() {
    let grid = Grid::new(1, 8.0, 401).unwrap();
    let sol = run(&fixtures::ou(1).unwrap(), |x| Datum::SmoothAbs { eps: 0.1 }.eval(x), &grid, 2.0, mesh(2.0, 20), 0.5);
    let c = GrowthConstants {
        k0: 0.0,
        k_alpha: 0.0,
        k1: 1.0,
        h0: 0.0,
        h_alpha: 0.0,
        h1: 0.0,
        alpha: 0.5,
    };
    let (osc, lip) = verify_growth_bound(&sol, &c, 1.0).unwrap();
    assert!(lip.fitted_constant.unwrap() <= 1.5, "{}", lip.to_text());
    assert!(lip.rows.iter().all(|r| r.measured <= 1.5));
    assert_eq!(osc.fitted_constant, Some(0.0));
}

#[test]
fn holder_datum_gives_quarter_power_decay() {
    let grid = Grid::new(1, 4.0, 801).unwrap();
    let times: Vec<f64> = (0..7).map(|i| 0.01 * 2f64.powi(i)).collect();
    let sol = run(&field("heat", 1), |x| Datum::SmoothRootAbs { eps: 0.01 }.eval(x), &grid, 0.64, times, 0.5);
    let c = GrowthConstants {
        k0: 0.0,
        k_alpha: 1.0,
        k1: 0.0,
        h0: 0.0,
        h_alpha: 0.0,
        h1: 0.0,
        alpha: 0.5,
    };
    let (_, lip) = verify_growth_bound(&sol, &c, 1.0).unwrap();
    let slope = lip.slope.unwrap();
    assert!((-0.35..=-0.15).contains(&slope), "{slope}");
}

#[test]
fn transport_oscillation_constant_is_finite() {
    let f = field("transport", 1);
    let grid = Grid::new(1, 4.0, 401).unwrap();
    let sol = run(&f, |x| Datum::SmoothAbs { eps: 0.1 }.eval(x), &grid, 1.0, mesh(1.0, 10), 0.9);
    let c = GrowthConstants {
        k0: 0.0,
        k_alpha: 0.0,
        k1: 1.0,
        h0: 0.0,
        h_alpha: 0.0,
        h1: 0.0,
        alpha: 0.5,
    };
    let (osc, _) = verify_growth_bound(&sol, &c, 0.0).unwrap();
    assert!(osc.fitted_constant.unwrap().is_finite());
    // characteristics contract: u(t, x) = u₀(x e^{−t}) is 1-Lipschitz
    let s = seminorms(&sol, 1.0, 0.5, 1.0).unwrap();
    assert!(s.lip <= 1.0 + 1e-9);
}

#[test]
fn holder_bound_and_cordes_alpha() {
    let grid = Grid::new(1, PI, 201).unwrap();
    let sol = run(&field("heat", 1), |x| x[0].sin(), &grid, 1.0, mesh(1.0, 10), 0.5);
    let rep = verify_holder_bound(&sol, 0.5, 1.0).unwrap();
    assert!(matches!(rep.verdict, Verdict::Consistent(_)));
    let constant = run(&field("heat", 1), |_| 1.0, &grid, 1.0, mesh(1.0, 4), 0.5);
    assert!(verify_holder_bound(&constant, 0.5, 1.0).unwrap().rows.iter().all(|r| r.measured == 0.0));

    let cordes = fixtures::cordes().unwrap();
    let solve = |n| {
        let g = Grid::new(1, 4.0, n).unwrap();
        run(&cordes, |x| x[0].tanh(), &g, 1.0, mesh(1.0, 10), 0.5)
    };
    let alphas: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
    let scan = largest_stable_alpha(&solve(161), &solve(321), 1.0, &alphas).unwrap();
    assert!(scan.largest_stable.unwrap() > 0.0, "{scan:?}");
}

#[test]
fn local_bound_on_two_drift_family() {
    let fam = fixtures::isaacs_two_drift().unwrap();
    let fit = |n: usize| {
        let grid = Grid::new(1, 6.0, n).unwrap();
        let members: Vec<_> = fam.members().iter().collect();
        let dt = 0.5 * max_stable_dt(&members, &grid, 0.0).unwrap();
        let sol = solve_isaacs(
            &fam,
            |x| Datum::NegSmoothAbs { eps: 0.1 }.eval(x),
            1.0,
            &grid,
            &SchemeConfig::new(dt).with_snapshots(mesh(1.0, 10)),
        )
        .unwrap();
        let err = verify_local_bound(&sol, &Vector::from_slice(&[3.5]), 1.0);
        assert!(matches!(err, Err(reglab_core::Error::BallOutsideGrid { .. })));
        verify_local_bound(&sol, &Vector::from_slice(&[0.0]), 1.0).unwrap().fitted_constant.unwrap()
    };
    let (a, b) = (fit(241), fit(481));
    assert!(a.is_finite() && is_stable(b, a), "{a} {b}");
}

#[test]
fn liouville_classification_and_ratios() {
    let problem = Problem::Linear(field("heat", 1));
    let cases = [
        (ModulusG::zero(), true, true),
        (ModulusG::inverse_tail(2.0, 1.0).unwrap(), true, false),
        (ModulusG::inverse_tail(1.0, 1.0).unwrap(), true, true),
    ];
    for (g, bounded, holder) in cases {
        let rep = liouville_diagnose(&problem, &g, 1.0, 0.5, 1.0, None).unwrap();
        assert_eq!(rep.bounded_class, bounded, "{}", g.name());
        assert_eq!(rep.holder_class, holder, "{}", g.name());
        assert!(rep.ratio_decreasing, "{:?}", rep.ratios);
        assert!(rep.ratios.last().unwrap().ratio < 0.01, "{}: {:?}", g.name(), rep.ratios);
    }
    let ratios = aux_ratios(&ModulusG::zero(), 1.0, 1.0, &[10.0]).unwrap();
    assert!((ratios[0].ratio - 9.5 / 50.0).abs() < 1e-9);
}

#[test]
fn long_run_heat_oscillation_decays() {
    let problem = Problem::Linear(field("heat", 1));
    let run = LongRun {
        datum: Datum::Sine { k: 1.0 },
        grid: Grid::new(1, PI, 101).unwrap(),
        horizon: 50.0,
        snapshots: 10,
    };
    let rep = liouville_diagnose(&problem, &ModulusG::zero(), 1.0, 0.5, 1.0, Some(&run)).unwrap();
    assert!(rep.long_run_decay.unwrap() <= 0.05);
}

#[test]
fn slope_helper() {
    let t = [1.0, 2.0, 4.0];
    let y: Vec<f64> = t.iter().map(|t: &f64| 3.0 * t.powf(-0.25)).collect();
    assert!((log_log_slope(&t, &y).unwrap() + 0.25).abs() < 1e-12);
}
