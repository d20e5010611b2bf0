use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reglab_core::math::{ModulusG, SymMatrix, Vector};
use reglab_core::problem::audit::{check_lyapunov, pw_lhs};
use reglab_core::problem::fixtures::{self, variable_ellipticity_floor};
use reglab_core::problem::isaacs::linear_value;
use reglab_core::problem::*;

fn linear(id: &str, dim: usize) -> CoefficientField {
    fixtures::fixture(id, dim).unwrap().field().unwrap().clone()
}

#[test]
fn ou_modulus_passes_with_zero_g() {
    let rep = check_pw(&linear("ou", 2), &ModulusG::zero(), &SampleRange::cube(2, 10.0, 1.0), 5000, false, 7);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.max_violation <= 0.0);
}

#[test]
fn quartic_modulus_passes_with_linear_g_unrestricted() {
    for dim in [1, 2] {
        let f = linear("quartic", dim);
        let rep = check_pw(&f, &ModulusG::linear(1.0).unwrap(), &SampleRange::cube(dim, 5.0, 1.0), 20000, false, 11);
        assert!(rep.pass, "dim {dim}: {rep:?}");
    }
}

#[test]
fn anti_dissipative_drift_fails_with_squared_distance() {
    let rep = check_pw(&linear("anti_ou", 1), &ModulusG::zero(), &SampleRange::cube(1, 3.0, 1.0), 100, true, 2);
    assert!(!rep.pass);
    assert!(rep.max_violation > 0.0);
}

#[test]
fn modulus_audit_is_monotone_in_g() {
    let f = linear("cubic_drift", 1);
    let range = SampleRange::cube(1, 2.0, 1.0);
    let small = check_pw(&f, &ModulusG::linear(1.0).unwrap(), &range, 2000, true, 5);
    let large = check_pw(&f, &ModulusG::linear(30.0).unwrap(), &range, 2000, true, 5);
    assert!(!small.pass);
    assert!(large.pass, "{large:?}");
    assert!(large.max_violation <= small.max_violation);
}

#[test]
fn variable_ellipticity_passes_sufficient_form_with_fitted_scale() {
    let f = linear("variable_ellipticity", 2);
    let range = SampleRange::cube(2, 5.0, 1.0);
    let probe = check_prec(&f, &ModulusG::linear(1.0).unwrap(), variable_ellipticity_floor, &range, 20000, 3, PrecForm::Sufficient);
    let c = probe.fitted_constant.unwrap();
    assert!(c.is_finite() && c > 0.0);
    let rep = check_prec(
        &f,
        &ModulusG::linear(1.01 * c).unwrap(),
        variable_ellipticity_floor,
        &range,
        20000,
        3,
        PrecForm::Sufficient,
    );
    assert!(rep.pass, "{rep:?}");
    // Sufficient form: ‖q(x)−q(y)‖²/(2μ) = N(|x|²−|y|²)²/(2μ) ≤ N(|x|+|y|)²r²/(2μ), and the
    // ratio to μ r² stays bounded by 2N on |x−y| ≤ 1 (|x|+|y| ≤ 2 max, max² ≤ 2μ + 1).
    assert!(c <= 2.0 * 2.0 + 1e-9, "{c}");
}

#[test]
fn variable_ellipticity_root_form_needs_unbounded_scale() {
    let f = linear("variable_ellipticity", 1);
    let rep = check_prec(&f, &ModulusG::linear(1.0).unwrap(), variable_ellipticity_floor, &SampleRange::cube(1, 5.0, 1.0), 20000, 3, PrecForm::Root);
    assert!(!rep.pass);
}

#[test]
fn constant_diffusion_prec_passes_trivially() {
    let f = CoefficientField::new("2I", 2, 2.0, 1.0, |_, _| SymMatrix::scalar(2, 2.0)).unwrap();
    let rep = check_prec(&f, &ModulusG::zero(), |_, _| 2.0, &SampleRange::cube(2, 5.0, 1.0), 1000, 1, PrecForm::Root);
    assert!(rep.pass);
    assert_eq!(rep.max_violation, 0.0);
}

#[test]
fn prec_fails_for_small_g0_with_witness() {
    // q = 1 + x², floor λ = 1: root form left side is (|x|−|y|)²/|x−y| ≈ |x−y| near the same sign.
    let f = linear("variable_ellipticity", 1);
    let rep = check_prec(&f, &ModulusG::constant(0.01).unwrap(), |_, _| 1.0, &SampleRange::cube(1, 3.0, 1.0), 2000, 9, PrecForm::Root);
    assert!(!rep.pass);
    let w = rep.witness.unwrap();
    let (x, y) = (w.x[0], w.y.unwrap()[0]);
    // independent evaluation of the witness
    let lhs = (x.abs() - y.abs()).powi(2) / (x - y).abs();
    assert!((lhs - 0.01 - rep.max_violation).abs() < 1e-9);
}

#[test]
fn lyapunov_quadratic_cases() {
    let range = SampleRange::cube(2, 10.0, 1.0);
    let rep = check_lyapunov(&linear("ou", 2), &LyapunovCandidate::quadratic(2, 4.0), &range, 5000, 1);
    assert!(rep.pass, "{rep:?}");
    let rep = check_lyapunov(&linear("quartic", 2), &LyapunovCandidate::quadratic(2, 4.0), &range, 5000, 1);
    assert!(rep.pass, "{rep:?}");
    let rep = check_lyapunov_quadratic(&linear("ou", 2), &range, 5000, 1);
    assert!(rep.pass);
    assert!(rep.fitted_constant.unwrap() <= 2.0 + 1e-12);

    let r1 = SampleRange::cube(1, 10.0, 1.0);
    let rep = check_lyapunov_quadratic(&linear("cubic_drift", 1), &r1, 5000, 1);
    assert!(!rep.pass, "{rep:?}");
}

#[test]
fn lyapunov_rejects_too_small_m() {
    let rep = check_lyapunov(&linear("heat", 1), &LyapunovCandidate::quadratic(1, 0.5), &SampleRange::cube(1, 0.5, 1.0), 500, 1);
    // A φ = 2 > 0.5 (1 + x²) for |x| ≤ 0.5
    assert!(!rep.pass);
}

#[test]
fn g_asymptotic_classification() {
    let a = check_g_asymptotics(&ModulusG::inverse_tail(2.0, 1.0).unwrap(), 1.0, 0.5).unwrap();
    assert!(a.liouville_bounded, "{a:?}");
    // increments of ∫ r^{-1/2}: 2(√10^{k+1} − √10^k)
    for (k, inc) in a.tail_increments.iter().enumerate() {
        let exact = 2.0 * (10f64.powf((k + 1) as f64 / 2.0) - 10f64.powf(k as f64 / 2.0));
        assert!((inc - exact).abs() < 1e-6 * exact, "{k}: {inc} vs {exact}");
    }
    let a = check_g_asymptotics(&ModulusG::inverse_tail(8.0, 1.0).unwrap(), 1.0, 0.5).unwrap();
    assert!(!a.liouville_bounded);
    let a = check_g_asymptotics(&ModulusG::inverse_tail(1.0, 1.0).unwrap(), 1.0, 0.5).unwrap();
    assert!(a.liouville_holder);
    assert!((a.limsup_sg_infinity - 1.0).abs() < 1e-12);
    let a = check_g_asymptotics(&ModulusG::power(1.0, -1.0).unwrap(), 1.0, 0.5).unwrap();
    assert_eq!(a.integral_01, None);
    assert!(a.holder_fixed_alpha && !a.sg_to_zero);
    let a = check_g_asymptotics(&ModulusG::power(2.0, -0.5).unwrap(), 1.0, 0.5).unwrap();
    assert!(a.sg_to_zero);
    assert!((a.integral_01.unwrap() - 4.0).abs() < 1e-8);
}

#[test]
fn isaacs_singleton_matches_linear() {
    let f = linear("ou", 2);
    let fam = IsaacsFamily::singleton(f.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x = Vector::from_slice(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
        let p = Vector::from_slice(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]);
        let xx = SymMatrix::diag(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            + SymMatrix::from_upper(2, |i, j| if i == j { 0.0 } else { 0.3 });
        let a = isaacs_value(&fam, 0.0, &x, &p, &xx).unwrap();
        let b = linear_value(&f, 0.0, &x, &p, &xx);
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn trivial_pair_has_zero_left_side() {
    let f = linear("quartic", 2);
    let x = Vector::from_slice(&[1.5, -0.5]);
    assert_eq!(pw_lhs(&f, 0.0, &x, &x).unwrap(), (0.0, 0.0));
}

proptest! {
    #[test]
    fn isaacs_value_is_nonincreasing_in_hessian(
        p in -5.0f64..5.0,
        x0 in -2.0f64..2.0,
        a in -3.0f64..3.0,
        d in 0.0f64..3.0,
    ) {
        let fam = fixtures::isaacs_two_drift().unwrap();
        let x = Vector::from_slice(&[x0]);
        let pv = Vector::from_slice(&[p]);
        let v0 = isaacs_value(&fam, 0.0, &x, &pv, &SymMatrix::diag(&[a])).unwrap();
        let v1 = isaacs_value(&fam, 0.0, &x, &pv, &SymMatrix::diag(&[a + d])).unwrap();
        prop_assert!(v1 <= v0 + 1e-12);
    }

    #[test]
    fn isaacs_2d_monotone_under_psd_perturbation(
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<CoefficientField> = (0..4).map(|k| {
            let s = 1.0 + k as f64 * 0.25;
            CoefficientField::new("m", 2, 1.0, 1.0, move |_, _| SymMatrix::from_upper(2, |i, j| if i == j { s } else { 0.2 })).unwrap()
                .with_drift(move |_, x| x.scale(s - 1.5))
        }).collect();
        let fam = IsaacsFamily::new("2x2", 2, 2, members).unwrap();
        let x = Vector::from_slice(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let p = Vector::from_slice(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let e: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xx = SymMatrix::from_rows(&[&[e[0], e[1]], &[e[1], e[2]]]).unwrap();
        let v = Vector::from_slice(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        let bump = SymMatrix::projector(&v);
        let v0 = isaacs_value(&fam, 0.0, &x, &p, &xx).unwrap();
        let v1 = isaacs_value(&fam, 0.0, &x, &p, &(xx + bump)).unwrap();
        prop_assert!(v1 <= v0 + 1e-12);
    }
}
