use approx::assert_abs_diff_eq;
use qns::fokker_planck::{fp_step, ou_semigroup, sup_div_m, FpOptions, PositivityEnvelope};
use qns::galerkin::{coupled_step, Coefficients, SimState, StepOptions};
use qns::params::ModelParams;
use qns::random::{random_density, rng};
use qns::spectral::{GaussianFrame, ScalarField, VectorField};

#[test]
fn semigroup_examples() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
    let q = ScalarField::constant(&fr, 1.0).map_coeffs(|b, c| if b == 1 { c + 0.1 } else { c });
    assert_eq!(ou_semigroup(&q, 0.0, 0.5).coeffs(), q.coeffs());
    let out = ou_semigroup(&q, 2.0, 0.5);
    assert_abs_diff_eq!(out.coeffs()[1], 0.1 * (-1f64).exp(), epsilon = 1e-16);
    assert_abs_diff_eq!(out.coeffs()[1], 0.036_787_944_117_144_23, epsilon = 1e-16);
    let late = ou_semigroup(
        &ScalarField::from_fn(&fr, |p| 1.0 + 0.2 * p[0] + 0.1 * p[0].powi(3)),
        1e4,
        0.5,
    );
    assert_abs_diff_eq!(late.coeffs()[0], 1.0, epsilon = 1e-14);
    assert!(late.coeffs()[1..].iter().all(|c| c.abs() < 1e-300));
}

#[test]
fn zero_velocity_step_is_the_semigroup() {
    let fr = GaussianFrame::with_default_quadrature(0.9, 2, 5).unwrap();
    let q = random_density(&fr, &mut rng(5));
    let u = VectorField::zeros(&fr);
    let a = fp_step(&q, &u, 0.4, 0.03, &FpOptions::default()).unwrap();
    let b = ou_semigroup(&q, 0.03, 0.4);
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert_abs_diff_eq!(*x, *y, epsilon = 1e-15);
    }
}

#[test]
fn first_picard_response_matches_forward_euler() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
    let q = ScalarField::constant(&fr, 1.0);
    let u = VectorField::new(vec![ScalarField::from_fn(&fr, |p| p[0])]).unwrap();
    for dt in [1e-3, 1e-4] {
        let q1 = fp_step(&q, &u, 0.0, dt, &FpOptions::default()).unwrap();
        let euler = ScalarField::from_fn(&fr, |p| 1.0 - dt * (1.0 - p[0] * p[0]));
        assert!(q1.axpy(-1.0, &euler).norm() < 5.0 * dt * dt);
    }
}

#[test]
fn mass_preserved_for_random_looking_data() {
    let fr = GaussianFrame::with_default_quadrature(0.6, 1, 10).unwrap();
    let mut g = rng(9);
    let q = random_density(&fr, &mut g)
        .map_coeffs(|b, c| if b == 0 { c + 1.0 } else { c })
        .scale(0.5);
    let u = VectorField::new(vec![ScalarField::from_fn(&fr, |p| {
        0.05 - 0.1 * p[0] + 0.02 * p[0] * p[0]
    })])
    .unwrap();
    let q1 = fp_step(&q, &u, 0.2, 1e-3, &FpOptions::default()).unwrap();
    assert_abs_diff_eq!(q1.integral(), q.integral(), epsilon = 1e-13);
}

#[test]
fn envelope_closed_forms() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 4).unwrap();
    let q = ScalarField::from_fn(&fr, |p| 1.0 + 0.1 * p[0]);
    let resolved_min = q
        .nodal()
        .iter()
        .zip(fr.resolved())
        .filter(|(_, r)| **r)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    let zero = VectorField::zeros(&fr);
    let mut env = PositivityEnvelope::new(&q, &zero).unwrap();
    for _ in 0..10 {
        env.update(&zero, 0.1);
    }
    assert!(env.lower() <= resolved_min);
    assert_abs_diff_eq!(env.lower() * env.upper(), 1.0, epsilon = 1e-14);
    let c0 = env.c0;

    // div_m of a constant velocity c is -c x, so its sup over resolved nodes is fixed
    let u = VectorField::new(vec![ScalarField::constant(&fr, 0.05)]).unwrap();
    let m = sup_div_m(&u);
    let mut env = PositivityEnvelope::new(&q, &u).unwrap();
    for _ in 0..20 {
        env.update(&u, 0.05);
    }
    assert_abs_diff_eq!(env.lower(), c0 * (-m).exp(), epsilon = 1e-14);
    assert_abs_diff_eq!(env.upper(), (m).exp() / c0, epsilon = 1e-12);
}

#[test]
fn envelope_holds_along_a_run() {
    let p = ModelParams::new(1.0, 0.5, 0.3, 2.0);
    let fr = GaussianFrame::with_default_quadrature(p.sigma().unwrap(), 1, 10).unwrap();
    let q = ScalarField::constant(&fr, 1.0);
    let u = VectorField::new(vec![ScalarField::from_fn(&fr, |x| 0.05 + 0.1 * x[0])]).unwrap();
    let mut s = SimState::new(q, u).unwrap();
    let c = Coefficients::from_params(&p, fr.sigma());
    let mut last_acc = 0.0;
    for _ in 0..100 {
        s = coupled_step(&s, &c, 2e-3, &StepOptions::default()).unwrap();
        s.envelope.check(&s.q).unwrap();
        assert!(s.envelope.accumulated >= last_acc);
        last_acc = s.envelope.accumulated;
    }
}
