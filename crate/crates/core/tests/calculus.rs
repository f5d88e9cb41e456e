mod common;

use approx::assert_abs_diff_eq;
use qns::calculus::{
    bohm_residual, div_m, hessian_log, korteweg_form_gap, korteweg_tensor, q_of_rho,
    reference_density, rho_of_q, shifted_gaussian, velocity_gradient, DEFAULT_FLOOR,
};
use qns::spectral::{GaussianFrame, ScalarField, VectorField};

#[test]
fn weighted_divergence_examples() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 6).unwrap();
    let v = VectorField::new(vec![ScalarField::from_fn(&fr, |p| p[0])]).unwrap();
    let dm = ScalarField::from_nodal(&fr, &div_m(&v)).unwrap();
    assert_abs_diff_eq!(dm.eval([2.0, 0.0]), -3.0, epsilon = 1e-11);

    let c = VectorField::new(vec![ScalarField::constant(&fr, 0.5)]).unwrap();
    for (x, v) in fr.points().iter().zip(div_m(&c)) {
        assert_abs_diff_eq!(v, -x[0] * 0.5, epsilon = 1e-12);
    }

    let cubic = VectorField::new(vec![ScalarField::from_fn(&fr, |p| p[0].powi(3))]).unwrap();
    for (x, v) in fr.points().iter().zip(div_m(&cubic)) {
        let want = 3.0 * x[0] * x[0] - x[0].powi(4);
        assert_abs_diff_eq!(v, want, epsilon = 1e-9 * (1.0 + want.abs()));
    }
}

#[test]
fn velocity_gradient_examples() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 2, 3).unwrap();
    let ident = VectorField::new(vec![
        ScalarField::from_fn(&fr, |p| p[0]),
        ScalarField::from_fn(&fr, |p| p[1]),
    ])
    .unwrap();
    for g in velocity_gradient(&ident) {
        assert_abs_diff_eq!(g[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[0][1], 0.0, epsilon = 1e-12);
    }
    let rot = VectorField::new(vec![
        ScalarField::from_fn(&fr, |p| -p[1]),
        ScalarField::from_fn(&fr, |p| p[0]),
    ])
    .unwrap();
    for g in velocity_gradient(&rot) {
        assert_abs_diff_eq!(g[0][1] + g[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1][0], 1.0, epsilon = 1e-12);
    }
    let shear = VectorField::new(vec![
        ScalarField::from_fn(&fr, |p| p[0] * p[1]),
        ScalarField::zeros(&fr),
    ])
    .unwrap();
    for (g, x) in velocity_gradient(&shear).iter().zip(fr.points()) {
        let sym = 0.5 * (g[0][1] + g[1][0]);
        let skew = 0.5 * (g[0][1] - g[1][0]);
        assert_abs_diff_eq!(sym, x[0] / 2.0, epsilon = 1e-11);
        assert_abs_diff_eq!(skew, x[0] / 2.0, epsilon = 1e-11);
    }
}

#[test]
fn korteweg_vanishes_for_constant_and_tilt() {
    let fr = GaussianFrame::with_default_quadrature(0.8, 1, 14).unwrap();
    for q in [
        ScalarField::constant(&fr, 1.0),
        shifted_gaussian(&fr, [0.3, 0.0]),
    ] {
        for (k, m) in korteweg_tensor(&q, DEFAULT_FLOOR)
            .unwrap()
            .iter()
            .enumerate()
        {
            if fr.resolved()[k] && fr.points()[k][0].abs() < 3.0 {
                assert!(m[0][0].abs() < 1e-9, "node {k}: {}", m[0][0]);
            }
        }
        assert!(korteweg_form_gap(&q, DEFAULT_FLOOR).unwrap() < 1e-12);
    }
}

#[test]
fn log_hessian_examples() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 12).unwrap();
    let one = ScalarField::constant(&fr, 1.0);
    assert!(hessian_log(&one, DEFAULT_FLOOR)
        .unwrap()
        .iter()
        .all(|m| m[0][0] == 0.0));

    // ln q = x^2 / (2 s^2), compared in the bulk where the truncation is accurate
    let s2 = 4.0;
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 30).unwrap();
    let q = ScalarField::from_fn(&fr, |p| (p[0] * p[0] / (2.0 * s2)).exp());
    for (k, m) in hessian_log(&q, DEFAULT_FLOOR).unwrap().iter().enumerate() {
        let x = fr.points()[k][0];
        if x.abs() < 1.5 {
            let want = q.nodal()[k].sqrt() / s2;
            assert_abs_diff_eq!(m[0][0], want, epsilon = 1e-6);
        }
    }

    let tilt = shifted_gaussian(&fr, [0.2, 0.0]);
    for (k, m) in hessian_log(&tilt, DEFAULT_FLOOR)
        .unwrap()
        .iter()
        .enumerate()
    {
        if fr.points()[k][0].abs() < 3.0 {
            assert!(m[0][0].abs() < 1e-10);
        }
    }
}

#[test]
fn bohm_identity_residuals() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 10).unwrap();
    assert!(bohm_residual(&ScalarField::constant(&fr, 1.0), 1.0, DEFAULT_FLOOR).unwrap() < 1e-13);

    let o = common::oracles();
    let c = common::f(&o["quartic_density"]["normalization"]);
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 16).unwrap();
    // the plain truncation is negative at outer nodes; square the truncated root instead
    let half = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
    let root = ScalarField::from_fn(&half, |p| {
        (c * (-p[0].powi(4)).exp() / reference_density(&half, p)).sqrt()
    });
    let q = ScalarField::from_fn(&fr, |p| root.eval(p).powi(2) + 1e-6);
    let q = q.scale(1.0 / q.integral());
    assert!(bohm_residual(&q, 0.7, DEFAULT_FLOOR).unwrap() < 1e-6);
}

#[test]
fn density_conversions() {
    let o = common::oracles();
    let fr = GaussianFrame::with_default_quadrature(0.8, 1, 6).unwrap();
    let one = ScalarField::constant(&fr, 1.0);
    for (r, p) in rho_of_q(&one).iter().zip(fr.points()) {
        assert_abs_diff_eq!(*r, reference_density(&fr, *p), epsilon = 1e-15);
    }
    let eps = common::f(&o["linear_density_moment"]["eps"]);
    let q = ScalarField::from_fn(&fr, |p| 1.0 + eps * p[0]);
    let rho = rho_of_q(&q);
    let back = q_of_rho(&fr, &rho).unwrap();
    for (a, b) in back.coeffs().iter().zip(q.coeffs()) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-13);
    }
    // int rho x dx = int q x dmu
    let xq: Vec<f64> = q
        .nodal()
        .iter()
        .zip(fr.points())
        .map(|(v, p)| v * p[0])
        .collect();
    assert_abs_diff_eq!(
        fr.integrate(&xq),
        common::f(&o["linear_density_moment"]["value"]),
        epsilon = 1e-14
    );
    assert_abs_diff_eq!(fr.integrate(&xq), eps * 0.64, epsilon = 1e-14);
}

#[test]
fn tilt_coefficients_match_oracle() {
    let o = common::oracles();
    let c = common::f(&o["tilt_coefficients"]["c"]);
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 12).unwrap();
    let q = shifted_gaussian(&fr, [c, 0.0]);
    for (a, b) in q
        .coeffs()
        .iter()
        .zip(common::floats(&o["tilt_coefficients"]["coeffs"]))
    {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
}
