use approx::assert_abs_diff_eq;
use qns::calculus::shifted_gaussian;
use qns::calculus::DEFAULT_FLOOR;
use qns::continuation::{
    cutoff, drag_schedule, mollifier, mollify_initial_data, renormalization_cutoff,
    vanishing_drag_sweep, SweepBase,
};
use qns::params::ModelParams;
use qns::run::RunSettings;
use qns::spectral::{GaussianFrame, ScalarField, VectorField};

#[test]
fn cutoffs() {
    assert_eq!(cutoff(0.0), 1.0);
    assert_eq!(cutoff(0.5), 1.0);
    assert_eq!(cutoff(1.0), 0.0);
    assert_eq!(cutoff(3.0), 0.0);
    assert_abs_diff_eq!(cutoff(0.75), 0.5, epsilon = 1e-15);
    let l = 4.0;
    assert_eq!(renormalization_cutoff(l, 0.1), 0.0);
    assert_abs_diff_eq!(renormalization_cutoff(l, 0.1875), 0.5, epsilon = 1e-15);
    assert_eq!(renormalization_cutoff(l, 1.0), 1.0);
    assert_eq!(renormalization_cutoff(l, 4.0), 1.0);
    assert_abs_diff_eq!(renormalization_cutoff(l, 6.0), 0.5, epsilon = 1e-15);
    assert_eq!(renormalization_cutoff(l, 9.0), 0.0);
}

#[test]
fn mollifier_has_unit_mass() {
    let n = 2000;
    let h = 2.0 / n as f64;
    let s: f64 = (0..n)
        .map(|i| mollifier([-1.0 + (i as f64 + 0.5) * h, 0.0], 1))
        .sum::<f64>()
        * h;
    assert_abs_diff_eq!(s, 1.0, epsilon = 1e-6);
    let n = 400;
    let h = 2.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += mollifier(
                [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h],
                2,
            );
        }
    }
    assert_abs_diff_eq!(s * h * h, 1.0, epsilon = 1e-4);
}

#[test]
fn schedule_examples() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
    let one = ScalarField::constant(&fr, 1.0);
    let s = drag_schedule(1, &one, 0.3, DEFAULT_FLOOR).unwrap();
    assert_eq!(s.r1n, 1.0);
    assert_abs_diff_eq!(s.r0n, 0.5, epsilon = 1e-13);
    assert_abs_diff_eq!(s.r4n, 0.1, epsilon = 1e-12);
    assert_eq!(s.delta1n, 0.3);
    assert!(drag_schedule(0, &one, 0.0, DEFAULT_FLOOR).is_err());
    let mut last = f64::INFINITY;
    for n in [1, 2, 4, 8, 16, 1000] {
        let s = drag_schedule(n, &one, 0.0, DEFAULT_FLOOR).unwrap();
        assert!(s.r0n < last);
        assert!(s.r0_product <= 1.0 && s.r4_product <= 1.0);
        last = s.r0n;
    }
}

#[test]
fn mollified_data() {
    let fr = GaussianFrame::with_default_quadrature(1.0, 1, 10).unwrap();
    let q0 = shifted_gaussian(&fr, [0.2, 0.0]);
    let zero = VectorField::zeros(&fr);
    let (q, u) = mollify_initial_data(&q0, &zero, 16).unwrap();
    assert_abs_diff_eq!(q.integral(), 1.0, epsilon = 1e-12);
    assert!(u.norm() < 1e-14);
    let resolved_min = q
        .nodal()
        .iter()
        .zip(fr.resolved())
        .filter(|(_, r)| **r)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    assert!(resolved_min > 0.0);

    let one = ScalarField::constant(&fr, 1.0);
    let (q, _) = mollify_initial_data(&one, &zero, 200).unwrap();
    for (v, r) in q.nodal().iter().zip(fr.resolved()) {
        if *r {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 0.05);
        }
    }
}

#[test]
fn small_sweep() {
    let p = ModelParams::new(16.0, 1.0, 0.5, 300.0);
    let fr = GaussianFrame::with_default_quadrature(p.sigma().unwrap(), 1, 10).unwrap();
    let q0 = shifted_gaussian(&fr, [0.05 * fr.sigma(), 0.0]);
    let u0 = VectorField::new(vec![ScalarField::from_fn(&fr, |x| 0.2 * x[0])]).unwrap();
    let mut settings = RunSettings::new(2e-3, 0.1);
    settings.every = 5;
    let base = SweepBase {
        params: p,
        q0,
        u0,
        settings,
        audit_tol: 1e-6,
    };
    let r = vanishing_drag_sweep(&base, &[4, 8, 16], 4).unwrap();
    assert_eq!(r.members.len(), 3);
    assert_eq!(r.increments_h1.len(), 2);
    assert!(r.failed_index.is_none());
    assert!(r
        .increments_h1
        .iter()
        .chain(&r.increments_l2)
        .all(|v| v.is_finite() && *v >= 0.0));
    assert!(vanishing_drag_sweep(&base, &[4, 4], 1).is_err());
    assert!(vanishing_drag_sweep(&base, &[], 1).is_err());
}
