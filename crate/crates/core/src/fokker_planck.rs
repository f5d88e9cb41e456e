//! Density update for a frozen velocity: Ornstein-Uhlenbeck semigroup plus a
//! midpoint Duhamel term, iterated to a fixed point.

use nalgebra::{DMatrix, DVector};

use crate::calculus::check_floor;
use crate::error::{QnsError, Result};
use crate::spectral::{weighted_divergence_part, ScalarField, VectorField};

/// Two-sided bound `c0 e^{-A} <= q <= e^{A} / c0`, `A = int ||div_m u||_inf dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityEnvelope {
    pub c0: f64,
    pub accumulated: f64,
    last_sup: f64,
}

pub const ENVELOPE_TOL: f64 = 1e-8;

impl PositivityEnvelope {
    pub fn new(q0: &ScalarField, u0: &VectorField) -> Result<Self> {
        let fr = q0.frame();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (v, r) in q0.nodal().iter().zip(fr.resolved()) {
            if *r {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        if !(lo > 0.0) {
            return Err(QnsError::InvalidParameter(format!(
                "initial density not positive (min {lo:e})"
            )));
        }
        Ok(PositivityEnvelope {
            c0: lo.min(1.0 / hi),
            accumulated: 0.0,
            last_sup: sup_div_m(u0),
        })
    }

    pub fn lower(&self) -> f64 {
        self.c0 * (-self.accumulated).exp()
    }

    pub fn upper(&self) -> f64 {
        self.accumulated.exp() / self.c0
    }

    /// Trapezoidal accumulation over one step ending with velocity `u_next`.
    pub fn update(&mut self, u_next: &VectorField, dt: f64) {
        let s = sup_div_m(u_next);
        self.accumulated += 0.5 * dt * (self.last_sup + s);
        self.last_sup = s;
    }

    pub fn check(&self, q: &ScalarField) -> Result<()> {
        let (lo, hi) = (self.lower(), self.upper());
        for (node, (v, r)) in q.nodal().iter().zip(q.frame().resolved()).enumerate() {
            if *r && (*v < lo - ENVELOPE_TOL || *v > hi + ENVELOPE_TOL) {
                return Err(QnsError::Positivity {
                    node,
                    value: *v,
                    floor: lo,
                });
            }
        }
        Ok(())
    }
}

/// Sup of `|div_m u|` over the resolved nodes.
pub fn sup_div_m(u: &VectorField) -> f64 {
    let fr = u.frame();
    u.div_m_nodal()
        .iter()
        .zip(fr.resolved())
        .filter(|(_, r)| **r)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max)
}

/// `exp(s delta1 Delta_m) q`, diagonal in the basis.
pub fn ou_semigroup(q: &ScalarField, s: f64, delta1: f64) -> ScalarField {
    let fr = q.frame().clone();
    let rate = delta1 * s / (fr.sigma() * fr.sigma());
    q.map_coeffs(|b, c| c * (-(fr.total_degree(b) as f64) * rate).exp())
}

/// Galerkin projection of `div_m(q u)`. Its zeroth mode vanishes identically.
pub fn flux_divergence(q: &ScalarField, u: &VectorField) -> Result<ScalarField> {
    let fr = q.frame();
    let mut out = ScalarField::zeros(fr);
    for a in 0..fr.dim() {
        let flux = q.multiply(u.comp(a))?;
        out = out.axpy(1.0, &weighted_divergence_part(&flux, a));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct FpOptions {
    pub floor: f64,
}

impl Default for FpOptions {
    fn default() -> Self {
        FpOptions {
            floor: crate::calculus::DEFAULT_FLOOR,
        }
    }
}

/// Matrix `G` with `Pi div_m(q u) = -G q` in coefficients:
/// `G_ab = int phi_b u . grad phi_a`.
pub fn transport_matrix(u: &VectorField) -> DMatrix<f64> {
    let fr = u.frame();
    let nb = fr.n_basis();
    let mut g = DMatrix::zeros(nb, nb);
    for a in 0..fr.dim() {
        let m = fr.weighted_gram(u.comp(a).nodal());
        for al in 0..nb {
            if let Some(lo) = fr.lower_index(al, a) {
                let f = (fr.indices()[al][a] as f64).sqrt() / fr.sigma();
                for be in 0..nb {
                    g[(al, be)] += f * m[(lo, be)];
                }
            }
        }
    }
    g
}

/// One step of `q_t + div_m(q u) = delta1 Delta_m q` with `u` frozen.
///
/// Duhamel form with the convolution integral taken at the midpoint, where the
/// midpoint density is the semigroup image of `q` corrected linearly toward the end
/// state. The resulting linear equation for the end state is solved directly.
pub fn fp_step(
    q: &ScalarField,
    u: &VectorField,
    delta1: f64,
    dt: f64,
    opts: &FpOptions,
) -> Result<ScalarField> {
    if !q.same_frame(u.comp(0)) {
        return Err(QnsError::FrameMismatch);
    }
    let fr = q.frame();
    let nb = fr.n_basis();
    let s2 = fr.sigma() * fr.sigma();
    let decay = |s: f64| {
        DVector::from_fn(nb, |b, _| {
            (-(fr.total_degree(b) as f64) * delta1 * s / s2).exp()
        })
    };
    let (e_full, e_half) = (decay(dt), decay(0.5 * dt));
    let q0 = DVector::from_column_slice(q.coeffs());
    let g = transport_matrix(u);
    // (I - dt/2 E_h G) q1 = E q0 + dt E_h G (E_h - E/2) q0
    let mut lhs = g.clone() * (-0.5 * dt);
    for i in 0..nb {
        lhs.row_mut(i).scale_mut(e_half[i]);
        lhs[(i, i)] += 1.0;
    }
    let w = e_half.component_mul(&q0) - e_full.component_mul(&q0) * 0.5;
    let rhs = e_full.component_mul(&q0) + (&g * w).component_mul(&e_half) * dt;
    let sol = lhs.lu().solve(&rhs).ok_or_else(|| QnsError::StepFailure {
        t: f64::NAN,
        reason: "singular density system".into(),
    })?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(QnsError::StepFailure {
            t: f64::NAN,
            reason: "non-finite density".into(),
        });
    }
    let mut c: Vec<f64> = sol.iter().copied().collect();
    // the system leaves the zeroth mode untouched; remove round-off
    c[0] = q.coeffs()[0];
    let end = ScalarField::from_coeffs(fr, c)?;
    check_floor(fr, end.nodal(), opts.floor)?;
    Ok(end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GaussianFrame;
    use approx::assert_abs_diff_eq;

    #[test]
    fn semigroup_decay() {
        let fr = GaussianFrame::with_default_quadrature(1.2, 1, 6).unwrap();
        let mut c = vec![0.0; fr.n_basis()];
        c[0] = 1.0;
        c[3] = 0.1;
        let q = ScalarField::from_coeffs(&fr, c).unwrap();
        let out = ou_semigroup(&q, 0.7, 0.3);
        assert_eq!(out.coeffs()[0], 1.0);
        assert_abs_diff_eq!(
            out.coeffs()[3],
            0.1 * (-3.0 * 0.3 * 0.7 / 1.44f64).exp(),
            epsilon = 1e-16
        );
    }

    #[test]
    fn first_order_response_to_linear_velocity() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
        let q = ScalarField::constant(&fr, 1.0);
        let u = VectorField::new(vec![ScalarField::from_fn(&fr, |p| p[0])]).unwrap();
        let dt = 1e-4;
        let q1 = fp_step(&q, &u, 0.0, dt, &FpOptions::default()).unwrap();
        let expect = ScalarField::from_fn(&fr, |p| 1.0 - dt * (1.0 - p[0] * p[0]));
        assert!(q1.axpy(-1.0, &expect).norm() < 10.0 * dt * dt);
        assert_abs_diff_eq!(q1.integral(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_is_exact() {
        let fr = GaussianFrame::with_default_quadrature(0.8, 2, 6).unwrap();
        let q = ScalarField::from_fn(&fr, |p| 1.0 + 0.2 * (p[0] - p[1]).powi(2));
        let u = VectorField::new(vec![
            ScalarField::from_fn(&fr, |p| 0.3 * p[1] * p[1]),
            ScalarField::from_fn(&fr, |p| -0.2 * p[0] + 0.1),
        ])
        .unwrap();
        let q1 = fp_step(&q, &u, 0.1, 0.01, &FpOptions::default()).unwrap();
        assert_abs_diff_eq!(q1.integral(), q.integral(), epsilon = 1e-14);
    }
}
