//! Hermite-Galerkin momentum balance coupled to the density update.
//!
//! The velocity lives in the degree-N polynomial space. The momentum equation is used
//! in weak form against every basis vector, with the density-weighted mass matrix
//! on the left.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::calculus::{velocity_gradient, velocity_values, Jet, SqrtJet, DEFAULT_FLOOR};
use crate::error::{QnsError, Result};
use crate::fokker_planck::{fp_step, FpOptions, PositivityEnvelope};
use crate::params::ModelParams;
use crate::spectral::{ScalarField, VectorField};

/// Multipliers of each term in the momentum balance and continuity flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// Factor on the continuity flux and on the convective term.
    pub advection: f64,
    /// Factor on `int q D(u):D(phi)`.
    pub viscosity: f64,
    /// Factor on `int S_K : D(phi)`.
    pub korteweg: f64,
    /// Factor on `int grad q . phi`.
    pub pressure: f64,
    pub r0: f64,
    pub r1: f64,
    /// Factor on `int q |x|^2 x . phi`.
    pub confinement: f64,
    pub delta1: f64,
}

impl Coefficients {
    pub fn from_params(p: &ModelParams, sigma: f64) -> Self {
        Coefficients {
            advection: 1.0,
            viscosity: 2.0 * p.nu,
            korteweg: 2.0 * p.kappa * p.kappa,
            pressure: p.lambda * sigma * sigma,
            r0: p.r0,
            r1: p.r1,
            confinement: p.r4 / sigma.powi(4),
            delta1: p.delta1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub q: ScalarField,
    pub u: VectorField,
    pub envelope: PositivityEnvelope,
}

impl SimState {
    pub fn new(q: ScalarField, u: VectorField) -> Result<Self> {
        if !q.same_frame(u.comp(0)) {
            return Err(QnsError::FrameMismatch);
        }
        let envelope = PositivityEnvelope::new(&q, &u)?;
        Ok(SimState {
            t: 0.0,
            step: 0,
            q,
            u,
            envelope,
        })
    }
}

/// Factorized `M[q]_ij = int q phi_i phi_j`, shared by every velocity component.
pub struct MassOperator {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl MassOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Solve for a stacked right-hand side, one block per component.
    pub fn solve(&self, flat: &[f64]) -> Vec<f64> {
        let nb = self.matrix.nrows();
        flat.chunks(nb)
            .flat_map(|c| {
                self.chol
                    .solve(&DVector::from_column_slice(c))
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn apply(&self, flat: &[f64]) -> Vec<f64> {
        let nb = self.matrix.nrows();
        flat.chunks(nb)
            .flat_map(|c| {
                (&self.matrix * DVector::from_column_slice(c))
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

pub fn assemble_mass(q: &ScalarField) -> Result<MassOperator> {
    let matrix = q.frame().weighted_gram(q.nodal());
    let chol = Cholesky::new(matrix.clone()).ok_or(QnsError::MassSingular)?;
    Ok(MassOperator { matrix, chol })
}

/// Mass-weighted projection of a nodal velocity onto the polynomial space.
pub fn project_initial_velocity(q: &ScalarField, u_nodal: &[[f64; 2]]) -> Result<VectorField> {
    let fr = q.frame();
    if u_nodal.len() != fr.n_nodes() {
        return Err(QnsError::Dimension {
            expected: fr.n_nodes(),
            got: u_nodal.len(),
        });
    }
    let mass = assemble_mass(q)?;
    let mut rhs = Vec::new();
    for a in 0..fr.dim() {
        let v: Vec<f64> = q
            .nodal()
            .iter()
            .zip(u_nodal)
            .map(|(q, u)| q * u[a])
            .collect();
        rhs.extend(fr.transform(&v));
    }
    VectorField::from_flat(fr, &mass.solve(&rhs))
}

/// Weak-form force: for each basis vector `phi = e_a phi_j`,
///
/// `adv/2 int q [u.(grad phi) u - (u.grad u).phi] - visc int q D(u):D(phi)
///  - kort int S_K:D(phi) - pres int grad q.phi - r0 int u.phi - r1 int q|u|^2 u.phi
///  - conf int q|x|^2 x.phi + delta1/2 int [(grad phi grad q).u - (grad u grad q).phi]`.
///
/// The convective and diffusive-coupling parts are returned in skew form: the missing
/// `1/2 int q_t u.phi` depends on the density increment and is added by
/// [`coupled_step`]. Together they reproduce the conservative form, and neither
/// changes the kinetic energy.
pub fn momentum_rhs(
    q: &ScalarField,
    u: &VectorField,
    c: &Coefficients,
    floor: f64,
) -> Result<Vec<f64>> {
    if !q.same_frame(u.comp(0)) {
        return Err(QnsError::FrameMismatch);
    }
    let fr = q.frame();
    let d = fr.dim();
    let n = fr.n_nodes();
    let nb = fr.n_basis();
    let jet = Jet::of(q);
    let sj = if c.korteweg != 0.0 {
        Some(SqrtJet::from_jet(&jet, fr, floor)?)
    } else {
        None
    };
    let uv = velocity_values(u);
    let gu = velocity_gradient(u);
    let pts = fr.points();

    let mut out = vec![0.0; d * nb];
    let mut f = vec![0.0; n];
    let mut t = vec![0.0; n];
    for a in 0..d {
        for k in 0..n {
            let qk = jet.val[k];
            let u2 = uv[k][0] * uv[k][0] + uv[k][1] * uv[k][1];
            let x2 = pts[k][0] * pts[k][0] + pts[k][1] * pts[k][1];
            let conv: f64 = (0..d).map(|m| uv[k][m] * gu[k][a][m]).sum();
            let mut v = -0.5 * c.advection * qk * conv
                - c.r1 * qk * u2 * uv[k][a]
                - c.pressure * jet.grad[k][a]
                - c.confinement * qk * x2 * pts[k][a];
            if c.delta1 != 0.0 {
                v -= 0.5 * c.delta1 * (0..d).map(|m| gu[k][a][m] * jet.grad[k][m]).sum::<f64>();
            }
            f[k] = v;
        }
        let block = &mut out[a * nb..(a + 1) * nb];
        for (o, v) in block.iter_mut().zip(fr.transform(&f)) {
            *o += v;
        }
        for (o, uc) in block.iter_mut().zip(u.comp(a).coeffs()) {
            *o -= c.r0 * uc;
        }
        for m in 0..d {
            for k in 0..n {
                let qk = jet.val[k];
                let sym = 0.5 * (gu[k][a][m] + gu[k][m][a]);
                let mut v = 0.5 * c.advection * qk * uv[k][a] * uv[k][m] - c.viscosity * qk * sym;
                if let Some(sj) = &sj {
                    v -= c.korteweg * sj.korteweg(k)[a][m];
                }
                if c.delta1 != 0.0 {
                    v += 0.5 * c.delta1 * jet.grad[k][m] * uv[k][a];
                }
                t[k] = v;
            }
            // int T d_m phi_j = sqrt(j_m)/sigma * <T, phi_{j - e_m}>
            let proj = fr.transform(&t);
            for j in 0..nb {
                if let Some(lo) = fr.lower_index(j, m) {
                    block[j] += (fr.indices()[j][m] as f64).sqrt() / fr.sigma() * proj[lo];
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    pub picard_tol: f64,
    pub max_sweeps: usize,
    pub floor: f64,
    pub fp: FpOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            picard_tol: 1e-10,
            max_sweeps: 25,
            floor: DEFAULT_FLOOR,
            fp: FpOptions::default(),
        }
    }
}

pub const MASS_DRIFT_TOL: f64 = 1e-10;

/// Midpoint step of the coupled system, iterated to a fixed point in the velocity.
pub fn coupled_step(
    state: &SimState,
    c: &Coefficients,
    dt: f64,
    opts: &StepOptions,
) -> Result<SimState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(QnsError::InvalidParameter(format!("dt = {dt}")));
    }
    let fail = |reason: String| QnsError::StepFailure { t: state.t, reason };
    let q0 = &state.q;
    let u0 = &state.u;
    let fr = q0.frame();
    let mass0 = assemble_mass(q0)?;
    let m0u0 = mass0.apply(&u0.flat());
    let density = |u_mid: &VectorField| -> Result<ScalarField> {
        fp_step(q0, &u_mid.scale(c.advection), c.delta1, dt, &opts.fp).map_err(|e| match e {
            QnsError::StepFailure { reason, .. } => fail(reason),
            other => other,
        })
    };

    let mut u_iter = u0.clone();
    let mut q1 = q0.clone();
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let u_mid = u0.axpy(1.0, &u_iter).scale(0.5);
        q1 = density(&u_mid)?;
        let q_mid = q0.axpy(1.0, &q1).scale(0.5);
        let rhs = momentum_rhs(&q_mid, &u_mid, c, opts.floor)?;
        let mass = assemble_mass(&q1)?;
        let flat_mid = u_mid.flat();
        let dm: Vec<f64> = mass
            .apply(&flat_mid)
            .iter()
            .zip(mass0.apply(&flat_mid))
            .map(|(a, b)| a - b)
            .collect();
        let b: Vec<f64> = m0u0
            .iter()
            .zip(&rhs)
            .zip(&dm)
            .map(|((m, r), g)| m + dt * r + 0.5 * g)
            .collect();
        let u_new = VectorField::from_flat(fr, &mass.solve(&b))?;
        let change = u_new.axpy(-1.0, &u_iter).norm();
        u_iter = u_new;
        if !change.is_finite() {
            return Err(fail("velocity iteration produced non-finite values".into()));
        }
        if change < opts.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail(format!(
            "velocity fixed point did not converge in {} sweeps",
            opts.max_sweeps
        )));
    }
    let drift = (q1.integral() - q0.integral()).abs();
    if drift > MASS_DRIFT_TOL {
        return Err(QnsError::Consistency(format!(
            "mass drift {drift:e} in one step"
        )));
    }
    let mut envelope = state.envelope;
    envelope.update(&u_iter, dt);
    Ok(SimState {
        t: state.t + dt,
        step: state.step + 1,
        q: q1,
        u: u_iter,
        envelope,
    })
}

/// Mean position `int q x` and mean momentum `int q u`.
pub fn means(q: &ScalarField, u: &VectorField) -> ([f64; 2], [f64; 2]) {
    let fr = q.frame();
    let qm = q.nodal();
    let mut mx = [0.0; 2];
    let mut mu = [0.0; 2];
    for a in 0..fr.dim() {
        mx[a] = fr.integrate(
            &q.nodal()
                .iter()
                .zip(fr.points())
                .map(|(q, p)| q * p[a])
                .collect::<Vec<_>>(),
        );
        mu[a] = fr.integrate(
            &qm.iter()
                .zip(u.comp(a).nodal())
                .map(|(q, u)| q * u)
                .collect::<Vec<_>>(),
        );
    }
    (mx, mu)
}

/// Shift into the frame of the center of mass: density translated by the mean position,
/// mean momentum removed. Returns the new state and the shift in units of sigma.
pub fn recenter(state: &SimState) -> Result<(SimState, f64)> {
    let q = &state.q;
    let fr = q.frame();
    let mass = q.integral();
    let (mx, mu) = means(q, &state.u);
    let shift = [mx[0] / mass, mx[1] / mass];
    let drift = [mu[0] / mass, mu[1] / mass];
    let s2 = fr.sigma() * fr.sigma();
    let qn: Vec<f64> = fr
        .points()
        .iter()
        .map(|p| {
            let y = [p[0] + shift[0], p[1] + shift[1]];
            let g =
                (2.0 * (p[0] * shift[0] + p[1] * shift[1]) + shift[0].powi(2) + shift[1].powi(2))
                    / (2.0 * s2);
            q.eval(y) * (-g).exp()
        })
        .collect();
    let mut qbar = ScalarField::from_nodal(fr, &qn)?;
    qbar = qbar.scale(mass / qbar.integral());
    let un: Vec<[f64; 2]> = fr
        .points()
        .iter()
        .map(|p| {
            let y = [p[0] + shift[0], p[1] + shift[1]];
            let mut v = [0.0; 2];
            for a in 0..fr.dim() {
                v[a] = state.u.comp(a).eval(y) - drift[a];
            }
            v
        })
        .collect();
    let ubar = project_initial_velocity(&qbar, &un)?;
    let envelope = PositivityEnvelope::new(&qbar, &ubar)?;
    let size = (shift[0].powi(2) + shift[1].powi(2)).sqrt() / fr.sigma();
    Ok((
        SimState {
            t: state.t,
            step: state.step,
            q: qbar,
            u: ubar,
            envelope,
        },
        size,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GaussianFrame;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_density_mass_is_identity() {
        let fr = GaussianFrame::with_default_quadrature(1.3, 2, 5).unwrap();
        let m = assemble_mass(&ScalarField::constant(&fr, 1.0)).unwrap();
        let id = DMatrix::<f64>::identity(fr.n_basis(), fr.n_basis());
        assert!((m.matrix() - id).amax() < 1e-13);
    }

    #[test]
    fn projection_of_cubic() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 2).unwrap();
        let q = ScalarField::constant(&fr, 1.0);
        let un: Vec<[f64; 2]> = fr.points().iter().map(|p| [p[0].powi(3), 0.0]).collect();
        let u = project_initial_velocity(&q, &un).unwrap();
        assert_abs_diff_eq!(u.comp(0).coeffs()[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.comp(0).coeffs()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.comp(0).coeffs()[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn confinement_force_on_rest_state() {
        let sigma = 1.4;
        let fr = GaussianFrame::with_default_quadrature(sigma, 1, 6).unwrap();
        let p = ModelParams::new(1.0, 0.5, 0.3, 1.0).with_drags(0.0, 0.0, 0.2);
        let c = Coefficients::from_params(&p, sigma);
        let r = momentum_rhs(
            &ScalarField::constant(&fr, 1.0),
            &VectorField::zeros(&fr),
            &c,
            DEFAULT_FLOOR,
        )
        .unwrap();
        assert_abs_diff_eq!(r[1], -3.0 * 0.2 / sigma, epsilon = 1e-12);
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rest_state_is_stationary() {
        let p = ModelParams::new(1.0, 1.0, 0.5, 2.0);
        let sigma = p.sigma().unwrap();
        let fr = GaussianFrame::with_default_quadrature(sigma, 1, 10).unwrap();
        let c = Coefficients::from_params(&p, sigma);
        let mut s =
            SimState::new(ScalarField::constant(&fr, 1.0), VectorField::zeros(&fr)).unwrap();
        for _ in 0..10 {
            s = coupled_step(&s, &c, 1e-3, &StepOptions::default()).unwrap();
        }
        assert!(s.q.axpy(-1.0, &ScalarField::constant(&fr, 1.0)).norm() < 1e-14);
        assert!(s.u.norm() < 1e-14);
    }
}
