//! Self-similar variables for the trap-free system.
//!
//! With `rho(t, x) = tau^-d R(t, x/tau)` and `u = U(t, x/tau)/tau + (tau'/tau) x`, the
//! relative density `Q = R / R_m` (unit-width Gaussian `R_m`) and `U` solve the trapped
//! system with time-dependent coefficients. The step below reuses the Galerkin solver
//! with those coefficients frozen at the half step.

use serde::{Deserialize, Serialize};

use crate::calculus::{frob, velocity_gradient, velocity_values, SqrtJet, Sym2};
use crate::error::{QnsError, Result};
use crate::galerkin::{
    coupled_step, project_initial_velocity, Coefficients, SimState, StepOptions,
};
use crate::spectral::{Frame, GaussianFrame, ScalarField, VectorField};

/// Coefficients of the trap-free system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub a: f64,
    pub kappa: f64,
    pub nu: f64,
}

impl RescaledParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.kappa >= 0.0 && self.nu >= 0.0)
            || !(self.a.is_finite() && self.kappa.is_finite() && self.nu.is_finite())
        {
            return Err(QnsError::InvalidParameter(format!(
                "need a > 0, kappa >= 0, nu >= 0 (got a={}, kappa={}, nu={})",
                self.a, self.kappa, self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauState {
    pub t: f64,
    pub tau: f64,
    pub tau_dot: f64,
}

impl TauState {
    pub fn initial() -> Self {
        TauState {
            t: 0.0,
            tau: 1.0,
            tau_dot: 0.0,
        }
    }

    /// `tau'' = a/tau + k^2/tau^3 - 2 nu tau'/tau^2`.
    pub fn accel(&self, p: &RescaledParams) -> f64 {
        tau_accel(p, self.tau, self.tau_dot)
    }

    /// `tau'^2/2 - a ln tau + k^2/(2 tau^2)`, constant when `nu = 0`.
    pub fn invariant(&self, p: &RescaledParams) -> f64 {
        0.5 * self.tau_dot * self.tau_dot - p.a * self.tau.ln()
            + p.kappa * p.kappa / (2.0 * self.tau * self.tau)
    }

    /// One classical Runge-Kutta step.
    pub fn advance(&self, p: &RescaledParams, dt: f64) -> Result<TauState> {
        let f = |y: [f64; 2]| [y[1], tau_accel(p, y[0], y[1])];
        let y = [self.tau, self.tau_dot];
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
        let k3 = f([y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
        let k4 = f([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
        let tau = y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        let tau_dot = y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        if !(tau > 0.0 && tau.is_finite() && tau_dot.is_finite()) {
            return Err(QnsError::StepFailure {
                t: self.t,
                reason: format!("tau left (0, inf): {tau}"),
            });
        }
        Ok(TauState {
            t: self.t + dt,
            tau,
            tau_dot,
        })
    }
}

fn tau_accel(p: &RescaledParams, tau: f64, tau_dot: f64) -> f64 {
    p.a / tau + p.kappa * p.kappa / tau.powi(3) - 2.0 * p.nu * tau_dot / (tau * tau)
}

/// Trajectory of the scaling factor from `tau(0) = 1, tau'(0) = 0`, including both ends.
pub fn tau_solve(p: &RescaledParams, t_final: f64, dt: f64) -> Result<Vec<TauState>> {
    p.validate()?;
    if !(dt > 0.0 && t_final >= 0.0) {
        return Err(QnsError::InvalidParameter(format!(
            "need dt > 0 and t_final >= 0 (got {dt}, {t_final})"
        )));
    }
    let n = (t_final / dt).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut s = TauState::initial();
    out.push(s);
    for _ in 0..n {
        s = s.advance(p, dt)?;
        out.push(s);
    }
    Ok(out)
}

/// Physical `(q, u)` on a frame of width `sigma` to `(Q, U)` on width `sigma / tau`.
///
/// `Q(y) = q(tau y)` and `U(y) = tau u(tau y) - tau' tau y`, so polynomial data maps
/// exactly and `int Q` equals `int q`.
pub fn rescale_map(
    q: &ScalarField,
    u: &VectorField,
    tau: &TauState,
) -> Result<(ScalarField, VectorField)> {
    map_fields(q, u, tau.tau, |x, v| tau.tau * v - tau.tau_dot * x)
}

/// Inverse of [`rescale_map`]: width `sigma` becomes `sigma * tau`.
pub fn unscale_map(
    q: &ScalarField,
    u: &VectorField,
    tau: &TauState,
) -> Result<(ScalarField, VectorField)> {
    let t = tau.tau;
    map_fields(q, u, 1.0 / t, |x, v| v / t + tau.tau_dot * x)
}

// New field at point y is the old one at s * y.
fn map_fields(
    q: &ScalarField,
    u: &VectorField,
    s: f64,
    vel: impl Fn(f64, f64) -> f64,
) -> Result<(ScalarField, VectorField)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(QnsError::InvalidParameter(format!(
            "scaling factor must be positive, got {s}"
        )));
    }
    if !q.same_frame(u.comp(0)) {
        return Err(QnsError::FrameMismatch);
    }
    let src = q.frame();
    let dst =
        GaussianFrame::with_sigma(src.sigma() / s, src.dim(), src.degree(), src.quad_order())?;
    // the basis is in z = x / sigma, which the map leaves unchanged
    let qn = ScalarField::from_coeffs(&dst, q.coeffs().to_vec())?;
    let comps = (0..src.dim())
        .map(|a| {
            let nodal: Vec<f64> = dst
                .points()
                .iter()
                .map(|y| vel(s * y[a], u.comp(a).eval([s * y[0], s * y[1]])))
                .collect();
            ScalarField::from_nodal(&dst, &nodal)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((qn, VectorField::new(comps)?))
}

/// Interpolate a field onto another frame. The flag is false when some target node lies
/// outside the resolved window of the source.
pub fn resample(f: &ScalarField, target: &Frame) -> Result<(ScalarField, bool)> {
    let src = f.frame();
    if src.dim() != target.dim() {
        return Err(QnsError::Dimension {
            expected: src.dim(),
            got: target.dim(),
        });
    }
    let reach = src
        .points()
        .iter()
        .zip(src.resolved())
        .filter(|(_, r)| **r)
        .map(|(p, _)| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max);
    let inside = target
        .points()
        .iter()
        .all(|p| p[0].abs().max(p[1].abs()) <= reach);
    let nodal: Vec<f64> = target.points().iter().map(|p| f.eval(*p)).collect();
    Ok((ScalarField::from_nodal(target, &nodal)?, inside))
}

/// Galerkin multipliers at a given `(tau, tau')`. The `k^2 / tau^2` part of the pressure
/// comes from writing the Bohm force in divergence form on the unit Gaussian.
pub fn rescaled_coefficients(p: &RescaledParams, tau: f64, tau_dot: f64) -> Coefficients {
    let t2 = tau * tau;
    Coefficients {
        advection: 1.0 / t2,
        viscosity: 2.0 * p.nu / t2,
        korteweg: 2.0 * p.kappa * p.kappa / t2,
        pressure: p.kappa * p.kappa / t2 + p.a - 2.0 * p.nu * tau_dot / tau,
        r0: 0.0,
        r1: 0.0,
        confinement: 0.0,
        delta1: 0.0,
    }
}

/// Unit-width frame used by the rescaled system.
pub fn rescaled_frame(dim: usize, degree: usize) -> Result<Frame> {
    GaussianFrame::with_default_quadrature(1.0, dim, degree)
}

/// Rescaled state from a density and a nodal velocity on a unit-width frame.
pub fn rescaled_state(q: ScalarField, u_nodal: &[[f64; 2]]) -> Result<SimState> {
    if (q.frame().sigma() - 1.0).abs() > 1e-14 {
        return Err(QnsError::InvalidParameter(
            "the rescaled system lives on the unit Gaussian".into(),
        ));
    }
    let u = project_initial_velocity(&q, u_nodal)?;
    SimState::new(q, u)
}

/// One step of the rescaled system, coefficients frozen at the half step.
pub fn rescaled_step(
    state: &SimState,
    tau: &TauState,
    p: &RescaledParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<(SimState, TauState)> {
    let half = tau.advance(p, 0.5 * dt)?;
    let c = rescaled_coefficients(p, half.tau, half.tau_dot);
    let next = coupled_step(state, &c, dt, opts)?;
    Ok((next, tau.advance(p, dt)?))
}

/// Energy and BD entropy of the rescaled system with their dissipations and sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledEnergy {
    pub e: f64,
    pub d: f64,
    pub e_bd: f64,
    pub d_bd: f64,
    /// `(tau'/tau^3) int Q U . 2 nu grad ln Q`; enters the two identities with opposite signs.
    pub source: f64,
    /// `(2 nu / tau^4) int Q U . W`, the extra source of the BD identity coming from the
    /// Gaussian weight.
    pub bd_source: f64,
}

impl RescaledEnergy {
    pub fn total(&self) -> f64 {
        self.e + self.e_bd
    }

    pub fn total_dissipation(&self) -> f64 {
        self.d + self.d_bd
    }

    /// Right-hand side of the summed identity.
    pub fn total_source(&self) -> f64 {
        self.bd_source
    }
}

pub fn rescaled_energy(
    q: &ScalarField,
    u: &VectorField,
    tau: &TauState,
    p: &RescaledParams,
    floor: f64,
) -> Result<RescaledEnergy> {
    if !q.same_frame(u.comp(0)) {
        return Err(QnsError::FrameMismatch);
    }
    let fr = q.frame();
    let sj = SqrtJet::of(q, floor)?;
    let uv = velocity_values(u);
    let gu = velocity_gradient(u);
    let (t, td, nu) = (tau.tau, tau.tau_dot, p.nu);
    let k2 = p.kappa * p.kappa;
    let mut u_w = 0.0;
    let (mut kin, mut kin_w, mut fisher, mut ent, mut dd, mut aa, mut hl, mut gl2, mut cross) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..fr.n_nodes() {
        let w = fr.weights()[k];
        let q = sj.q[k];
        let gl = sj.grad_log(k);
        let u2 = uv[k][0].powi(2) + uv[k][1].powi(2);
        let w2 = (0..2)
            .map(|a| (uv[k][a] + 2.0 * nu * gl[a]).powi(2))
            .sum::<f64>();
        let g = gu[k];
        let sym: Sym2 = [
            [g[0][0], 0.5 * (g[0][1] + g[1][0])],
            [0.5 * (g[0][1] + g[1][0]), g[1][1]],
        ];
        let sk = 0.5 * (g[0][1] - g[1][0]);
        let h = sj.sqrt_q_hess_log(k);
        kin += w * q * u2;
        kin_w += w * q * w2;
        fisher += w * 4.0 * (sj.grad_s[k][0].powi(2) + sj.grad_s[k][1].powi(2));
        ent += w * q * q.ln();
        dd += w * q * frob(&sym, &sym);
        aa += w * q * 2.0 * sk * sk;
        hl += w * frob(&h, &h);
        gl2 += w * q * (gl[0] * gl[0] + gl[1] * gl[1]);
        cross += w * q * (uv[k][0] * gl[0] + uv[k][1] * gl[1]);
        u_w += w
            * q
            * (0..2)
                .map(|a| uv[k][a] * (uv[k][a] + 2.0 * nu * gl[a]))
                .sum::<f64>();
    }
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t2 * t2;
    let stretch = td / t3 * (kin + k2 * fisher);
    Ok(RescaledEnergy {
        e: 0.5 / t2 * (kin + k2 * fisher) + p.a * ent,
        d: stretch + 2.0 * nu / t4 * dd,
        e_bd: 0.5 / t2 * (kin_w + k2 * fisher) + p.a * ent,
        d_bd: stretch
            + 2.0 * nu / t4 * aa
            + 2.0 * nu * k2 / t4 * hl
            + 2.0 * nu * (p.a / t2 + k2 / t4) * gl2,
        source: td / t3 * 2.0 * nu * cross,
        bd_source: 2.0 * nu / t4 * u_w,
    })
}

#[derive(Debug)]
pub struct RescaledRun {
    pub tau: Vec<TauState>,
    pub energies: Vec<RescaledEnergy>,
    pub last: SimState,
    pub failure: Option<QnsError>,
}

impl RescaledRun {
    /// Largest `|d/dt (E + E_BD) + D + D_BD - S|` over steps, by differences and
    /// trapezoids, `S` being [`RescaledEnergy::total_source`].
    pub fn combined_residual(&self) -> f64 {
        self.energies
            .windows(2)
            .zip(self.tau.windows(2))
            .map(|(e, t)| {
                let h = t[1].t - t[0].t;
                let avg = |f: fn(&RescaledEnergy) -> f64| 0.5 * (f(&e[0]) + f(&e[1]));
                ((e[1].total() - e[0].total()) / h + avg(RescaledEnergy::total_dissipation)
                    - avg(RescaledEnergy::total_source))
                .abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn rescaled_run(
    initial: SimState,
    p: &RescaledParams,
    dt: f64,
    t_final: f64,
    opts: &StepOptions,
) -> Result<RescaledRun> {
    p.validate()?;
    if !(dt > 0.0 && t_final > 0.0) {
        return Err(QnsError::InvalidParameter(format!(
            "need dt > 0 and t_final > 0 (got {dt}, {t_final})"
        )));
    }
    let mut tau = TauState::initial();
    let mut state = initial;
    let mut taus = vec![tau];
    let mut energies = vec![rescaled_energy(&state.q, &state.u, &tau, p, opts.floor)?];
    let mut failure = None;
    for _ in 0..(t_final / dt).round() as usize {
        let step = rescaled_step(&state, &tau, p, dt, opts)
            .and_then(|(s, t)| rescaled_energy(&s.q, &s.u, &t, p, opts.floor).map(|e| (s, t, e)));
        match step {
            Ok((s, t, e)) => {
                state = s;
                tau = t;
                taus.push(t);
                energies.push(e);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(RescaledRun {
        tau: taus,
        energies,
        last: state,
        failure,
    })
}
