//! Energies, entropies, moments and the functional inequalities they rest on.

use serde::{Deserialize, Serialize};

use crate::calculus::{frob, velocity_gradient, velocity_values, SqrtJet, Sym2};
use crate::error::{QnsError, Result};
use crate::galerkin::{means, SimState};
use crate::params::ModelParams;
use crate::spectral::{ScalarField, VectorField};

/// Nodal data shared by all the functionals.
struct Nodal<'a> {
    w: &'a [f64],
    x: &'a [[f64; 2]],
    d: usize,
    s2: f64,
    sj: SqrtJet,
    uv: Vec<[f64; 2]>,
    gu: Vec<Sym2>,
}

impl<'a> Nodal<'a> {
    fn new(q: &'a ScalarField, u: &VectorField, floor: f64) -> Result<Self> {
        if !q.same_frame(u.comp(0)) {
            return Err(QnsError::FrameMismatch);
        }
        let fr = q.frame();
        Ok(Nodal {
            w: fr.weights(),
            x: fr.points(),
            d: fr.dim(),
            s2: fr.sigma() * fr.sigma(),
            sj: SqrtJet::of(q, floor)?,
            uv: velocity_values(u),
            gu: velocity_gradient(u),
        })
    }

    fn sum(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.w.iter().enumerate().map(|(k, w)| w * f(k)).sum()
    }

    fn u2(&self, k: usize) -> f64 {
        self.uv[k][0].powi(2) + self.uv[k][1].powi(2)
    }

    fn sym(&self, k: usize) -> Sym2 {
        let g = self.gu[k];
        [
            [g[0][0], 0.5 * (g[0][1] + g[1][0])],
            [0.5 * (g[0][1] + g[1][0]), g[1][1]],
        ]
    }

    fn skew(&self, k: usize) -> Sym2 {
        let g = self.gu[k];
        let a = 0.5 * (g[0][1] - g[1][0]);
        [[0.0, a], [-a, 0.0]]
    }

    fn hlog_sq(&self, k: usize) -> f64 {
        let m = self.sj.sqrt_q_hess_log(k);
        frob(&m, &m)
    }

    fn ln_q(&self, k: usize) -> f64 {
        self.sj.q[k].ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub mx: [f64; 2],
    pub mu: [f64; 2],
    pub i2: f64,
    pub i2_tilde: f64,
    pub i4: f64,
}

pub fn moments(q: &ScalarField, u: &VectorField) -> Moments {
    let fr = q.frame();
    let s2 = fr.sigma() * fr.sigma();
    let qn = q.nodal();
    let mut i2 = 0.0;
    let mut i4 = 0.0;
    for ((qv, p), w) in qn.iter().zip(fr.points()).zip(fr.weights()) {
        let r = (p[0] * p[0] + p[1] * p[1]) / s2;
        i2 += w * qv * r;
        i4 += w * qv * r * r;
    }
    let mass = q.integral();
    let (mx, mu) = means(q, u);
    Moments {
        mass,
        mx,
        mu,
        i2,
        i2_tilde: i2 - fr.dim() as f64 * mass,
        i4,
    }
}

/// Energy `E`, dissipation `D` and source `R` of the regularized system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub e: f64,
    pub d: f64,
    pub r: f64,
}

pub fn energy(
    q: &ScalarField,
    u: &VectorField,
    p: &ModelParams,
    floor: f64,
) -> Result<EnergyParts> {
    let nd = Nodal::new(q, u, floor)?;
    let m = moments(q, u);
    let k2 = p.kappa * p.kappa;
    let s2 = nd.s2;
    let sj = &nd.sj;
    let e = nd.sum(|k| sj.q[k] * (0.5 * (nd.u2(k) + k2 * sj.grad_log_sq(k)) + p.a * nd.ln_q(k)))
        + 0.25 * p.r4 * m.i4;
    let d = nd.sum(|k| {
        let dd = nd.sym(k);
        2.0 * p.nu * sj.q[k] * frob(&dd, &dd)
            + p.delta1 * p.lambda * s2 * sj.q[k] * sj.grad_log_sq(k)
            + k2 * p.delta1 * nd.hlog_sq(k)
            + p.r0 * nd.u2(k)
            + p.r1 * sj.q[k] * nd.u2(k).powi(2)
    }) + p.r4 * p.delta1 / s2 * m.i4;
    let r = p.r4 * p.delta1 * (nd.d as f64 + 2.0) * m.i2 / s2;
    Ok(EnergyParts { e, d, r })
}

/// BD entropy with its dissipation and source terms.
pub fn bd_entropy(
    q: &ScalarField,
    u: &VectorField,
    p: &ModelParams,
    floor: f64,
) -> Result<EnergyParts> {
    let nd = Nodal::new(q, u, floor)?;
    let m = moments(q, u);
    let k2 = p.kappa * p.kappa;
    let (nu, d1) = (p.nu, p.delta1);
    let s2 = nd.s2;
    let sj = &nd.sj;
    let e = nd.sum(|k| {
        let gl = sj.grad_log(k);
        let w2 = (0..2)
            .map(|a| (nd.uv[k][a] + 2.0 * nu * gl[a]).powi(2))
            .sum::<f64>();
        sj.q[k] * (0.5 * (w2 + k2 * sj.grad_log_sq(k)) + p.a * nd.ln_q(k))
            + 2.0 * nu * p.r0 * (sj.q[k] - nd.ln_q(k))
    }) + 0.25 * p.r4 * m.i4;
    let d = nd.sum(|k| {
        let aa = nd.skew(k);
        2.0 * nu * sj.q[k] * frob(&aa, &aa)
            + (d1 + 2.0 * nu) * p.lambda * s2 * sj.q[k] * sj.grad_log_sq(k)
            + (k2 * (d1 + 2.0 * nu) + 4.0 * nu * nu * d1) * nd.hlog_sq(k)
            + p.r0 * nd.u2(k)
            + 2.0 * nu * p.r0 * d1 * sj.grad_log_sq(k)
            + p.r1 * sj.q[k] * nd.u2(k).powi(2)
    }) + p.r4 * (d1 + 2.0 * nu) / s2 * m.i4;
    let r = nd.sum(|k| {
        let q = sj.q[k];
        let gl = sj.grad_log(k);
        let uv = nd.uv[k];
        let dd = nd.sym(k);
        let hl = sj.sqrt_q_hess_log(k);
        let du_hl = sj.s[k] * frob(&dd, &hl);
        let gugq_gl: f64 = (0..2)
            .map(|a| (0..2).map(|c| nd.gu[k][a][c] * q * gl[c]).sum::<f64>() * gl[a])
            .sum();
        let u_gl = uv[0] * gl[0] + uv[1] * gl[1];
        let u_hl_gl: f64 = (0..2)
            .map(|a| uv[a] * (hl[a][0] * gl[0] + hl[a][1] * gl[1]))
            .sum::<f64>()
            * sj.s[k];
        let w_dot: f64 = (0..2)
            .map(|a| (uv[a] + 2.0 * nu * gl[a]) * (uv[a] - d1 * gl[a]))
            .sum();
        -2.0 * nu * d1 * du_hl - 2.0 * nu * d1 * gugq_gl - 2.0 * nu * p.r1 * q * nd.u2(k) * u_gl
            + 2.0 * nu * d1 * u_hl_gl
            + 2.0 * nu / s2 * q * w_dot
    }) + p.r4 * (d1 + 2.0 * nu) * (nd.d as f64 + 2.0) / s2 * m.i2;
    Ok(EnergyParts { e, d, r })
}

/// Right-hand side of the second-order equation for `I2 - d` (no diffusion).
pub fn i2_forcing(q: &ScalarField, u: &VectorField, p: &ModelParams, floor: f64) -> Result<f64> {
    let nd = Nodal::new(q, u, floor)?;
    let m = moments(q, u);
    let s2 = nd.s2;
    let sj = &nd.sj;
    let jet_grad: Vec<[f64; 2]> = {
        let fr = q.frame();
        let mut g = vec![[0.0; 2]; fr.n_nodes()];
        for a in 0..fr.dim() {
            for (o, v) in g.iter_mut().zip(q.derivative(a).nodal()) {
                o[a] = *v;
            }
        }
        g
    };
    let qn = q.nodal();
    let kin = nd.sum(|k| qn[k] * nd.u2(k));
    let fisher = nd.sum(|k| sj.q[k] * sj.grad_log_sq(k));
    let gq_u = nd.sum(|k| jet_grad[k][0] * nd.uv[k][0] + jet_grad[k][1] * nd.uv[k][1]);
    let u_x = nd.sum(|k| nd.uv[k][0] * nd.x[k][0] + nd.uv[k][1] * nd.x[k][1]);
    let cubic =
        nd.sum(|k| qn[k] * nd.u2(k) * (nd.uv[k][0] * nd.x[k][0] + nd.uv[k][1] * nd.x[k][1]));
    let k2 = p.kappa * p.kappa;
    Ok(2.0 / s2 * (kin + k2 * fisher) + 4.0 * p.nu / s2 * gq_u
        - 2.0 * p.r0 / s2 * u_x
        - 2.0 * p.r1 / s2 * cubic
        - 2.0 * p.r4 / s2 * m.i4)
}

/// `2 int q u.x / sigma^2`, the rate of change of `I2`.
pub fn i2_rate(q: &ScalarField, u: &VectorField) -> f64 {
    let fr = q.frame();
    let s2 = fr.sigma() * fr.sigma();
    let qn = q.nodal();
    let mut acc = 0.0;
    for a in 0..fr.dim() {
        let un = u.comp(a).nodal();
        for k in 0..fr.n_nodes() {
            acc += fr.weights()[k] * qn[k] * un[k] * fr.points()[k][a];
        }
    }
    2.0 * acc / s2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianMargins {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub intermediate: f64,
    pub last: f64,
}

/// Margins of the two Hessian-lemma inequalities; nonnegative when they hold.
pub fn check_hessian_lemma(q: &ScalarField, floor: f64) -> Result<HessianMargins> {
    let fr = q.frame();
    let sj = SqrtJet::of(q, floor)?;
    let w = fr.weights();
    let s2 = fr.sigma() * fr.sigma();
    let mut a = 0.0;
    let mut b = 0.0;
    let mut d = 0.0;
    let mut i4 = 0.0;
    let qn = q.nodal();
    for k in 0..fr.n_nodes() {
        a += w[k] * frob(&sj.hess_s[k], &sj.hess_s[k]);
        let g2 = sj.grad_s[k][0].powi(2) + sj.grad_s[k][1].powi(2);
        b += w[k] * g2 * g2 / sj.q[k];
        let m = sj.sqrt_q_hess_log(k);
        d += w[k] * 0.25 * frob(&m, &m);
        let r = (fr.points()[k][0].powi(2) + fr.points()[k][1].powi(2)) / s2;
        i4 += w[k] * qn[k] * r * r;
    }
    let sigma = fr.sigma();
    let intermediate =
        d + (3.0 * b * d).sqrt() + i4.max(0.0).powf(0.25) * b.powf(0.75) / sigma - (a + b);
    let last = 4.0 * d + 3.0 * i4 / (4.0 * s2 * s2) - (a + 0.5 * b);
    Ok(HessianMargins {
        a,
        b,
        d,
        intermediate,
        last,
    })
}

/// `2 sigma^2 int |grad sqrt q|^2 - Ent(q)`; nonnegative by the Gaussian log-Sobolev inequality.
pub fn check_log_sobolev(q: &ScalarField, floor: f64) -> Result<f64> {
    let fr = q.frame();
    let sj = SqrtJet::of(q, floor)?;
    let w = fr.weights();
    let mass = q.integral();
    let mut fisher = 0.0;
    let mut ent = 0.0;
    for k in 0..fr.n_nodes() {
        fisher += w[k] * (sj.grad_s[k][0].powi(2) + sj.grad_s[k][1].powi(2));
        ent += w[k] * sj.q[k] * sj.q[k].ln();
    }
    ent -= mass * mass.ln();
    Ok(2.0 * fr.sigma().powi(2) * fisher - ent)
}

/// `||sqrt(1+|x|^2) g||` for nodal `g` with components `g[k][a]`.
fn weighted_norm(fr: &crate::spectral::GaussianFrame, g: &[[f64; 2]]) -> f64 {
    let mut acc = 0.0;
    for k in 0..fr.n_nodes() {
        let x = fr.points()[k];
        acc += fr.weights()[k]
            * (1.0 + x[0] * x[0] + x[1] * x[1])
            * (g[k][0].powi(2) + g[k][1].powi(2));
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn ratio(lhs: f64, rhs: f64) -> PoincareRatio {
    let r = if lhs <= 1e-14 {
        0.0
    } else if rhs <= 1e-300 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    PoincareRatio { lhs, rhs, ratio: r }
}

/// `||sqrt(1+|x|^2)(f - mean f)|| / ||grad f||`.
pub fn strong_poincare(f: &ScalarField) -> PoincareRatio {
    let fr = f.frame();
    let mean = f.integral();
    let g: Vec<[f64; 2]> = f.nodal().iter().map(|v| [v - mean, 0.0]).collect();
    let lhs = weighted_norm(fr, &g);
    let rhs = (0..fr.dim())
        .map(|a| f.derivative(a).norm().powi(2))
        .sum::<f64>()
        .sqrt();
    ratio(lhs, rhs)
}

/// Korn variant: mean and the infinitesimal rotation removed, symmetric gradient below.
pub fn strong_poincare_korn(u: &VectorField) -> PoincareRatio {
    let fr = u.frame();
    let d = fr.dim();
    let uv = velocity_values(u);
    let mut mean = [0.0; 2];
    for a in 0..d {
        mean[a] = u.comp(a).integral();
    }
    let mut omega = 0.0;
    if d == 2 {
        // projection onto (-y, x), whose squared norm is 2 sigma^2
        let mut num = 0.0;
        for k in 0..fr.n_nodes() {
            let x = fr.points()[k];
            num += fr.weights()[k] * (-x[1] * uv[k][0] + x[0] * uv[k][1]);
        }
        omega = num / (2.0 * fr.sigma().powi(2));
    }
    let g: Vec<[f64; 2]> = (0..fr.n_nodes())
        .map(|k| {
            let x = fr.points()[k];
            [
                uv[k][0] - mean[0] + omega * x[1],
                uv[k][1] - mean[1] - omega * x[0],
            ]
        })
        .collect();
    let lhs = weighted_norm(fr, &g);
    let gu = velocity_gradient(u);
    let mut acc = 0.0;
    for k in 0..fr.n_nodes() {
        let s = [
            [gu[k][0][0], 0.5 * (gu[k][0][1] + gu[k][1][0])],
            [0.5 * (gu[k][0][1] + gu[k][1][0]), gu[k][1][1]],
        ];
        acc += fr.weights()[k] * frob(&s, &s);
    }
    ratio(lhs, acc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub sup_scalar: f64,
    pub sup_korn: f64,
    pub samples: usize,
}

pub fn check_poincare_family(scalars: &[ScalarField], vectors: &[VectorField]) -> PoincareReport {
    let sup_scalar = scalars
        .iter()
        .map(|f| strong_poincare(f).ratio)
        .fold(0.0, f64::max);
    let sup_korn = vectors
        .iter()
        .map(|u| strong_poincare_korn(u).ratio)
        .fold(0.0, f64::max);
    PoincareReport {
        sup_scalar,
        sup_korn,
        samples: scalars.len() + vectors.len(),
    }
}

/// Energy of the ground state, `d (k^2/s^2 - (a/2) ln(2 pi s^2))`.
pub fn minimal_energy(p: &ModelParams, dim: usize) -> Result<f64> {
    let s2 = p.sigma()?.powi(2);
    Ok(dim as f64 * (p.kappa * p.kappa / s2 - 0.5 * p.a * (2.0 * std::f64::consts::PI * s2).ln()))
}

/// Undrag energy written in Lebesgue variables,
/// `int rho (|u|^2/2 + k^2 |grad ln rho|^2 / 2 + a ln rho + lambda |x|^2 / 2)`.
pub fn lebesgue_energy(
    q: &ScalarField,
    u: &VectorField,
    p: &ModelParams,
    floor: f64,
) -> Result<f64> {
    let nd = Nodal::new(q, u, floor)?;
    let fr = q.frame();
    let s2 = nd.s2;
    let d = nd.d as f64;
    let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI * s2).ln();
    let sj = &nd.sj;
    Ok(nd.sum(|k| {
        let x = nd.x[k];
        let r2 = x[0] * x[0] + x[1] * x[1];
        let ln_rho = nd.ln_q(k) + log_norm - r2 / (2.0 * s2);
        let gl = sj.grad_log(k);
        let g2 = (0..fr.dim())
            .map(|a| (gl[a] - x[a] / s2).powi(2))
            .sum::<f64>();
        sj.q[k]
            * (0.5 * nd.u2(k) + 0.5 * p.kappa * p.kappa * g2 + p.a * ln_rho + 0.5 * p.lambda * r2)
    }))
}

/// One row of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub moments: Moments,
    pub energy: EnergyParts,
    pub bd: EnergyParts,
    pub min_q: f64,
    pub max_q: f64,
    pub i2_forcing: f64,
    pub envelope_lower: f64,
    pub envelope_upper: f64,
    pub log_sobolev: f64,
    pub hessian: HessianMargins,
}

pub const MARGIN_NAMES: [&str; 5] = [
    "envelope_lower",
    "envelope_upper",
    "log_sobolev",
    "hessian_intermediate",
    "hessian_final",
];

impl DiagnosticsRecord {
    pub fn compute(state: &SimState, p: &ModelParams, floor: f64) -> Result<Self> {
        let q = &state.q;
        let u = &state.u;
        let fr = q.frame();
        let mut min_q = f64::INFINITY;
        let mut max_q = f64::NEG_INFINITY;
        for (v, r) in q.nodal().iter().zip(fr.resolved()) {
            if *r {
                min_q = min_q.min(*v);
                max_q = max_q.max(*v);
            }
        }
        Ok(DiagnosticsRecord {
            t: state.t,
            moments: moments(q, u),
            energy: energy(q, u, p, floor)?,
            bd: bd_entropy(q, u, p, floor)?,
            min_q,
            max_q,
            i2_forcing: if p.delta1 == 0.0 {
                i2_forcing(q, u, p, floor)?
            } else {
                f64::NAN
            },
            envelope_lower: min_q - state.envelope.lower(),
            envelope_upper: state.envelope.upper() - max_q,
            log_sobolev: check_log_sobolev(q, floor)?,
            hessian: check_hessian_lemma(q, floor)?,
        })
    }

    pub fn margins(&self) -> [f64; 5] {
        [
            self.envelope_lower,
            self.envelope_upper,
            self.log_sobolev,
            self.hessian.intermediate,
            self.hessian.last,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Largest excess of the energy inequality; negative means slack.
    pub energy_excess: f64,
    pub bd_excess: f64,
    pub tol: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.energy_excess <= self.tol && self.bd_excess <= self.tol
    }
}

/// Checks `E(t) + 1/2 int D <= E(0) + 2 r4 delta1 (d+2)^2 t / sigma^2` and
/// `E_BD(t) + 1/2 int D_BD <= E_BD(0) + int max(R_BD, 0)`, integrals by the trapezoid rule.
pub fn energy_inequality_audit(
    records: &[DiagnosticsRecord],
    p: &ModelParams,
    sigma: f64,
    dim: usize,
    tol: f64,
) -> Result<AuditReport> {
    if records.is_empty() {
        return Err(QnsError::TooFewSamples { need: 1, got: 0 });
    }
    let s2 = sigma * sigma;
    let slope = 2.0 * p.r4 * p.delta1 * (dim as f64 + 2.0).powi(2) / s2;
    let r0 = &records[0];
    let mut int_d = 0.0;
    let mut int_dbd = 0.0;
    let mut int_rbd = 0.0;
    let mut e_exc = f64::NEG_INFINITY;
    let mut b_exc = f64::NEG_INFINITY;
    for (k, r) in records.iter().enumerate() {
        if k > 0 {
            let prev = &records[k - 1];
            let h = r.t - prev.t;
            int_d += 0.5 * h * (prev.energy.d + r.energy.d);
            int_dbd += 0.5 * h * (prev.bd.d + r.bd.d);
            int_rbd += 0.5 * h * (prev.bd.r.max(0.0) + r.bd.r.max(0.0));
        }
        let t = r.t - r0.t;
        e_exc = e_exc.max(r.energy.e + 0.5 * int_d - r0.energy.e - slope * t);
        b_exc = b_exc.max(r.bd.e + 0.5 * int_dbd - r0.bd.e - int_rbd);
    }
    Ok(AuditReport {
        energy_excess: e_exc,
        bd_excess: b_exc,
        tol,
    })
}

/// Largest residual of
/// `I2~'' + (2 nu / s^2) I2~' + 2 (lambda + k^2/s^4) I2~ = forcing`
/// along uniformly spaced records, derivatives by five-point stencils.
pub fn i2_ode_residual(
    t: &[f64],
    i2_tilde: &[f64],
    forcing: &[f64],
    p: &ModelParams,
) -> Result<f64> {
    let n = t.len();
    if n < 5 || i2_tilde.len() != n || forcing.len() != n {
        return Err(QnsError::TooFewSamples {
            need: 5,
            got: n.min(i2_tilde.len()).min(forcing.len()),
        });
    }
    let h = t[1] - t[0];
    if !(h > 0.0)
        || t.windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0))
    {
        return Err(QnsError::InvalidParameter(
            "records must be uniformly spaced".into(),
        ));
    }
    if p.delta1 != 0.0 {
        return Err(QnsError::InvalidParameter(
            "second-moment equation assumes delta1 = 0".into(),
        ));
    }
    let s2 = p.sigma()?.powi(2);
    let c1 = 2.0 * p.nu / s2;
    let c0 = 2.0 * (p.lambda + p.kappa * p.kappa / (s2 * s2));
    let f = i2_tilde;
    let mut worst: f64 = 0.0;
    for k in 2..n - 2 {
        let d1 = (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]) / (12.0 * h);
        let d2 = (-f[k + 2] + 16.0 * f[k + 1] - 30.0 * f[k] + 16.0 * f[k - 1] - f[k - 2])
            / (12.0 * h * h);
        worst = worst.max((d2 + c1 * d1 + c0 * f[k] - forcing[k]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::DEFAULT_FLOOR;
    use crate::spectral::GaussianFrame;
    use approx::assert_abs_diff_eq;

    fn unit() -> (ModelParams, crate::spectral::Frame) {
        let p = ModelParams::new(1.0, 1.0, 0.5, 2.0);
        let fr = GaussianFrame::with_default_quadrature(p.sigma().unwrap(), 1, 12).unwrap();
        (p, fr)
    }

    #[test]
    fn ground_state_values() {
        let (p, fr) = unit();
        let q = ScalarField::constant(&fr, 1.0);
        let u = VectorField::zeros(&fr);
        let e = energy(&q, &u, &p, DEFAULT_FLOOR).unwrap();
        assert_abs_diff_eq!(e.e, 0.0, epsilon = 1e-15);
        let m = moments(&q, &u);
        assert_abs_diff_eq!(m.i2, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m.i4, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            minimal_energy(&p, 1).unwrap(),
            0.081_061_466_795_327_3,
            epsilon = 1e-13
        );
        let h = check_hessian_lemma(&q, DEFAULT_FLOOR).unwrap();
        assert_abs_diff_eq!(h.last, 9.0 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn bd_with_unit_density_and_zero_drag_is_kinetic() {
        let (p, fr) = unit();
        let q = ScalarField::constant(&fr, 1.0);
        let u = VectorField::new(vec![ScalarField::from_fn(&fr, |x| 0.3 + 0.1 * x[0])]).unwrap();
        let e = energy(&q, &u, &p, DEFAULT_FLOOR).unwrap();
        let b = bd_entropy(&q, &u, &p, DEFAULT_FLOOR).unwrap();
        assert_abs_diff_eq!(e.e, b.e, epsilon = 1e-14);
        assert_abs_diff_eq!(e.e, 0.5 * (0.09 + 0.01), epsilon = 1e-13);
    }

    #[test]
    fn coordinate_poincare_ratio_is_two() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 4).unwrap();
        let f = ScalarField::from_fn(&fr, |x| x[0]);
        assert_abs_diff_eq!(strong_poincare(&f).ratio, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_has_vanishing_korn_lhs() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 2, 4).unwrap();
        let u = VectorField::new(vec![
            ScalarField::from_fn(&fr, |x| -x[1]),
            ScalarField::from_fn(&fr, |x| x[0]),
        ])
        .unwrap();
        let r = strong_poincare_korn(&u);
        assert!(r.lhs < 1e-12);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn i2_ode_needs_samples() {
        let (p, _) = unit();
        assert!(i2_ode_residual(&[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &p).is_err());
    }
}
