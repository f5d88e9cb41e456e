//! Smoothed initial data, vanishing drag schedules and the drag-limit sweep.

use serde::{Deserialize, Serialize};

use crate::calculus::{velocity_values, SqrtJet};
use crate::diagnostics::{moments, AuditReport};
use crate::error::{QnsError, Result};
use crate::galerkin::{project_initial_velocity, SimState};
use crate::params::ModelParams;
use crate::run::{simulate, RunSettings};
use crate::spectral::{Frame, ScalarField, VectorField};

/// C2 radial cutoff: 1 on `|x| <= 1/2`, 0 on `|x| >= 1`, quintic smoothstep between.
pub fn cutoff(r: f64) -> f64 {
    let t = (2.0 * (1.0 - r)).clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Unit-mass bump `c (1 - |x|^2)^3` on the unit ball.
pub fn mollifier(x: [f64; 2], dim: usize) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 >= 1.0 {
        return 0.0;
    }
    let c = if dim == 1 {
        35.0 / 32.0
    } else {
        4.0 / std::f64::consts::PI
    };
    c * (1.0 - r2).powi(3)
}

/// Renormalization cutoff `phi_l`: ramps up on `[1/2l, 1/l]`, equals one on
/// `[1/l, l]`, ramps down on `[l, 2l]`.
pub fn renormalization_cutoff(l: f64, y: f64) -> f64 {
    if y >= 0.5 / l && y < 1.0 / l {
        2.0 * l * y - 1.0
    } else if y >= 1.0 / l && y <= l {
        1.0
    } else if y > l && y <= 2.0 * l {
        2.0 - y / l
    } else {
        0.0
    }
}

/// Uniform grid covering the node hull of one axis.
struct Axis {
    start: f64,
    h: f64,
    len: usize,
}

impl Axis {
    fn new(nodes: &[f64], sigma: f64, margin: f64) -> Axis {
        let spacing = nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            * sigma;
        let h = if spacing.is_finite() {
            spacing / 4.0
        } else {
            sigma / 4.0
        };
        let lo = nodes.first().copied().unwrap_or(0.0) * sigma - margin;
        let hi = nodes.last().copied().unwrap_or(0.0) * sigma + margin;
        let len = ((hi - lo) / h).ceil() as usize + 2;
        Axis { start: lo, h, len }
    }

    fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.h
    }

    /// Cell index and fractional offset for linear interpolation.
    fn locate(&self, x: f64) -> (usize, f64) {
        let s = ((x - self.start) / self.h).clamp(0.0, (self.len - 1) as f64 - 1e-12);
        let i = s.floor() as usize;
        (i.min(self.len - 2), s - i as f64)
    }
}

/// `sqrt(q0_n) = ((sqrt(q0) chi_n + 1/n) * zeta_n) / norm` and
/// `u0_n = sqrt(q0) u0 chi_n / sqrt(q0_n)`, with `chi_n(x) = chi(x/n)` and
/// `zeta_n(x) = n^d zeta(n x)`.
///
/// The convolution is a discrete sum on a uniform grid at a quarter of the smallest node
/// spacing, renormalized so the discrete kernel has unit mass; the result is read back at
/// the nodes by (bi)linear interpolation and projected.
pub fn mollify_initial_data(
    q0: &ScalarField,
    u0: &VectorField,
    n: usize,
) -> Result<(ScalarField, VectorField)> {
    if n == 0 {
        return Err(QnsError::InvalidParameter(
            "mollification index must be at least 1".into(),
        ));
    }
    let fr = q0.frame();
    let d = fr.dim();
    let nf = n as f64;
    let radius = 1.0 / nf;
    let axis = Axis::new(fr.nodes_1d(), fr.sigma(), radius);
    let ny = if d == 2 { axis.len } else { 1 };
    let point = |i: usize, j: usize| [axis.at(i), if d == 2 { axis.at(j) } else { 0.0 }];

    let chi = |x: [f64; 2]| cutoff((x[0] * x[0] + x[1] * x[1]).sqrt() / nf);
    let mut f = vec![0.0; axis.len * ny];
    for i in 0..axis.len {
        for j in 0..ny {
            let x = point(i, j);
            f[i * ny + j] = q0.eval(x).max(0.0).sqrt() * chi(x) + 1.0 / nf;
        }
    }

    let reach = (radius / axis.h).floor() as isize;
    let reach_y = if d == 2 { reach } else { 0 };
    let mut kernel = Vec::new();
    for a in -reach..=reach {
        for b in -reach_y..=reach_y {
            let y = [a as f64 * axis.h, b as f64 * axis.h];
            let w = mollifier([y[0] * nf, y[1] * nf], d);
            if w > 0.0 {
                kernel.push((a, b, w));
            }
        }
    }
    if kernel.is_empty() {
        kernel.push((0, 0, 1.0));
    }

    let (len, nyi) = (axis.len as isize, ny as isize);
    let mut g = vec![0.0; f.len()];
    for i in 0..len {
        for j in 0..nyi {
            let mut acc = 0.0;
            let mut mass = 0.0;
            for &(a, b, w) in &kernel {
                let (ii, jj) = (i - a, j - b);
                if ii >= 0 && ii < len && jj >= 0 && jj < nyi {
                    acc += w * f[(ii * nyi + jj) as usize];
                    mass += w;
                }
            }
            // dividing by the covered kernel mass also corrects the cut kernel at the grid edge
            g[(i * nyi + j) as usize] = acc / mass;
        }
    }

    let interp = |x: [f64; 2]| -> f64 {
        let (i, s) = axis.locate(x[0]);
        if d == 1 {
            return (1.0 - s) * g[i] + s * g[i + 1];
        }
        let (j, t) = axis.locate(x[1]);
        let v = |a: usize, b: usize| g[a * ny + b];
        (1.0 - s) * ((1.0 - t) * v(i, j) + t * v(i, j + 1))
            + s * ((1.0 - t) * v(i + 1, j) + t * v(i + 1, j + 1))
    };
    let sq: Vec<f64> = fr.points().iter().map(|p| interp(*p)).collect();
    let norm2 = fr.integrate(&sq.iter().map(|s| s * s).collect::<Vec<_>>());
    if !(norm2 > 0.0) {
        return Err(QnsError::InvalidParameter(
            "mollified density vanishes".into(),
        ));
    }
    let qn_nodal: Vec<f64> = sq.iter().map(|s| s * s / norm2).collect();
    let qn = ScalarField::from_nodal(fr, &qn_nodal)?;
    let qn = qn.scale(1.0 / qn.integral());

    let uv = velocity_values(u0);
    let un: Vec<[f64; 2]> = fr
        .points()
        .iter()
        .zip(q0.nodal())
        .zip(&qn_nodal)
        .zip(&uv)
        .map(|(((x, q), qm), u)| {
            let factor = (q.max(0.0) / qm).sqrt() * chi(*x);
            [u[0] * factor, u[1] * factor]
        })
        .collect();
    let un = project_initial_velocity(&qn, &un)?;
    Ok((qn, un))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragSchedule {
    pub n: usize,
    pub r0n: f64,
    pub r1n: f64,
    pub r4n: f64,
    pub delta1n: f64,
    /// `int (q0_n - ln q0_n)`.
    pub relative_entropy: f64,
    pub i4: f64,
    /// `r0n * int (q0_n - ln q0_n)`.
    pub r0_product: f64,
    /// `r4n * I4(q0_n)`.
    pub r4_product: f64,
}

impl DragSchedule {
    pub fn apply(&self, base: &ModelParams) -> ModelParams {
        base.with_drags(self.r0n, self.r1n, self.r4n)
            .with_delta1(self.delta1n)
    }
}

/// `r1n = 1/n`, `r0n = 1/(n + (int (q - ln q))^2)`, `r4n = 1/(n + I4^2)`.
/// The diffusion `delta1` is carried over unchanged.
pub fn drag_schedule(n: usize, q0n: &ScalarField, delta1: f64, floor: f64) -> Result<DragSchedule> {
    if n == 0 {
        return Err(QnsError::InvalidParameter(
            "schedule index must be at least 1".into(),
        ));
    }
    let sj = SqrtJet::of(q0n, floor)?;
    let fr = q0n.frame();
    let ent = fr.integrate(&sj.q.iter().map(|q| q - q.ln()).collect::<Vec<_>>());
    let i4 = moments(q0n, &VectorField::zeros(fr)).i4;
    let nf = n as f64;
    let r0n = 1.0 / (nf + ent * ent);
    let r4n = 1.0 / (nf + i4 * i4);
    Ok(DragSchedule {
        n,
        r0n,
        r1n: 1.0 / nf,
        r4n,
        delta1n: delta1,
        relative_entropy: ent,
        i4,
        r0_product: r0n * ent,
        r4_product: r4n * i4,
    })
}

/// Shared inputs of every sweep member; the drags in `params` are replaced per member.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub params: ModelParams,
    pub q0: ScalarField,
    pub u0: VectorField,
    pub settings: RunSettings,
    pub audit_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMember {
    pub n: usize,
    pub schedule: DragSchedule,
    pub completed: bool,
    /// Time reached before stopping.
    pub t_reached: f64,
    pub failure: Option<String>,
    pub audit: Option<AuditReport>,
    pub final_energy: f64,
    pub final_bd: f64,
    pub dirichlet0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub n_list: Vec<usize>,
    pub members: Vec<SweepMember>,
    /// `sup_t |sqrt q_n - sqrt q_m|_{H^1}` between consecutive members.
    pub increments_h1: Vec<f64>,
    /// `sup_t |sqrt q_n u_n - sqrt q_m u_m|_{L^2}` between consecutive members.
    pub increments_l2: Vec<f64>,
    pub burn_in_n: usize,
    /// Both increment sequences are non-increasing over pairs starting at `n >= burn_in_n`.
    pub monotone_after_burn_in: bool,
    pub audits_passed: bool,
    /// Index into `n_list` of the first member that failed.
    pub failed_index: Option<usize>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failed_index.is_none() && self.monotone_after_burn_in && self.audits_passed
    }
}

struct Sampled {
    s: Vec<f64>,
    grad_s: Vec<[f64; 2]>,
    m: Vec<[f64; 2]>,
}

fn sample(state: &SimState, floor: f64) -> Result<Sampled> {
    let sj = SqrtJet::of(&state.q, floor)?;
    let uv = velocity_values(&state.u);
    let m =
        sj.s.iter()
            .zip(&uv)
            .map(|(s, u)| [s * u[0], s * u[1]])
            .collect();
    Ok(Sampled {
        s: sj.s,
        grad_s: sj.grad_s,
        m,
    })
}

fn distances(fr: &Frame, a: &Sampled, b: &Sampled) -> (f64, f64) {
    let mut h1 = 0.0;
    let mut l2 = 0.0;
    for k in 0..fr.n_nodes() {
        if !fr.resolved()[k] {
            continue;
        }
        let w = fr.weights()[k];
        let ds = a.s[k] - b.s[k];
        let dg =
            (a.grad_s[k][0] - b.grad_s[k][0]).powi(2) + (a.grad_s[k][1] - b.grad_s[k][1]).powi(2);
        h1 += w * (ds * ds + dg);
        l2 += w * ((a.m[k][0] - b.m[k][0]).powi(2) + (a.m[k][1] - b.m[k][1]).powi(2));
    }
    (h1.sqrt(), l2.sqrt())
}

fn run_member(base: &SweepBase, n: usize) -> Result<(SweepMember, Vec<Sampled>)> {
    let floor = base.settings.step.floor;
    let (q, u) = mollify_initial_data(&base.q0, &base.u0, n)?;
    let schedule = drag_schedule(n, &q, base.params.delta1, floor)?;
    let p = schedule.apply(&base.params);
    let dirichlet0 = {
        let sj = SqrtJet::of(&q, floor)?;
        let g2: Vec<f64> = sj
            .grad_s
            .iter()
            .map(|g| g[0] * g[0] + g[1] * g[1])
            .collect();
        q.frame().integrate(&g2)
    };
    let mut settings = base.settings.clone();
    settings.keep_states = true;
    let out = simulate(SimState::new(q, u)?, &p, &settings)?;
    let audit = out.audit(&p, base.audit_tol).ok();
    let samples = out
        .states
        .iter()
        .map(|s| sample(s, floor))
        .collect::<Result<Vec<_>>>()?;
    let last = out
        .records
        .last()
        .expect("initial record is always present");
    Ok((
        SweepMember {
            n,
            schedule,
            completed: out.completed(),
            t_reached: out.last.t,
            failure: out.failure.as_ref().map(|e| e.to_string()),
            audit,
            final_energy: last.energy.e,
            final_bd: last.bd.e,
            dirichlet0,
        },
        samples,
    ))
}

/// Run the solver once per `n` (in parallel) and compare consecutive members on their
/// common record times.
pub fn vanishing_drag_sweep(
    base: &SweepBase,
    n_list: &[usize],
    burn_in_n: usize,
) -> Result<SweepReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(QnsError::InvalidParameter(
            "sweep indices must be positive and increasing".into(),
        ));
    }
    let results: Vec<Result<(SweepMember, Vec<Sampled>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = n_list
            .iter()
            .map(|&n| scope.spawn(move || run_member(base, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let fr = base.q0.frame().clone();
    let mut members = Vec::new();
    let mut samples = Vec::new();
    let mut failed_index = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((m, s)) => {
                if !m.completed && failed_index.is_none() {
                    failed_index = Some(i);
                }
                members.push(m);
                samples.push(s);
            }
            Err(e) => {
                failed_index.get_or_insert(i);
                members.push(SweepMember {
                    n: n_list[i],
                    schedule: DragSchedule {
                        n: n_list[i],
                        r0n: f64::NAN,
                        r1n: f64::NAN,
                        r4n: f64::NAN,
                        delta1n: base.params.delta1,
                        relative_entropy: f64::NAN,
                        i4: f64::NAN,
                        r0_product: f64::NAN,
                        r4_product: f64::NAN,
                    },
                    completed: false,
                    t_reached: 0.0,
                    failure: Some(e.to_string()),
                    audit: None,
                    final_energy: f64::NAN,
                    final_bd: f64::NAN,
                    dirichlet0: f64::NAN,
                });
                samples.push(Vec::new());
            }
        }
    }

    let mut increments_h1 = Vec::new();
    let mut increments_l2 = Vec::new();
    for w in samples.windows(2) {
        let len = w[0].len().min(w[1].len());
        let (mut h1, mut l2) = (0.0f64, 0.0f64);
        for k in 0..len {
            let (a, b) = distances(&fr, &w[0][k], &w[1][k]);
            h1 = h1.max(a);
            l2 = l2.max(b);
        }
        increments_h1.push(if len > 0 { h1 } else { f64::NAN });
        increments_l2.push(if len > 0 { l2 } else { f64::NAN });
    }
    let start = n_list
        .iter()
        .position(|&n| n >= burn_in_n)
        .unwrap_or(n_list.len());
    let non_increasing = |v: &[f64]| {
        v.iter()
            .skip(start)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] <= w[0])
    };
    let monotone_after_burn_in = non_increasing(&increments_h1) && non_increasing(&increments_l2);
    let audits_passed = members
        .iter()
        .all(|m| m.audit.map(|a| a.passed()).unwrap_or(false));
    Ok(SweepReport {
        n_list: n_list.to_vec(),
        members,
        increments_h1,
        increments_l2,
        burn_in_n,
        monotone_after_burn_in,
        audits_passed,
        failed_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::DEFAULT_FLOOR;
    use crate::spectral::GaussianFrame;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_density_schedule() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 8).unwrap();
        let s = drag_schedule(1, &ScalarField::constant(&fr, 1.0), 0.0, DEFAULT_FLOOR).unwrap();
        assert_abs_diff_eq!(s.r1n, 1.0);
        assert_abs_diff_eq!(s.r0n, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(s.r4n, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_abs_diff_eq!(cutoff(0.75), 0.5, epsilon = 1e-15);
        assert_eq!(renormalization_cutoff(3.0, 1.0), 1.0);
        assert_eq!(renormalization_cutoff(3.0, 7.0), 0.0);
    }

    #[test]
    fn zero_velocity_stays_zero() {
        let fr = GaussianFrame::with_default_quadrature(0.8, 1, 8).unwrap();
        let (q, u) = mollify_initial_data(
            &ScalarField::constant(&fr, 1.0),
            &VectorField::zeros(&fr),
            3,
        )
        .unwrap();
        assert_abs_diff_eq!(q.integral(), 1.0, epsilon = 1e-13);
        assert!(u.norm() == 0.0);
        assert!(mollify_initial_data(&q, &u, 0).is_err());
    }
}
