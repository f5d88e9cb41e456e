//! Weighted differential operators and the nonlinear density expressions.
//!
//! Square-root and logarithmic quantities are formed pointwise from exact spectral
//! derivatives of `q`, so no projection of `sqrt(q)` or `ln q` is ever needed.

use crate::error::{QnsError, Result};
use crate::spectral::{Frame, GaussianFrame, ScalarField, VectorField};

pub const DEFAULT_FLOOR: f64 = 1e-10;

pub type Sym2 = [[f64; 2]; 2];

/// Value, gradient and Hessian of a field at every node.
#[derive(Debug, Clone)]
pub struct Jet {
    pub val: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<Sym2>,
}

impl Jet {
    pub fn of(f: &ScalarField) -> Jet {
        let fr = f.frame();
        let d = fr.dim();
        let n = fr.n_nodes();
        let mut grad = vec![[0.0; 2]; n];
        let mut hess = vec![[[0.0; 2]; 2]; n];
        for a in 0..d {
            let da = f.derivative(a);
            for (g, v) in grad.iter_mut().zip(da.nodal()) {
                g[a] = *v;
            }
            for b in a..d {
                let dab = da.derivative(b);
                for (h, v) in hess.iter_mut().zip(dab.nodal()) {
                    h[a][b] = *v;
                    h[b][a] = *v;
                }
            }
        }
        Jet {
            val: f.nodal().to_vec(),
            grad,
            hess,
        }
    }
}

/// Gradient of a vector field at every node, `grad[n][a][c] = d_c u_a`.
pub fn velocity_gradient(u: &VectorField) -> Vec<Sym2> {
    let fr = u.frame();
    let d = fr.dim();
    let mut out = vec![[[0.0; 2]; 2]; fr.n_nodes()];
    for a in 0..d {
        for c in 0..d {
            let dc = u.comp(a).derivative(c);
            for (g, v) in out.iter_mut().zip(dc.nodal()) {
                g[a][c] = *v;
            }
        }
    }
    out
}

/// Nodal values of a vector field, `out[n][a]`.
pub fn velocity_values(u: &VectorField) -> Vec<[f64; 2]> {
    let fr = u.frame();
    let mut out = vec![[0.0; 2]; fr.n_nodes()];
    for a in 0..u.dim() {
        for (o, v) in out.iter_mut().zip(u.comp(a).nodal()) {
            o[a] = *v;
        }
    }
    out
}

/// Pointwise square-root data of a density: `s = sqrt q`, `grad s`, `D^2 s`.
#[derive(Debug, Clone)]
pub struct SqrtJet {
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    pub grad_s: Vec<[f64; 2]>,
    pub hess_s: Vec<Sym2>,
}

/// Positivity on the resolved nodes.
pub fn check_floor(frame: &GaussianFrame, q: &[f64], floor: f64) -> Result<()> {
    for (node, &value) in q.iter().enumerate() {
        if frame.resolved()[node] && !(value >= floor) {
            return Err(QnsError::Positivity { node, value, floor });
        }
    }
    Ok(())
}

impl SqrtJet {
    /// Unresolved nodes get the neutral state `q = 1` with vanishing derivatives.
    pub fn from_jet(j: &Jet, frame: &GaussianFrame, floor: f64) -> Result<SqrtJet> {
        check_floor(frame, &j.val, floor)?;
        let dim = frame.dim();
        let n = j.val.len();
        let mut qs = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        let mut grad_s = Vec::with_capacity(n);
        let mut hess_s = Vec::with_capacity(n);
        for k in 0..n {
            if !frame.resolved()[k] {
                qs.push(1.0);
                s.push(1.0);
                grad_s.push([0.0; 2]);
                hess_s.push([[0.0; 2]; 2]);
                continue;
            }
            let q = j.val[k];
            let sq = q.sqrt();
            let g = j.grad[k];
            let mut gs = [0.0; 2];
            let mut hs = [[0.0; 2]; 2];
            for a in 0..dim {
                gs[a] = g[a] / (2.0 * sq);
                for b in 0..dim {
                    hs[a][b] = j.hess[k][a][b] / (2.0 * sq) - g[a] * g[b] / (4.0 * q * sq);
                }
            }
            qs.push(q);
            s.push(sq);
            grad_s.push(gs);
            hess_s.push(hs);
        }
        Ok(SqrtJet {
            q: qs,
            s,
            grad_s,
            hess_s,
        })
    }

    pub fn of(q: &ScalarField, floor: f64) -> Result<SqrtJet> {
        Self::from_jet(&Jet::of(q), q.frame(), floor)
    }

    /// `|grad ln q|^2 = 4 |grad sqrt q|^2 / q`.
    pub fn grad_log_sq(&self, n: usize) -> f64 {
        4.0 * (self.grad_s[n][0].powi(2) + self.grad_s[n][1].powi(2)) / self.q[n]
    }

    /// `grad ln q = 2 grad sqrt q / sqrt q`.
    pub fn grad_log(&self, n: usize) -> [f64; 2] {
        [
            2.0 * self.grad_s[n][0] / self.s[n],
            2.0 * self.grad_s[n][1] / self.s[n],
        ]
    }

    /// `sqrt q * D^2 ln q = 2 (D^2 sqrt q - grad sqrt q (x) grad sqrt q / sqrt q)`.
    pub fn sqrt_q_hess_log(&self, n: usize) -> Sym2 {
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] = 2.0
                    * (self.hess_s[n][a][b] - self.grad_s[n][a] * self.grad_s[n][b] / self.s[n]);
            }
        }
        m
    }

    /// Korteweg stress `sqrt q D^2 sqrt q - grad sqrt q (x) grad sqrt q`.
    pub fn korteweg(&self, n: usize) -> Sym2 {
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] = self.s[n] * self.hess_s[n][a][b] - self.grad_s[n][a] * self.grad_s[n][b];
            }
        }
        m
    }
}

pub fn frob(a: &Sym2, b: &Sym2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Weighted divergence of a vector field at the nodes (no truncation).
pub fn div_m(u: &VectorField) -> Vec<f64> {
    u.div_m_nodal()
}

/// Gap in `int grad q . v = - int q div_m v`; zero up to quadrature for polynomial data.
pub fn ibp_defect(q: &ScalarField, v: &VectorField) -> Result<f64> {
    if !q.same_frame(v.comp(0)) {
        return Err(QnsError::FrameMismatch);
    }
    let fr = q.frame();
    let mut lhs = vec![0.0; fr.n_nodes()];
    for a in 0..fr.dim() {
        let dq = q.derivative(a);
        for ((l, g), vv) in lhs.iter_mut().zip(dq.nodal()).zip(v.comp(a).nodal()) {
            *l += g * vv;
        }
    }
    let dm = v.div_m_nodal();
    let rhs: Vec<f64> = q.nodal().iter().zip(&dm).map(|(a, b)| -a * b).collect();
    Ok(fr.integrate(&lhs) - fr.integrate(&rhs))
}

/// Korteweg tensor at each node.
pub fn korteweg_tensor(q: &ScalarField, floor: f64) -> Result<Vec<Sym2>> {
    let sj = SqrtJet::of(q, floor)?;
    Ok((0..sj.q.len()).map(|n| sj.korteweg(n)).collect())
}

/// `sqrt(q) D^2 ln q` at each node.
pub fn hessian_log(q: &ScalarField, floor: f64) -> Result<Vec<Sym2>> {
    let sj = SqrtJet::of(q, floor)?;
    Ok((0..sj.q.len()).map(|n| sj.sqrt_q_hess_log(n)).collect())
}

/// Reference density at a point.
pub fn reference_density(frame: &GaussianFrame, x: [f64; 2]) -> f64 {
    let d = frame.dim() as i32;
    let s2 = frame.sigma() * frame.sigma();
    let r2 = x[0] * x[0] + x[1] * x[1];
    (2.0 * std::f64::consts::PI * s2).powf(-(d as f64) / 2.0) * (-r2 / (2.0 * s2)).exp()
}

/// Reference density translated by `shift`, relative to the reference density:
/// `exp(shift.x/s^2 - |shift|^2/2s^2)`, truncated from its exact Hermite expansion.
/// It has unit mass and is the equality case of the log-Sobolev inequality.
pub fn shifted_gaussian(frame: &Frame, shift: [f64; 2]) -> ScalarField {
    let c = [shift[0] / frame.sigma(), shift[1] / frame.sigma()];
    let coeffs = frame
        .indices()
        .iter()
        .map(|al| {
            (0..2)
                .map(|a| (1..=al[a]).fold(1.0, |acc, k| acc * c[a] / (k as f64).sqrt()))
                .product::<f64>()
        })
        .collect();
    ScalarField::from_coeffs(frame, coeffs).expect("length matches the frame")
}

/// Lebesgue density values at the nodes.
pub fn rho_of_q(q: &ScalarField) -> Vec<f64> {
    let fr = q.frame();
    q.nodal()
        .iter()
        .zip(fr.points())
        .map(|(v, p)| v * reference_density(fr, *p))
        .collect()
}

/// Relative density from Lebesgue values at the nodes.
pub fn q_of_rho(frame: &Frame, rho: &[f64]) -> Result<ScalarField> {
    if rho.len() != frame.n_nodes() {
        return Err(QnsError::Dimension {
            expected: frame.n_nodes(),
            got: rho.len(),
        });
    }
    let q: Vec<f64> = rho
        .iter()
        .zip(frame.points())
        .map(|(r, p)| r / reference_density(frame, *p))
        .collect();
    ScalarField::from_nodal(frame, &q)
}

/// Copy a field into another frame with the same width and at least the same degree.
pub fn refine(f: &ScalarField, target: &Frame) -> Result<ScalarField> {
    let src = f.frame();
    if src.dim() != target.dim()
        || target.degree() < src.degree()
        || (src.sigma() - target.sigma()).abs() > 0.0
    {
        return Err(QnsError::InvalidParameter(
            "refinement needs equal width and larger degree".into(),
        ));
    }
    let mut c = vec![0.0; target.n_basis()];
    for (b, al) in src.indices().iter().enumerate() {
        c[target.index_of(*al).expect("degree checked")] = f.coeffs()[b];
    }
    ScalarField::from_coeffs(target, c)
}

/// Weighted L2 norm (over resolved nodes) of the gap between the Bohm force and the
/// divergence of the log-Hessian stress, both divided by the reference density:
/// `2 k^2 q grad(Delta sqrt rho / sqrt rho)` versus `k^2 div_m(q D^2 ln rho)`.
///
/// Both sides are built pointwise from the exact derivatives of `q` up to third order,
/// one through `sqrt q` and one through `ln q`, so the gap is rounding only.
pub fn bohm_residual(q: &ScalarField, kappa: f64, floor: f64) -> Result<f64> {
    let fr = q.frame();
    let d = fr.dim();
    check_floor(fr, q.nodal(), floor)?;
    let s2 = fr.sigma() * fr.sigma();
    let d1: Vec<ScalarField> = (0..d).map(|a| q.derivative(a)).collect();
    let d2: Vec<Vec<ScalarField>> = d1
        .iter()
        .map(|f| (0..d).map(|b| f.derivative(b)).collect())
        .collect();
    let d3: Vec<Vec<Vec<ScalarField>>> = d2
        .iter()
        .map(|row| {
            row.iter()
                .map(|f| (0..d).map(|c| f.derivative(c)).collect())
                .collect()
        })
        .collect();
    let k2 = kappa * kappa;
    let mut acc = 0.0;
    for k in 0..fr.n_nodes() {
        if !fr.resolved()[k] {
            continue;
        }
        let x = fr.points()[k];
        let qv = q.nodal()[k];
        let g = |a: usize| d1[a].nodal()[k];
        let h = |a: usize, b: usize| d2[a][b].nodal()[k];
        let t3 = |a: usize, b: usize, c: usize| d3[a][b][c].nodal()[k];

        // sqrt route: t = sqrt q, H = Delta t / t - x.grad t / (s^2 t) + |x|^2/4s^4 - d/2s^2
        let t = qv.sqrt();
        let t1 = |a: usize| g(a) / (2.0 * t);
        let t2 = |a: usize, b: usize| h(a, b) / (2.0 * t) - g(a) * g(b) / (4.0 * t * t * t);
        let tt3 = |a: usize, b: usize, c: usize| {
            t3(a, b, c) / (2.0 * t)
                - (h(a, b) * g(c) + h(a, c) * g(b) + h(b, c) * g(a)) / (4.0 * t.powi(3))
                + 3.0 * g(a) * g(b) * g(c) / (8.0 * t.powi(5))
        };
        let lap_t: f64 = (0..d).map(|b| t2(b, b)).sum();
        let x_gt: f64 = (0..d).map(|b| x[b] * t1(b)).sum();
        // the constant part of H does not contribute to its gradient
        let mut lhs = [0.0; 2];
        for a in 0..d {
            let dlap: f64 = (0..d).map(|b| tt3(a, b, b)).sum();
            let dxg: f64 = t1(a) + (0..d).map(|b| x[b] * t2(a, b)).sum::<f64>();
            let dh = dlap / t - lap_t * t1(a) / (t * t) - (dxg / t - x_gt * t1(a) / (t * t)) / s2
                + x[a] / (2.0 * s2 * s2);
            lhs[a] = 2.0 * k2 * qv * dh;
        }

        // log route: L = ln q - |x|^2/2s^2 + const
        let l2 = |a: usize, b: usize| {
            h(a, b) / qv - g(a) * g(b) / (qv * qv) - if a == b { 1.0 / s2 } else { 0.0 }
        };
        let l3 = |a: usize, b: usize, c: usize| {
            t3(a, b, c) / qv - (h(a, b) * g(c) + h(a, c) * g(b) + h(b, c) * g(a)) / (qv * qv)
                + 2.0 * g(a) * g(b) * g(c) / qv.powi(3)
        };
        let mut gap = 0.0;
        for a in 0..d {
            let rhs: f64 = (0..d)
                .map(|b| g(b) * l2(a, b) + qv * l3(a, b, b) - x[b] * qv * l2(a, b) / s2)
                .sum();
            gap += (lhs[a] - k2 * rhs).powi(2);
        }
        acc += fr.weights()[k] * gap;
    }
    Ok(acc.sqrt())
}

/// Largest nodal gap between the Korteweg stress in relative form and the same stress
/// computed from Lebesgue-density derivatives,
/// `(1/rho_m) [sqrt rho D^2 sqrt rho - grad sqrt rho (x) grad sqrt rho + rho I / 2 s^2]`,
/// scaled by the size of the terms involved.
pub fn korteweg_form_gap(q: &ScalarField, floor: f64) -> Result<f64> {
    let fr = q.frame();
    let d = fr.dim();
    let s2 = fr.sigma() * fr.sigma();
    let j = Jet::of(q);
    let sj = SqrtJet::from_jet(&j, fr, floor)?;
    let mut worst: f64 = 0.0;
    for k in 0..fr.n_nodes() {
        let x = fr.points()[k];
        let rm = reference_density(fr, x);
        if rm == 0.0 || !fr.resolved()[k] {
            continue;
        }
        let qv = j.val[k];
        let rho = qv * rm;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for a in 0..d {
            g[a] = rm * (j.grad[k][a] - qv * x[a] / s2);
        }
        for a in 0..d {
            for b in 0..d {
                let delta = if a == b { 1.0 } else { 0.0 };
                h[a][b] = rm
                    * (j.hess[k][a][b]
                        - (j.grad[k][a] * x[b] + x[a] * j.grad[k][b]) / s2
                        - qv * delta / s2
                        + qv * x[a] * x[b] / (s2 * s2));
            }
        }
        let sr = rho.sqrt();
        let kq = sj.korteweg(k);
        let mut scale: f64 = 1.0;
        for a in 0..d {
            for b in 0..d {
                let gs_a = g[a] / (2.0 * sr);
                let gs_b = g[b] / (2.0 * sr);
                let hs = h[a][b] / (2.0 * sr) - g[a] * g[b] / (4.0 * rho * sr);
                let delta = if a == b { 1.0 } else { 0.0 };
                let rform = (sr * hs - gs_a * gs_b + rho * delta / (2.0 * s2)) / rm;
                scale = scale
                    .max((sr * hs / rm).abs())
                    .max((gs_a * gs_b / rm).abs());
                worst = worst.max((rform - kq[a][b]).abs() / scale);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GaussianFrame;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_density_has_no_stress() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 2, 6).unwrap();
        let q = ScalarField::constant(&fr, 1.0);
        for m in korteweg_tensor(&q, DEFAULT_FLOOR).unwrap() {
            assert!(m.iter().flatten().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn div_m_of_coordinate() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 4).unwrap();
        let u = VectorField::new(vec![ScalarField::from_fn(&fr, |p| p[0])]).unwrap();
        for (v, p) in div_m(&u).iter().zip(fr.points()) {
            assert_abs_diff_eq!(*v, 1.0 - p[0] * p[0], epsilon = 1e-11);
        }
    }

    #[test]
    fn tilted_density_log_hessian_vanishes() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 30).unwrap();
        let q = ScalarField::from_fn(&fr, |p| (0.4 * p[0] - 0.08).exp());
        let h = hessian_log(&q, DEFAULT_FLOOR).unwrap();
        let l2: f64 = h
            .iter()
            .zip(fr.weights())
            .map(|(m, w)| w * m[0][0].powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(l2 < 1e-11, "{l2}");
    }

    #[test]
    fn floor_is_enforced() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 4).unwrap();
        let q = ScalarField::from_fn(&fr, |p| p[0]);
        assert!(matches!(
            korteweg_tensor(&q, DEFAULT_FLOOR),
            Err(QnsError::Positivity { .. })
        ));
    }

    #[test]
    fn bohm_at_reference_is_exact() {
        let fr = GaussianFrame::with_default_quadrature(1.3, 2, 6).unwrap();
        let q = ScalarField::constant(&fr, 1.0);
        assert!(bohm_residual(&q, 0.8, DEFAULT_FLOOR).unwrap() < 1e-12);
    }
}
