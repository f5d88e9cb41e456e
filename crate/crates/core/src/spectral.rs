//! Orthonormal Hermite expansions in the Gaussian-weighted space.
//!
//! A field is stored by its coefficients against `phi_a(x) = prod_i p_{a_i}(x_i / sigma)`,
//! where `p_k = He_k / sqrt(k!)`. Nodal values live on a tensor Gauss-Hermite grid whose
//! weights sum to one, so every integral against the reference measure is a plain
//! weighted sum.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{QnsError, Result};

pub type Point = [f64; 2];

/// Nodes where reconstruction amplifies coefficient round-off by more than this are
/// treated as unresolved by pointwise nonlinear operations.
pub const RESOLVED_AMPLIFICATION: f64 = 1e6;

/// Width of the reference Gaussian for given pressure, capillarity and trap strength.
pub fn reference_sigma(a: f64, kappa: f64, lambda: f64) -> Result<f64> {
    if !(a > 0.0 && lambda > 0.0 && kappa >= 0.0)
        || !(a.is_finite() && kappa.is_finite() && lambda.is_finite())
    {
        return Err(QnsError::InvalidParameter(format!(
            "need a > 0, kappa >= 0, lambda > 0 (got a={a}, kappa={kappa}, lambda={lambda})"
        )));
    }
    let s2 = (a + (a * a + 4.0 * lambda * kappa * kappa).sqrt()) / (2.0 * lambda);
    Ok(s2.sqrt())
}

/// Orthonormal probabilists' Hermite values `p_0(z) ..= p_n(z)`.
pub fn hermite_values(z: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(z);
    for k in 1..n {
        let next = (z * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
        out.push(next);
    }
}

/// Gauss-Hermite rule for the standard normal, weights normalized to sum one.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut vals = Vec::with_capacity(order + 1);
    for z in nodes.iter_mut() {
        for _ in 0..4 {
            hermite_values(*z, order, &mut vals);
            let d = (order as f64).sqrt() * vals[order - 1];
            if d == 0.0 {
                break;
            }
            let step = vals[order] / d;
            *z -= step;
            if step.abs() < 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
    }
    // enforce exact symmetry
    for i in 0..order / 2 {
        let m = 0.5 * (nodes[order - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[order - 1 - i] = m;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&z| {
            hermite_values(z, order - 1, &mut vals);
            1.0 / vals.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..order / 2 {
        let m = 0.5 * (weights[i] + weights[order - 1 - i]);
        weights[i] = m;
        weights[order - 1 - i] = m;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (nodes, weights)
}

/// Basis, quadrature and index bookkeeping for one reference Gaussian.
#[derive(Debug)]
pub struct GaussianFrame {
    sigma: f64,
    dim: usize,
    degree: usize,
    quad_order: usize,
    nodes_1d: Vec<f64>,
    indices: Vec<[usize; 2]>,
    points: Vec<Point>,
    weights: Vec<f64>,
    // n_basis x n_nodes, entry (i, n) = phi_i(x_n)
    basis: DMatrix<f64>,
    // same matrix with columns scaled by the quadrature weight
    analysis: DMatrix<f64>,
    resolved: Vec<bool>,
    lower: [Vec<Option<usize>>; 2],
    raise: [Vec<Option<usize>>; 2],
}

pub type Frame = Arc<GaussianFrame>;

impl GaussianFrame {
    /// Frame whose width solves the Gaussian ground-state relation.
    pub fn build(
        a: f64,
        kappa: f64,
        lambda: f64,
        dim: usize,
        degree: usize,
        quad_order: usize,
    ) -> Result<Frame> {
        let sigma = reference_sigma(a, kappa, lambda)?;
        Self::with_sigma(sigma, dim, degree, quad_order)
    }

    /// Frame with the default quadrature order `2 * degree + 4`.
    pub fn with_default_quadrature(sigma: f64, dim: usize, degree: usize) -> Result<Frame> {
        Self::with_sigma(sigma, dim, degree, 2 * degree + 4)
    }

    pub fn with_sigma(sigma: f64, dim: usize, degree: usize, quad_order: usize) -> Result<Frame> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(QnsError::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if dim != 1 && dim != 2 {
            return Err(QnsError::InvalidParameter(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if quad_order < 2 * degree + 4 {
            return Err(QnsError::InvalidParameter(format!(
                "quad_order {quad_order} below 2*degree+4 = {}",
                2 * degree + 4
            )));
        }
        let (nodes_1d, weights_1d) = gauss_hermite(quad_order);

        let mut indices = Vec::new();
        if dim == 1 {
            for k in 0..=degree {
                indices.push([k, 0]);
            }
        } else {
            for t in 0..=degree {
                for j in 0..=t {
                    indices.push([t - j, j]);
                }
            }
        }

        let mut table = Vec::with_capacity(quad_order);
        let mut vals = Vec::new();
        for &z in &nodes_1d {
            hermite_values(z, degree, &mut vals);
            table.push(vals.clone());
        }

        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut node_ix = Vec::new();
        if dim == 1 {
            for (i, (&z, &w)) in nodes_1d.iter().zip(&weights_1d).enumerate() {
                points.push([sigma * z, 0.0]);
                weights.push(w);
                node_ix.push([i, 0]);
            }
        } else {
            for i in 0..quad_order {
                for j in 0..quad_order {
                    points.push([sigma * nodes_1d[i], sigma * nodes_1d[j]]);
                    weights.push(weights_1d[i] * weights_1d[j]);
                    node_ix.push([i, j]);
                }
            }
        }

        let nb = indices.len();
        let nn = points.len();
        let basis = DMatrix::from_fn(nb, nn, |b, n| {
            let al = indices[b];
            let ix = node_ix[n];
            let mut v = table[ix[0]][al[0]];
            if dim == 2 {
                v *= table[ix[1]][al[1]];
            }
            v
        });
        let mut analysis = basis.clone();
        for (n, w) in weights.iter().enumerate() {
            analysis.column_mut(n).scale_mut(*w);
        }
        let resolved = (0..nn)
            .map(|n| basis.column(n).norm() <= RESOLVED_AMPLIFICATION)
            .collect();

        let mut frame = GaussianFrame {
            sigma,
            dim,
            degree,
            quad_order,
            nodes_1d,
            indices,
            points,
            weights,
            basis,
            analysis,
            resolved,
            lower: [Vec::new(), Vec::new()],
            raise: [Vec::new(), Vec::new()],
        };
        for axis in 0..dim {
            let mut lo = Vec::with_capacity(nb);
            let mut hi = Vec::with_capacity(nb);
            for b in 0..nb {
                let mut al = frame.indices[b];
                lo.push(if al[axis] > 0 {
                    al[axis] -= 1;
                    let r = frame.index_of(al);
                    al[axis] += 1;
                    r
                } else {
                    None
                });
                al[axis] += 1;
                hi.push(frame.index_of(al));
            }
            frame.lower[axis] = lo;
            frame.raise[axis] = hi;
        }
        Ok(Arc::new(frame))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn quad_order(&self) -> usize {
        self.quad_order
    }
    pub fn n_basis(&self) -> usize {
        self.indices.len()
    }
    pub fn n_nodes(&self) -> usize {
        self.points.len()
    }
    pub fn indices(&self) -> &[[usize; 2]] {
        &self.indices
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn nodes_1d(&self) -> &[f64] {
        &self.nodes_1d
    }
    /// Per-node flag: false where nodal values are dominated by coefficient round-off.
    pub fn resolved(&self) -> &[bool] {
        &self.resolved
    }
    /// Copy of `nodal` with every unresolved node replaced by `neutral`.
    pub fn masked(&self, nodal: &[f64], neutral: f64) -> Vec<f64> {
        nodal
            .iter()
            .zip(&self.resolved)
            .map(|(v, r)| if *r { *v } else { neutral })
            .collect()
    }
    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn total_degree(&self, b: usize) -> usize {
        let a = self.indices[b];
        a[0] + a[1]
    }

    pub fn index_of(&self, alpha: [usize; 2]) -> Option<usize> {
        if self.dim == 1 {
            if alpha[1] != 0 || alpha[0] > self.degree {
                return None;
            }
            return Some(alpha[0]);
        }
        let t = alpha[0] + alpha[1];
        if t > self.degree {
            return None;
        }
        Some(t * (t + 1) / 2 + alpha[1])
    }

    /// Index of `alpha - e_axis`, if it exists.
    pub fn lower_index(&self, b: usize, axis: usize) -> Option<usize> {
        self.lower[axis][b]
    }

    /// Index of `alpha + e_axis`, if it stays inside the truncation.
    pub fn raise_index(&self, b: usize, axis: usize) -> Option<usize> {
        self.raise[axis][b]
    }

    /// Quadrature sum of nodal values.
    pub fn integrate(&self, nodal: &[f64]) -> f64 {
        debug_assert_eq!(nodal.len(), self.n_nodes());
        nodal.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// Nodal values to coefficients by quadrature projection.
    pub fn transform(&self, nodal: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(nodal);
        (&self.analysis * v).iter().copied().collect()
    }

    /// Coefficients to nodal values.
    pub fn inverse_transform(&self, coeffs: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coeffs);
        self.basis.tr_mul(&c).iter().copied().collect()
    }

    /// Evaluate a coefficient vector at an arbitrary point.
    pub fn evaluate(&self, coeffs: &[f64], x: Point) -> f64 {
        let mut vx = Vec::new();
        let mut vy = Vec::new();
        hermite_values(x[0] / self.sigma, self.degree, &mut vx);
        if self.dim == 2 {
            hermite_values(x[1] / self.sigma, self.degree, &mut vy);
        }
        self.indices
            .iter()
            .zip(coeffs)
            .map(|(al, c)| {
                let mut v = vx[al[0]];
                if self.dim == 2 {
                    v *= vy[al[1]];
                }
                c * v
            })
            .sum()
    }

    /// Gram matrix `int w phi_i phi_j` for a nodal weight function `w`.
    pub fn weighted_gram(&self, nodal_weight: &[f64]) -> DMatrix<f64> {
        let mut scaled = self.analysis.clone();
        for (n, q) in nodal_weight.iter().enumerate() {
            scaled.column_mut(n).scale_mut(*q);
        }
        let g = &scaled * self.basis.transpose();
        (&g + g.transpose()) * 0.5
    }
}

/// Scalar field on a frame. Nodal values are computed on first use.
#[derive(Debug, Clone)]
pub struct ScalarField {
    frame: Frame,
    coeffs: Vec<f64>,
    nodal: OnceLock<Vec<f64>>,
}

impl ScalarField {
    pub fn from_coeffs(frame: &Frame, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != frame.n_basis() {
            return Err(QnsError::Dimension {
                expected: frame.n_basis(),
                got: coeffs.len(),
            });
        }
        Ok(ScalarField {
            frame: frame.clone(),
            coeffs,
            nodal: OnceLock::new(),
        })
    }

    pub fn from_nodal(frame: &Frame, nodal: &[f64]) -> Result<Self> {
        if nodal.len() != frame.n_nodes() {
            return Err(QnsError::Dimension {
                expected: frame.n_nodes(),
                got: nodal.len(),
            });
        }
        Ok(ScalarField {
            frame: frame.clone(),
            coeffs: frame.transform(nodal),
            nodal: OnceLock::new(),
        })
    }

    pub fn from_fn(frame: &Frame, f: impl Fn(Point) -> f64) -> Self {
        let nodal: Vec<f64> = frame.points().iter().map(|&p| f(p)).collect();
        ScalarField {
            frame: frame.clone(),
            coeffs: frame.transform(&nodal),
            nodal: OnceLock::new(),
        }
    }

    pub fn zeros(frame: &Frame) -> Self {
        ScalarField {
            frame: frame.clone(),
            coeffs: vec![0.0; frame.n_basis()],
            nodal: OnceLock::new(),
        }
    }

    pub fn constant(frame: &Frame, c: f64) -> Self {
        let mut f = Self::zeros(frame);
        f.coeffs[0] = c;
        f
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn nodal(&self) -> &[f64] {
        self.nodal
            .get_or_init(|| self.frame.inverse_transform(&self.coeffs))
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.frame.evaluate(&self.coeffs, x)
    }

    /// Integral against the reference measure.
    pub fn integral(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn same_frame(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.frame, &other.frame)
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i, c))
            .collect();
        ScalarField {
            frame: self.frame.clone(),
            coeffs,
            nodal: OnceLock::new(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_coeffs(|_, c| s * c)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Self {
        self.map_coeffs(|i, c| c + s * other.coeffs[i])
    }

    /// Partial derivative; lowers the degree by one.
    pub fn derivative(&self, axis: usize) -> Self {
        let fr = &self.frame;
        let mut out = vec![0.0; fr.n_basis()];
        for b in 0..fr.n_basis() {
            if let Some(lo) = fr.lower_index(b, axis) {
                out[lo] += (fr.indices[b][axis] as f64).sqrt() / fr.sigma * self.coeffs[b];
            }
        }
        ScalarField {
            frame: fr.clone(),
            coeffs: out,
            nodal: OnceLock::new(),
        }
    }

    /// Multiplication by `x_axis`, truncated to the frame degree.
    pub fn times_coordinate(&self, axis: usize) -> Self {
        let fr = &self.frame;
        let s = fr.sigma;
        let mut out = vec![0.0; fr.n_basis()];
        for b in 0..fr.n_basis() {
            let k = fr.indices[b][axis] as f64;
            if let Some(hi) = fr.raise_index(b, axis) {
                out[hi] += s * (k + 1.0).sqrt() * self.coeffs[b];
            }
            if let Some(lo) = fr.lower_index(b, axis) {
                out[lo] += s * k.sqrt() * self.coeffs[b];
            }
        }
        ScalarField {
            frame: fr.clone(),
            coeffs: out,
            nodal: OnceLock::new(),
        }
    }

    /// Ornstein-Uhlenbeck operator, diagonal with eigenvalue `-|alpha| / sigma^2`.
    pub fn ou_apply(&self) -> Self {
        let fr = self.frame.clone();
        let s2 = fr.sigma * fr.sigma;
        self.map_coeffs(|b, c| -(fr.total_degree(b) as f64) / s2 * c)
    }

    /// Product computed nodally and projected back.
    pub fn multiply(&self, other: &ScalarField) -> Result<Self> {
        if !self.same_frame(other) {
            return Err(QnsError::FrameMismatch);
        }
        let prod: Vec<f64> = self
            .nodal()
            .iter()
            .zip(other.nodal())
            .map(|(a, b)| a * b)
            .collect();
        ScalarField::from_nodal(&self.frame, &prod)
    }
}

/// Velocity-type field, one scalar component per axis.
#[derive(Debug, Clone)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Err(QnsError::Dimension {
                expected: 1,
                got: 0,
            });
        };
        let d = first.frame().dim();
        if comps.len() != d {
            return Err(QnsError::Dimension {
                expected: d,
                got: comps.len(),
            });
        }
        if comps.iter().any(|c| !c.same_frame(first)) {
            return Err(QnsError::FrameMismatch);
        }
        Ok(VectorField { comps })
    }

    pub fn zeros(frame: &Frame) -> Self {
        VectorField {
            comps: (0..frame.dim())
                .map(|_| ScalarField::zeros(frame))
                .collect(),
        }
    }

    /// Stacked coefficients, component-major.
    pub fn from_flat(frame: &Frame, flat: &[f64]) -> Result<Self> {
        let nb = frame.n_basis();
        if flat.len() != nb * frame.dim() {
            return Err(QnsError::Dimension {
                expected: nb * frame.dim(),
                got: flat.len(),
            });
        }
        let comps = flat
            .chunks(nb)
            .map(|c| ScalarField::from_coeffs(frame, c.to_vec()))
            .collect::<Result<_>>()?;
        Ok(VectorField { comps })
    }

    pub fn flat(&self) -> Vec<f64> {
        self.comps
            .iter()
            .flat_map(|c| c.coeffs().iter().copied())
            .collect()
    }

    pub fn frame(&self) -> &Frame {
        self.comps[0].frame()
    }
    pub fn dim(&self) -> usize {
        self.comps.len()
    }
    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }
    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        VectorField {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn axpy(&self, s: f64, other: &VectorField) -> Self {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.axpy(s, b))
                .collect(),
        }
    }

    /// Weighted divergence `div v - x.v / sigma^2`. The result has degree one higher
    /// than the input, so it is returned as nodal values rather than truncated.
    pub fn div_m_nodal(&self) -> Vec<f64> {
        let fr = self.frame();
        let s2 = fr.sigma() * fr.sigma();
        let mut out = vec![0.0; fr.n_nodes()];
        for (a, c) in self.comps.iter().enumerate() {
            let d = c.derivative(a);
            for ((o, dv), (v, p)) in out
                .iter_mut()
                .zip(d.nodal())
                .zip(c.nodal().iter().zip(fr.points()))
            {
                *o += dv - p[a] * v / s2;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Rank-two tensor field stored row-major.
#[derive(Debug, Clone)]
pub struct TensorField {
    comps: Vec<ScalarField>,
    symmetry: Symmetry,
}

impl TensorField {
    pub fn new(comps: Vec<ScalarField>, symmetry: Symmetry) -> Result<Self> {
        let d = comps.first().map(|c| c.frame().dim()).unwrap_or(0);
        if comps.len() != d * d || d == 0 {
            return Err(QnsError::Dimension {
                expected: d * d,
                got: comps.len(),
            });
        }
        Ok(TensorField { comps, symmetry })
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        let d = self.comps[0].frame().dim();
        &self.comps[i * d + j]
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Weighted divergence, row-wise: `(div_m T)_i = sum_j d_j T_ij - x_j T_ij / sigma^2`,
    /// truncated to the frame degree.
    pub fn div_m(&self) -> VectorField {
        let fr = self.comps[0].frame().clone();
        let d = fr.dim();
        let comps = (0..d)
            .map(|i| {
                let mut acc = ScalarField::zeros(&fr);
                for j in 0..d {
                    acc = acc.axpy(1.0, &weighted_divergence_part(self.get(i, j), j));
                }
                acc
            })
            .collect();
        VectorField { comps }
    }
}

/// Coefficients of `d_axis f - x_axis f / sigma^2`: the raising operator, so the image
/// never has a zeroth mode.
pub fn weighted_divergence_part(f: &ScalarField, axis: usize) -> ScalarField {
    let fr = f.frame();
    let mut out = vec![0.0; fr.n_basis()];
    for b in 0..fr.n_basis() {
        if let Some(lo) = fr.lower_index(b, axis) {
            out[b] -= (fr.indices()[b][axis] as f64).sqrt() / fr.sigma() * f.coeffs()[lo];
        }
    }
    ScalarField::from_coeffs(fr, out).expect("same frame")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigma_positive_root() {
        let s = reference_sigma(1.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s * s, 2.561_552_812_808_830_3, epsilon = 1e-14);
        assert_abs_diff_eq!(1.0 / (s * s) + 4.0 / s.powi(4), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sigma_rejects_bad_input() {
        assert!(reference_sigma(0.0, 1.0, 1.0).is_err());
        assert!(reference_sigma(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn quadrature_weights_and_moments() {
        let (z, w) = gauss_hermite(20);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        let m = |p: i32| z.iter().zip(&w).map(|(z, w)| w * z.powi(p)).sum::<f64>();
        assert_abs_diff_eq!(m(2), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m(4), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m(10), 945.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m(3), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn x_squared_coefficients() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 1, 4).unwrap();
        let f = ScalarField::from_fn(&fr, |p| p[0] * p[0]);
        assert_abs_diff_eq!(f.coeffs()[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.coeffs()[2], 2f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(f.coeffs()[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn fourth_moment_in_two_dimensions() {
        let fr = GaussianFrame::with_default_quadrature(1.0, 2, 4).unwrap();
        let nodal: Vec<f64> = fr
            .points()
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).powi(2))
            .collect();
        assert_abs_diff_eq!(fr.integrate(&nodal), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn ou_eigenvalues() {
        let fr = GaussianFrame::with_default_quadrature(1.5, 2, 5).unwrap();
        let b = fr.index_of([2, 1]).unwrap();
        let mut c = vec![0.0; fr.n_basis()];
        c[b] = 1.0;
        let f = ScalarField::from_coeffs(&fr, c).unwrap().ou_apply();
        assert_abs_diff_eq!(f.coeffs()[b], -3.0 / 2.25, epsilon = 1e-15);
    }

    #[test]
    fn coordinate_multiply_matches_nodal() {
        let fr = GaussianFrame::with_default_quadrature(0.7, 2, 6).unwrap();
        let f = ScalarField::from_fn(&fr, |p| 1.0 + p[0] * p[1] - 0.3 * p[1].powi(3));
        let g = f.times_coordinate(1);
        let h = ScalarField::from_fn(&fr, |p| p[1] * (1.0 + p[0] * p[1] - 0.3 * p[1].powi(3)));
        for (a, b) in g.coeffs().iter().zip(h.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadrature_order_enforced() {
        assert!(GaussianFrame::with_sigma(1.0, 1, 10, 23).is_err());
        assert!(GaussianFrame::with_sigma(1.0, 3, 2, 8).is_err());
    }
}
