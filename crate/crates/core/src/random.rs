//! Seeded random spectral fields.
//!
//! Coefficient `c_alpha` (for `alpha != 0`) is drawn from `N(0, 2^-|alpha|)` with a
//! ChaCha8 generator seeded by the given `u64`, in basis order. Densities add the
//! constant `1 + max(0, -min_n p(x_n))` (minimum over all quadrature nodes) and are then
//! divided by their integral.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::spectral::{Frame, ScalarField, VectorField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-mean field with coefficient variance `2^-|alpha|`.
pub fn random_field(frame: &Frame, rng: &mut ChaCha8Rng) -> ScalarField {
    let coeffs = (0..frame.n_basis())
        .map(|b| {
            let z: f64 = StandardNormal.sample(rng);
            if b == 0 {
                0.0
            } else {
                z * 0.5f64.powi(frame.total_degree(b) as i32).sqrt()
            }
        })
        .collect();
    ScalarField::from_coeffs(frame, coeffs).expect("length matches the frame")
}

/// Positive density with unit integral.
pub fn random_density(frame: &Frame, rng: &mut ChaCha8Rng) -> ScalarField {
    let p = random_field(frame, rng);
    let lo = p.nodal().iter().copied().fold(f64::INFINITY, f64::min);
    let q = p.map_coeffs(|b, c| if b == 0 { c + 1.0 + (-lo).max(0.0) } else { c });
    q.scale(1.0 / q.integral())
}

pub fn random_velocity(frame: &Frame, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    VectorField::new((0..frame.dim()).map(|_| random_field(frame, rng)).collect())
}
