use serde::{Deserialize, Serialize};

use crate::error::{QnsError, Result};
use crate::spectral::reference_sigma;

/// Physical and regularization coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub kappa: f64,
    pub nu: f64,
    pub lambda: f64,
    pub r0: f64,
    pub r1: f64,
    pub r4: f64,
    pub delta1: f64,
}

impl ModelParams {
    pub fn new(a: f64, kappa: f64, nu: f64, lambda: f64) -> Self {
        ModelParams {
            a,
            kappa,
            nu,
            lambda,
            r0: 0.0,
            r1: 0.0,
            r4: 0.0,
            delta1: 0.0,
        }
    }

    pub fn with_drags(mut self, r0: f64, r1: f64, r4: f64) -> Self {
        self.r0 = r0;
        self.r1 = r1;
        self.r4 = r4;
        self
    }

    pub fn with_delta1(mut self, delta1: f64) -> Self {
        self.delta1 = delta1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| QnsError::InvalidParameter(format!("{name} = {v}"));
        for (name, v) in [("a", self.a), ("nu", self.nu), ("lambda", self.lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(name, v));
            }
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(bad("kappa", self.kappa));
        }
        for (name, v) in [
            ("r0", self.r0),
            ("r1", self.r1),
            ("r4", self.r4),
            ("delta1", self.delta1),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(name, v));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> Result<f64> {
        reference_sigma(self.a, self.kappa, self.lambda)
    }
}
