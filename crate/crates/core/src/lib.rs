//! Hermite-Galerkin solver for the quantum Navier-Stokes system with a harmonic trap,
//! written in variables relative to the Gaussian ground state.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calculus;
pub mod cli;
pub mod coeff_file;
pub mod config;
pub mod continuation;
pub mod diagnostics;
pub mod error;
pub mod fokker_planck;
pub mod galerkin;
pub mod params;
pub mod random;
pub mod rescaled;
pub mod run;
pub mod spectral;

pub use error::{QnsError, Result};
pub use params::ModelParams;
