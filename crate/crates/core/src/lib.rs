//! Operator-spreading hydrodynamics of random unitary circuits.
//!
//! The right endpoint of a Heisenberg-evolved operator string in a Haar
//! brickwork circuit performs a biased random walk whose one-step
//! generator is the stochastic transfer matrix `T(p)`, `p = q²/(q²+1)`.
//! This crate builds that matrix and its truncated and dissipative
//! deformations, computes their spectra, evolves endpoint densities,
//! evaluates closed-form return probabilities, and extracts the
//! thermalization rate. Two independent oracles are included: a Monte
//! Carlo sampler of the endpoint walk and a brute-force dense simulation
//! of small Haar circuits.
//!
//! Sites are labelled `x = 1..=L` in formulas and documentation; slices
//! are 0-based, so site `x` lives at index `x - 1`.

pub mod autocorr;
pub mod config;
pub mod error;
pub mod export;
pub mod matrices;
pub mod ruc_oracle;
pub mod spectral;
pub mod stochastic_oracle;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use matrices::{BandedMatrix, DiagonalWeight, JumpMoments, LinearStep, SymTridiagonal};
pub use spectral::{Gauge, Spectrum};
