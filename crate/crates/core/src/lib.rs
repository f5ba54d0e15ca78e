//! Fourier multipliers built from Lévy measures.
//!
//! The crate turns jump-intensity data (a Lévy measure `V`, a jump modulator
//! `φ`, and an optional second-order part `(μ, ϕ)` on the sphere) into
//! multiplier symbols, applies them to periodic grid functions, estimates
//! their `Lᵖ` operator norms, and simulates the compound-Poisson martingale
//! transforms behind the `p* - 1` bound.

pub mod catalogue;
pub mod error;
pub mod levy_measure;
pub mod matrix_decomp;
pub mod mc_simulator;
pub mod multiplier_apply;
pub mod quadrature;
pub mod rng;
pub mod symbol;
pub mod vector;

pub use error::{Error, Result};
