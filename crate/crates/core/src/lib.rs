//! Numerical laboratory for the focusing energy-critical nonlinear Schrödinger
//! equation `i∂_tψ + Δψ + f(ψ) + |ψ|^{2^*-2}ψ = 0` with energy-subcritical
//! monomial perturbations `f`.
//!
//! The crate is organized bottom-up:
//!
//! * [`nonlinearity`]: validated perturbations and their potentials,
//! * [`field`]: radial grids, quadrature and finite differences,
//! * [`functionals`]: mass, Hamiltonian, action, Nehari functional, scaling laws,
//!   the bubble `W` and the sharp Sobolev constant,
//! * [`variational`]: the Nehari root `λ(u)`, scaling scans, the shooting
//!   ground-state solver and Nehari upper bounds for the threshold `m_ω`,
//! * [`evolution`]: a conservative Crank–Nicolson integrator with set-membership
//!   classification and invariance audits,
//! * [`exponents`]: exact-rational Strichartz exponent bookkeeping.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolution;
pub mod exponents;
pub mod field;
pub mod functionals;
pub mod nonlinearity;
pub mod variational;

pub use field::{FieldError, GridKind, RadialField, RadialGrid, EVOLUTION_GRID, VARIATIONAL_GRID};
pub use functionals::{FunctionalError, FunctionalReport, ScalingLaw, SigmaEstimate};
pub use nonlinearity::{Monomial, NonlinearityError, NonlinearitySpec, ValidationReport};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
