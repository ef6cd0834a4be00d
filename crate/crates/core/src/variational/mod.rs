//! Variational side: the Nehari root `λ(u)`, scaling scans of `S_ω`, `K` and
//! `I_ω` along `T_λu`, the ground state by radial shooting, and Nehari-projected
//! upper bounds for the threshold `m_ω`.

mod nehari;
mod scan;
mod shooting;

pub use nehari::{
    gaussian_family, m_omega_upper_bounds, upper_bound_from_report, NehariBounds, NehariPoint,
};
pub use scan::{
    coercivity_constant, lambda_star, lambda_star_of, scan, scan_report, LambdaScan,
    ScanCertificates,
};
pub use shooting::{
    shoot_ground_state, GroundStateProfile, GroundStateResult, SampledProfile, ShootConfig,
    Trajectory,
};

use thiserror::Error;

use crate::field::FieldError;
use crate::functionals::FunctionalError;
use crate::nonlinearity::NonlinearityError;

#[derive(Debug, Error)]
pub enum VariationalError {
    #[error("the field is identically zero")]
    ZeroField,
    #[error("K(T_λu) never changes sign for λ in [1e-9, 1e9]")]
    BracketFailure,
    #[error("amplitude sweep found no undershoot/overshoot pair in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("radial ODE integration failed: {0}")]
    NonconvergedOde(String),
    #[error("ground states need d >= 4, got d = {0}")]
    DimensionTooSmall(usize),
    #[error("frequency omega = {0} must be positive")]
    NonpositiveOmega(f64),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
