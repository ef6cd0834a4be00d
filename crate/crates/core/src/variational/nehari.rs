//! Upper bounds for `m_ω` from Nehari projections `T_{λ(u)}u` of trial fields.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::scan::lambda_star_of;
use super::VariationalError;
use crate::field::{RadialField, RadialGrid};
use crate::functionals::{report, FunctionalReport, ScalingLaw};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NehariPoint {
    pub label: String,
    pub lambda_star: f64,
    /// `S_ω(T_{λ(u)}u)`, an upper bound for `m_ω`.
    pub bound: f64,
    /// `|K(T_{λ(u)}u)|` relative to the kinetic term at the root.
    pub k_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NehariBounds {
    pub points: Vec<NehariPoint>,
    pub min_bound: f64,
    /// Reference threshold the bounds were compared against, if any.
    pub m_omega: Option<f64>,
    pub tolerance: f64,
    /// Every bound lies above `m_ω - tolerance`; `None` without a reference.
    pub all_above: Option<bool>,
}

pub fn upper_bound_from_report(
    label: &str,
    base: &FunctionalReport,
) -> Result<NehariPoint, VariationalError> {
    let lambda_star = lambda_star_of(base)?;
    let law = ScalingLaw::from_report(base);
    Ok(NehariPoint {
        label: label.to_string(),
        lambda_star,
        bound: law.action(lambda_star),
        k_residual: law.nehari(lambda_star).abs() / (law.kinetic * lambda_star * lambda_star),
    })
}

/// Projects every candidate onto the Nehari manifold in parallel and compares
/// the resulting actions with `m_omega` when given.
pub fn m_omega_upper_bounds(
    spec: &NonlinearitySpec,
    omega: f64,
    candidates: &[(String, RadialField)],
    m_omega: Option<f64>,
    tolerance: f64,
) -> Result<NehariBounds, VariationalError> {
    let points = candidates
        .par_iter()
        .map(|(label, u)| upper_bound_from_report(label, &report(spec, omega, u)?))
        .collect::<Result<Vec<_>, _>>()?;
    let min_bound = points.iter().map(|p| p.bound).fold(f64::INFINITY, f64::min);
    let all_above = m_omega.map(|m| points.iter().all(|p| p.bound >= m - tolerance));
    Ok(NehariBounds {
        points,
        min_bound,
        m_omega,
        tolerance,
        all_above,
    })
}

/// Gaussians `e^{-r²/w²}` for each width `w`.
pub fn gaussian_family(grid: &Arc<RadialGrid>, widths: &[f64]) -> Vec<(String, RadialField)> {
    widths
        .iter()
        .map(|&w| {
            (
                format!("gaussian w={w}"),
                RadialField::sample_real(grid.clone(), |r| (-(r * r) / (w * w)).exp()),
            )
        })
        .collect()
}
