//! Set membership of states and flow-invariance checks along a trace.

use serde::Serialize;

use super::{EvolutionError, EvolutionTrace};
use crate::field::RadialField;
use crate::functionals::{report, FunctionalReport};
use crate::nonlinearity::NonlinearitySpec;
use crate::variational::coercivity_constant;

/// Membership in `A_{ω,+} = {S_ω < m_ω, K > 0}` and `A₀ = {H₀ < σ^{d/2}/d, ‖∇u‖² < σ^{d/2}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub in_a_omega_plus: bool,
    pub in_a0: bool,
    /// `m_ω - S_ω(u)`
    pub action_margin: f64,
    /// `K(u)`
    pub nehari_margin: f64,
    /// `σ^{d/2}/d - H₀(u)`
    pub h0_margin: f64,
    /// `σ^{d/2} - ‖∇u‖²`
    pub kinetic_margin: f64,
}

pub fn classify_report(rep: &FunctionalReport, m_omega: f64, sigma_pow: f64) -> Classification {
    let action_margin = m_omega - rep.action;
    let nehari_margin = rep.nehari;
    let h0_margin = sigma_pow / rep.dim as f64 - rep.hamiltonian0;
    let kinetic_margin = sigma_pow - rep.kinetic;
    Classification {
        in_a_omega_plus: action_margin > 0.0 && nehari_margin > 0.0,
        in_a0: h0_margin > 0.0 && kinetic_margin > 0.0,
        action_margin,
        nehari_margin,
        h0_margin,
        kinetic_margin,
    }
}

pub fn classify(
    spec: &NonlinearitySpec,
    omega: f64,
    u: &RadialField,
    m_omega: f64,
    sigma_pow: f64,
) -> Result<Classification, EvolutionError> {
    Ok(classify_report(
        &report(spec, omega, u)?,
        m_omega,
        sigma_pow,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub inf_k: f64,
    /// `min_t (m_ω - S_ω(ψ(t)))`
    pub inf_action_margin: f64,
    pub sup_h1_sq: f64,
    /// `C (m_ω + m_ω/ω)` with `C = 2/(1 - C₀')`.
    pub h1_bound: f64,
    pub h1_constant: f64,
    pub bounded: bool,
}

/// Checks that every sample stays in `A_{ω,+}` and evaluates the `H¹` bound
/// `‖u‖²_{H¹} <= 2m_ω/ω + 2m_ω/(1 - C₀') <= C(m_ω + m_ω/ω)` valid on `A_{ω,+}`.
pub fn invariance_audit(
    spec: &NonlinearitySpec,
    omega: f64,
    trace: &EvolutionTrace,
    m_omega: f64,
) -> Result<InvarianceReport, EvolutionError> {
    let first_in = trace
        .action_t
        .first()
        .zip(trace.k_t.first())
        .is_some_and(|(s, k)| *s < m_omega && *k > 0.0);
    if !first_in {
        return Err(EvolutionError::NotInAOmegaPlus);
    }
    for (i, (&s, &k)) in trace.action_t.iter().zip(&trace.k_t).enumerate() {
        if !(s < m_omega && k > 0.0) {
            return Err(EvolutionError::InvarianceViolated {
                sample: i,
                t: trace.times[i],
                action_gap: s - m_omega,
                nehari: k,
            });
        }
    }
    let inf_k = trace.k_t.iter().copied().fold(f64::INFINITY, f64::min);
    let inf_action_margin = trace
        .action_t
        .iter()
        .map(|s| m_omega - s)
        .fold(f64::INFINITY, f64::min);
    let sup_h1_sq = trace.h1_sq.iter().copied().fold(0.0, f64::max);
    let h1_constant = 2.0 / (1.0 - coercivity_constant(spec));
    let h1_bound = h1_constant * (m_omega + m_omega / omega);
    Ok(InvarianceReport {
        samples: trace.len(),
        inf_k,
        inf_action_margin,
        sup_h1_sq,
        h1_bound,
        h1_constant,
        bounded: sup_h1_sq <= h1_bound,
    })
}
