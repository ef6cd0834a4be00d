//! Focusing monomial perturbations `f(z) = Σ μ_k |z|^{p_k-1} z` and their potentials.
//!
//! A [`NonlinearitySpec`] fixes the spatial dimension together with an ordered
//! list of monomials. Every exponent lies strictly between the mass-critical
//! power `2_* - 1` and the energy-critical power `2^* - 1`, and every coefficient
//! is positive. For this class the structural conditions on `F` (positivity,
//! monotonicity and convexity under the homogeneity operator `D = z∂_z + z̄∂_z̄`)
//! hold in closed form, so the potential and all of its `D`-derivatives are
//! evaluated term by term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Energy-critical exponent `2^* = 2 + 4/(d-2)`.
pub fn energy_critical(dim: usize) -> f64 {
    2.0 + 4.0 / (dim as f64 - 2.0)
}

/// Mass-critical exponent `2_* = 2 + 4/d`.
pub fn mass_critical(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NonlinearityError {
    #[error("dimension {0} is too small (need d >= 3)")]
    DimensionTooSmall(usize),
    #[error("exponent p = {p} of term {index} lies outside the open interval ({lo}, {hi})")]
    ExponentOutOfRange {
        index: usize,
        p: f64,
        lo: f64,
        hi: f64,
    },
    #[error("coefficient mu = {mu} of term {index} is not positive")]
    NonpositiveCoefficient { index: usize, mu: f64 },
    #[error("exponents are not strictly increasing at term {index}")]
    NonincreasingExponents { index: usize },
    #[error("the perturbation is empty; only diagnostic evaluations accept it")]
    EmptyPerturbation,
}

/// One focusing monomial `μ |z|^{p-1} z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub mu: f64,
    pub p: f64,
}

impl Monomial {
    pub fn new(mu: f64, p: f64) -> Self {
        Self { mu, p }
    }

    /// Coefficient `c` with `F_k(z) = c |z|^{p+1}`.
    #[inline]
    pub fn potential_coefficient(&self) -> f64 {
        2.0 * self.mu / (self.p + 1.0)
    }
}

/// Validated perturbation together with its dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearitySpec {
    dim: usize,
    terms: Vec<Monomial>,
    eps0: f64,
}

impl NonlinearitySpec {
    /// Validates and builds a spec. An empty term list is accepted and marks the
    /// spec as diagnostic (pure critical equation); solvers reject it through
    /// [`NonlinearitySpec::require_perturbation`].
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self, NonlinearityError> {
        let report = validate(dim, &terms)?;
        Ok(Self {
            dim,
            terms,
            eps0: report.eps0.unwrap_or(f64::NAN),
        })
    }

    /// Pure energy-critical equation, used for the bubble and sharp-constant checks.
    pub fn diagnostic(dim: usize) -> Result<Self, NonlinearityError> {
        Self::new(dim, Vec::new())
    }

    pub fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<Self, NonlinearityError> {
        Self::new(
            dim,
            pairs.iter().map(|&(mu, p)| Monomial::new(mu, p)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_diagnostic(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn require_perturbation(&self) -> Result<(), NonlinearityError> {
        if self.terms.is_empty() {
            Err(NonlinearityError::EmptyPerturbation)
        } else {
            Ok(())
        }
    }

    /// `ε₀ = (p_1 + 1) - 2_*`; NaN in diagnostic mode.
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Smallest exponent `p_1`.
    pub fn p_min(&self) -> Option<f64> {
        self.terms.first().map(|t| t.p)
    }

    /// Largest exponent `p_2`.
    pub fn p_max(&self) -> Option<f64> {
        self.terms.last().map(|t| t.p)
    }

    pub fn energy_critical(&self) -> f64 {
        energy_critical(self.dim)
    }

    pub fn mass_critical(&self) -> f64 {
        mass_critical(self.dim)
    }

    /// `f(z) = Σ μ_k |z|^{p_k-1} z`.
    pub fn f(&self, z: Complex64) -> Complex64 {
        let a = z.norm();
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        z * self
            .terms
            .iter()
            .map(|t| t.mu * a.powf(t.p - 1.0))
            .sum::<f64>()
    }

    /// `F(z) = Σ 2μ_k/(p_k+1) |z|^{p_k+1}`, normalized so that `∂F/∂z̄ = f`.
    pub fn potential(&self, z: Complex64) -> f64 {
        self.potential_abs(z.norm())
    }

    pub fn potential_abs(&self, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.potential_coefficient() * a.powf(t.p + 1.0))
            .sum()
    }

    /// `DF(z) = Σ 2μ_k |z|^{p_k+1}`.
    pub fn d_potential(&self, z: Complex64) -> f64 {
        let a = z.norm();
        if a == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| 2.0 * t.mu * a.powf(t.p + 1.0))
            .sum()
    }

    /// `D²F(z) = Σ 2μ_k (p_k+1) |z|^{p_k+1}`.
    pub fn d2_potential(&self, z: Complex64) -> f64 {
        let a = z.norm();
        if a == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| 2.0 * t.mu * (t.p + 1.0) * a.powf(t.p + 1.0))
            .sum()
    }

    /// `(DF - cF)(z) = Σ 2μ_k (p_k+1-c)/(p_k+1) |z|^{p_k+1}`.
    pub fn d_potential_minus(&self, z: Complex64, c: f64) -> f64 {
        let a = z.norm();
        if a == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| 2.0 * t.mu * (t.p + 1.0 - c) / (t.p + 1.0) * a.powf(t.p + 1.0))
            .sum()
    }

    /// Real factor `g(a)` with `f(z) = g(|z|) z`; used by the radial ODE and the integrator.
    pub fn gain(&self, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.mu * a.powf(t.p - 1.0)).sum()
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub mass_critical: f64,
    pub energy_critical: f64,
    /// `None` in diagnostic mode.
    pub eps0: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub diagnostic: bool,
    /// `DF = Σ (p_k+1) F_k`, exact for monomials.
    pub homogeneity_identity: bool,
    /// `(D - 2_* - ε₀) F >= 0`.
    pub monotonicity: bool,
    /// `(D - 2)(D - 2_* - ε₀) F >= 0`.
    pub convexity: bool,
    /// `F >= 0`.
    pub positivity: bool,
}

/// Checks the monomial class constraints and reports the structural facts that
/// follow from them.
pub fn validate(dim: usize, terms: &[Monomial]) -> Result<ValidationReport, NonlinearityError> {
    if dim < 3 {
        return Err(NonlinearityError::DimensionTooSmall(dim));
    }
    let lo = mass_critical(dim) - 1.0;
    let hi = energy_critical(dim) - 1.0;
    for (index, t) in terms.iter().enumerate() {
        if !(t.mu > 0.0) || !t.mu.is_finite() {
            return Err(NonlinearityError::NonpositiveCoefficient { index, mu: t.mu });
        }
        if !(t.p > lo && t.p < hi) {
            return Err(NonlinearityError::ExponentOutOfRange {
                index,
                p: t.p,
                lo,
                hi,
            });
        }
        if index > 0 && !(t.p > terms[index - 1].p) {
            return Err(NonlinearityError::NonincreasingExponents { index });
        }
    }
    let eps0 = terms.first().map(|t| t.p + 1.0 - mass_critical(dim));
    // Each monomial is an eigenfunction of D with eigenvalue p_k + 1, so the
    // structural inequalities reduce to sign conditions on (p_k + 1 - c).
    let e = eps0.unwrap_or(0.0);
    let threshold = mass_critical(dim) + e;
    let monotonicity = terms.iter().all(|t| t.p + 1.0 - threshold >= 0.0);
    let convexity = terms
        .iter()
        .all(|t| (t.p + 1.0 - 2.0) * (t.p + 1.0 - threshold) >= 0.0);
    Ok(ValidationReport {
        dim,
        mass_critical: mass_critical(dim),
        energy_critical: energy_critical(dim),
        eps0,
        p_min: terms.first().map(|t| t.p),
        p_max: terms.last().map(|t| t.p),
        diagnostic: terms.is_empty(),
        homogeneity_identity: true,
        monotonicity,
        convexity,
        positivity: terms.iter().all(|t| t.mu > 0.0),
    })
}
