//! TOML run configuration. Every key is optional; command-line flags override it.
//!
//! ```toml
//! dimension = 5
//! omega = 1.0
//! terms = [[1.0, 2.0]]
//! seed = 7
//!
//! [grid]
//! kind = "graded"        # or "uniform"
//! n = 4096
//! r_max = 200.0
//! core_radius = 20.0
//! core_fraction = 0.8
//!
//! [solver]
//! abs_tol = 1e-12
//! bisection_iters = 60
//! k_tolerance = 1e-4
//!
//! [evolution]
//! n = 8192
//! r_max = 100.0
//! dt = 1e-3
//! t_end = 1.0
//! sample_every = 10
//! init = "scaled-q:0.8"
//!
//! [output]
//! dir = "runs"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use critnls::field::{EVOLUTION_GRID, VARIATIONAL_GRID};
use critnls::variational::ShootConfig;
use critnls::{Monomial, NonlinearitySpec, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub omega: f64,
    /// `[mu, p]` pairs.
    pub terms: Vec<[f64; 2]>,
    pub seed: u64,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub evolution: EvolutionConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 5,
            omega: 1.0,
            terms: vec![[1.0, 2.0]],
            seed: 0,
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            evolution: EvolutionConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Graded,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub kind: GridChoice,
    pub n: usize,
    pub r_max: f64,
    pub core_radius: f64,
    pub core_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let (n, r_max, core_radius, core_fraction) = VARIATIONAL_GRID;
        Self {
            kind: GridChoice::Graded,
            n,
            r_max,
            core_radius,
            core_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub max_step: f64,
    pub bisection_iters: usize,
    pub k_tolerance: f64,
    pub tail_threshold: f64,
    /// Shooting radius; defaults to `max(50/√ω, 30)`.
    pub shoot_radius: Option<f64>,
    /// Allowed shortfall of Nehari upper bounds below `m_ω`.
    pub bound_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = ShootConfig::default();
        Self {
            abs_tol: s.abs_tol,
            max_step: s.max_step,
            bisection_iters: s.bisection_iters,
            k_tolerance: s.k_tolerance,
            tail_threshold: s.tail_threshold,
            shoot_radius: None,
            bound_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub n: usize,
    pub r_max: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub fixed_point_tol: f64,
    pub max_fixed_point_iters: usize,
    /// Initial data, see [`crate::init::InitialData`].
    pub init: String,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        let (n, r_max) = EVOLUTION_GRID;
        Self {
            n,
            r_max,
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 10,
            fixed_point_tol: 1e-12,
            max_fixed_point_iters: 200,
            init: "gaussian:1:1".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative `--out` paths are resolved against this directory.
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    /// Tolerance and size checks; the nonlinearity is validated by [`RunConfig::spec`].
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("omega", self.omega),
            ("solver.abs_tol", self.solver.abs_tol),
            ("solver.max_step", self.solver.max_step),
            ("solver.k_tolerance", self.solver.k_tolerance),
            ("solver.tail_threshold", self.solver.tail_threshold),
            ("solver.bound_tolerance", self.solver.bound_tolerance),
            ("evolution.dt", self.evolution.dt),
            ("evolution.fixed_point_tol", self.evolution.fixed_point_tol),
            ("grid.r_max", self.grid.r_max),
            ("evolution.r_max", self.evolution.r_max),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!(
                    "{key} must be positive, got {v}"
                )));
            }
        }
        if self.evolution.t_end < 0.0 || !self.evolution.t_end.is_finite() {
            return Err(CliError::Validation(format!(
                "evolution.t_end must be >= 0, got {}",
                self.evolution.t_end
            )));
        }
        if self.evolution.sample_every == 0
            || self.evolution.max_fixed_point_iters == 0
            || self.solver.bisection_iters == 0
        {
            return Err(CliError::Validation(
                "sample_every, max_fixed_point_iters and bisection_iters must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<NonlinearitySpec, CliError> {
        let terms = self
            .terms
            .iter()
            .map(|&[mu, p]| Monomial::new(mu, p))
            .collect();
        Ok(NonlinearitySpec::new(self.dimension, terms)?)
    }

    pub fn variational_grid(&self) -> Result<Arc<RadialGrid>, CliError> {
        let g = &self.grid;
        let grid = match g.kind {
            GridChoice::Graded => {
                RadialGrid::graded(self.dimension, g.n, g.r_max, g.core_radius, g.core_fraction)?
            }
            GridChoice::Uniform => RadialGrid::uniform(self.dimension, g.n, g.r_max)?,
        };
        Ok(Arc::new(grid))
    }

    pub fn evolution_grid(&self) -> Result<Arc<RadialGrid>, CliError> {
        Ok(Arc::new(RadialGrid::uniform(
            self.dimension,
            self.evolution.n,
            self.evolution.r_max,
        )?))
    }

    pub fn shoot_config(&self) -> ShootConfig {
        ShootConfig {
            r_max: self.solver.shoot_radius,
            abs_tol: self.solver.abs_tol,
            max_step: self.solver.max_step,
            bisection_iters: self.solver.bisection_iters,
            k_tolerance: self.solver.k_tolerance,
            tail_threshold: self.solver.tail_threshold,
            ..ShootConfig::default()
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.output.dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

/// `"1:2,0.5:2.2"` → `[[1, 2], [0.5, 2.2]]`; the empty string gives the diagnostic spec.
pub fn parse_terms(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (mu, p) = t
                .split_once(':')
                .ok_or_else(|| format!("term {t:?} is not mu:p"))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
            Ok([num(mu)?, num(p)?])
        })
        .collect()
}
