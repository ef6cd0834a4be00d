use std::cell::OnceCell;

use critnls::variational::{shoot_ground_state, GroundStateResult};
use critnls::NonlinearitySpec;

use crate::config::RunConfig;
use crate::error::CliError;

/// Validated configuration plus the lazily computed ground state.
pub struct Context {
    pub cfg: RunConfig,
    pub spec: NonlinearitySpec,
    ground_state: OnceCell<GroundStateResult>,
}

impl Context {
    /// With `needs_spec` false the terms are ignored and the diagnostic
    /// (unperturbed) equation is used.
    pub fn new(cfg: RunConfig, needs_spec: bool) -> Result<Self, CliError> {
        cfg.validate()?;
        let spec = if needs_spec {
            cfg.spec()?
        } else {
            NonlinearitySpec::diagnostic(cfg.dimension)?
        };
        Ok(Self {
            cfg,
            spec,
            ground_state: OnceCell::new(),
        })
    }

    /// Shooting ground state at `cfg.omega` on the variational grid.
    pub fn ground_state(&self) -> Result<&GroundStateResult, CliError> {
        if let Some(gs) = self.ground_state.get() {
            return Ok(gs);
        }
        let gs = shoot_ground_state(
            &self.spec,
            self.cfg.omega,
            &self.cfg.shoot_config(),
            &self.cfg.variational_grid()?,
        )?;
        Ok(self.ground_state.get_or_init(|| gs))
    }
}
