use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use critnls::evolution::discrete_ground_state;
use critnls::{RadialField, RadialGrid};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::context::Context;
use crate::error::CliError;

/// Field specification accepted by `--init` and `evolution.init`:
///
/// * `gaussian:A:W`: `A e^{-r²/W²}`
/// * `mixture:K`: `K` random radial Gaussian bumps drawn from the run seed
/// * `ground-state`: the shooting solution `Q`
/// * `standing-wave`: `Q` refined to the discrete ground state of the evolution grid
/// * `scaled-q:L`: `T_L Q = L^{d/2} Q(L·)`
/// * `file:PATH`: an `r,re,im` CSV dump (its own radii are kept)
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitialData {
    Gaussian { amplitude: f64, width: f64 },
    Mixture(usize),
    GroundState,
    StandingWave,
    ScaledQ(f64),
    File(PathBuf),
}

impl FromStr for InitialData {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Validation(format!("cannot parse initial data {s:?}"));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let init = match parts.as_slice() {
            ["gaussian", a, w] => InitialData::Gaussian {
                amplitude: num(a)?,
                width: num(w)?,
            },
            ["mixture", k] => InitialData::Mixture(k.parse().map_err(|_| bad())?),
            ["ground-state"] => InitialData::GroundState,
            ["standing-wave"] => InitialData::StandingWave,
            ["scaled-q", l] => InitialData::ScaledQ(num(l)?),
            ["file", rest @ ..] if !rest.join(":").is_empty() => {
                InitialData::File(rest.join(":").into())
            }
            _ => return Err(bad()),
        };
        match init {
            InitialData::Gaussian { width, .. } if !(width > 0.0) => Err(bad()),
            InitialData::ScaledQ(l) if !(l > 0.0) => Err(bad()),
            InitialData::Mixture(0) => Err(bad()),
            other => Ok(other),
        }
    }
}

/// Radial Gaussian bumps `c e^{-((r-r₀)/w)²}` with `c ∈ [0.1, 2)`, `r₀ ∈ [0, 3)`, `w ∈ [0.3, 3)`.
pub fn random_mixture(
    rng: &mut ChaCha8Rng,
    grid: &Arc<RadialGrid>,
    components: usize,
) -> RadialField {
    let comps: Vec<(f64, f64, f64)> = (0..components)
        .map(|_| {
            (
                rng.random_range(0.1..2.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.3..3.0),
            )
        })
        .collect();
    RadialField::sample_real(grid.clone(), |r| {
        comps
            .iter()
            .map(|&(c, r0, w)| c * (-((r - r0) / w).powi(2)).exp())
            .sum()
    })
}

impl InitialData {
    pub fn build(&self, ctx: &Context, grid: &Arc<RadialGrid>) -> Result<RadialField, CliError> {
        Ok(match self {
            InitialData::Gaussian { amplitude, width } => {
                RadialField::sample_real(grid.clone(), |r| {
                    amplitude * (-(r * r) / (width * width)).exp()
                })
            }
            InitialData::Mixture(k) => {
                random_mixture(&mut ChaCha8Rng::seed_from_u64(ctx.cfg.seed), grid, *k)
            }
            InitialData::GroundState => ctx.ground_state()?.profile.sample(grid)?.field,
            InitialData::StandingWave => {
                let q = ctx.ground_state()?.profile.sample(grid)?.field;
                discrete_ground_state(&ctx.spec, ctx.cfg.omega, &q)?
            }
            InitialData::ScaledQ(l) => ctx.ground_state()?.profile.sample_scaled(grid, *l)?,
            InitialData::File(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                RadialField::read_csv(ctx.cfg.dimension, file)?
            }
        })
    }
}
