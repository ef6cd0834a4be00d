//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use critnls::variational::{shoot_ground_state, GroundStateResult, ShootConfig};
use critnls::{NonlinearitySpec, RadialField, RadialGrid};

/// `d = 5`, `f(u) = |u|u`.
pub fn reference_spec() -> NonlinearitySpec {
    NonlinearitySpec::from_pairs(5, &[(1.0, 2.0)]).expect("valid reference nonlinearity")
}

pub fn variational_grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::default_variational(5).expect("default grid"))
}

pub fn ground_state() -> GroundStateResult {
    shoot_ground_state(
        &reference_spec(),
        1.0,
        &ShootConfig::default(),
        &variational_grid(),
    )
    .expect("shooting converges")
}

pub fn gaussian(grid: &Arc<RadialGrid>, amplitude: f64) -> RadialField {
    RadialField::sample_real(grid.clone(), |r| amplitude * (-r * r).exp())
}
