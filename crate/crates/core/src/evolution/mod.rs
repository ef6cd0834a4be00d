//! Radial time integration of `i∂_tψ + Δψ + f(ψ) + |ψ|^{2^*-2}ψ = 0`.
//!
//! [`evolve`] runs a conservative Crank–Nicolson scheme and samples
//! conservation drifts, functionals, Strichartz-type accumulators and the
//! scheme residual. [`classify`] and [`invariance_audit`] test membership in
//! `A_{ω,+}` and `A₀` along a trace.

mod audit;
mod scheme;

pub use audit::{classify, classify_report, invariance_audit, Classification, InvarianceReport};

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, RadialField, RadialGrid};
use crate::functionals::{report, FunctionalError};
use crate::nonlinearity::NonlinearitySpec;
use scheme::{cn_step, Potential, RadialOperator};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("fixed-point iteration stalled after {iterations} iterations (relative change {change:.3e}); likely blow-up")]
    FixedPointDiverged { iterations: usize, change: f64 },
    #[error("residual needs at least three states, got {0}")]
    InsufficientStates(usize),
    #[error(
        "sample {sample} at t = {t} leaves A_omega,+ (S - m = {action_gap:.3e}, K = {nehari:.3e})"
    )]
    InvarianceViolated {
        sample: usize,
        t: f64,
        action_gap: f64,
        nehari: f64,
    },
    #[error("initial state is not in A_omega,+")]
    NotInAOmegaPlus,
    #[error("invalid evolution parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between samples.
    pub sample_every: usize,
    pub fixed_point_tol: f64,
    pub max_fixed_point_iters: usize,
    /// Keep the `|ψ|^{2^*-2}ψ` term; off only for linear reference runs.
    pub include_critical: bool,
    pub store_states: bool,
    /// A warning is raised once `grad_max · dt` exceeds this bound.
    pub cfl_bound: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 10,
            fixed_point_tol: 1e-12,
            max_fixed_point_iters: 200,
            include_critical: true,
            store_states: false,
            cfl_bound: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Discrete finite-volume mass and Hamiltonian, conserved by the scheme.
    pub mass: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub mass_drift: Vec<f64>,
    pub h_drift: Vec<f64>,
    /// `K(ψ(t))`, `S_ω(ψ(t))`, `H₀(ψ(t))`, `‖∇ψ‖²` and `‖ψ‖²_{H¹}` from the grid functionals.
    pub k_t: Vec<f64>,
    pub action_t: Vec<f64>,
    pub h0_t: Vec<f64>,
    pub kinetic_t: Vec<f64>,
    pub h1_sq: Vec<f64>,
    /// `∫F(ψ(t))` and `‖ψ(t)‖_{2^*}^{2^*}`.
    pub pot_f: Vec<f64>,
    pub crit_norm: Vec<f64>,
    /// `∫_0^t ‖ψ‖_{L^q}^q` for `q = (d+2)(p₁-1)/2` (zero without perturbation) and `q = 2(d+2)/(d-2)`.
    pub w_p1_accum: Vec<f64>,
    pub w_accum: Vec<f64>,
    /// Running maximum of `‖∇ψ‖₂` over all steps.
    pub grad_max: Vec<f64>,
    pub residual: Vec<f64>,
    /// Unwrapped `arg⟨ψ(0), ψ(t)⟩`.
    pub phase: Vec<f64>,
    /// `max_r ||ψ(t)| - |ψ(0)|| / max_r |ψ(0)|`
    pub modulus_drift: Vec<f64>,
    /// Samples before the wavefront estimate reaches `r_max/2`.
    pub trusted: Vec<bool>,
    pub validity_time: f64,
    pub max_fixed_point_iters: usize,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub states: Vec<RadialField>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.mass_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_h_drift(&self) -> f64 {
        self.h_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn conserved(&self, tol: f64) -> bool {
        self.max_mass_drift() < tol && self.max_h_drift() < tol
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), FieldError> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record([
            "t",
            "mass_drift",
            "H_drift",
            "K",
            "potF",
            "crit_norm",
            "w_p1_accum",
            "w_accum",
            "grad_max",
            "residual",
        ])?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.mass_drift[i],
                self.h_drift[i],
                self.k_t[i],
                self.pot_f[i],
                self.crit_norm[i],
                self.w_p1_accum[i],
                self.w_accum[i],
                self.grad_max[i],
                self.residual[i],
            ];
            wtr.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn relative_drift(x: f64, x0: f64) -> f64 {
    (x - x0).abs() / x0.abs().max(1e-12)
}

/// Time at which a front leaving the bulk of `psi0` at group velocity
/// `2 k_max` reaches `r_max/2`, with `k_max = 3 (‖∇ψ‖²/‖ψ‖²)^{1/2}` and the
/// bulk radius enclosing all but `1e-8` of the mass.
pub fn validity_time(psi0: &RadialField) -> f64 {
    let grid = psi0.grid();
    let mass = psi0.lp_norm_pow(2.0).unwrap_or(0.0);
    if mass == 0.0 {
        return f64::INFINITY;
    }
    let k_max = 3.0 * (psi0.grad_norm_sq() / mass).sqrt();
    let dens: Vec<f64> = psi0.values().iter().map(|z| z.norm_sqr()).collect();
    let mut bulk = grid.r_max();
    for k in 1..grid.len() {
        if grid.partial_integral(&dens, k) >= (1.0 - 1e-8) * mass {
            bulk = grid.radii()[k];
            break;
        }
    }
    if k_max == 0.0 {
        return f64::INFINITY;
    }
    ((0.5 * grid.r_max() - bulk) / (2.0 * k_max)).max(0.0)
}

struct Stepper {
    op: RadialOperator,
    pot: Potential,
    tol: f64,
    max_iter: usize,
}

impl Stepper {
    fn step(
        &self,
        u0: &[Complex64],
        guess: Option<&[Complex64]>,
        dt: f64,
    ) -> Result<(Vec<Complex64>, usize), EvolutionError> {
        let (mut u1, iters) = cn_step(&self.op, &self.pot, u0, guess, dt, self.tol, self.max_iter)?;
        u1.push(Complex64::new(0.0, 0.0));
        Ok((u1, iters))
    }
}

/// Integrates from `psi0` to `t_end`. The wall value of `psi0` is set to zero.
pub fn evolve(
    spec: &NonlinearitySpec,
    omega: f64,
    psi0: &RadialField,
    cfg: &EvolveConfig,
) -> Result<EvolutionTrace, EvolutionError> {
    if !(cfg.dt > 0.0 && cfg.t_end >= 0.0 && cfg.sample_every > 0 && cfg.max_fixed_point_iters > 0)
    {
        return Err(EvolutionError::InvalidParameters(format!(
            "dt = {}, t_end = {}, sample_every = {}",
            cfg.dt, cfg.t_end, cfg.sample_every
        )));
    }
    let grid = psi0.grid().clone();
    let stepper = Stepper {
        op: RadialOperator::new(&grid),
        pot: Potential::new(spec, cfg.include_critical),
        tol: cfg.fixed_point_tol,
        max_iter: cfg.max_fixed_point_iters,
    };
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let d = spec.dim() as f64;
    let q_w = 2.0 * (d + 2.0) / (d - 2.0);
    let q_w1 = spec.p_min().map(|p| (d + 2.0) * (p - 1.0) / 2.0);

    let mut cur: Vec<Complex64> = psi0.values().to_vec();
    *cur.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    let start = RadialField::new(grid.clone(), cur.clone())?;
    let m0 = stepper.op.mass(&cur);
    let h0 = stepper.op.hamiltonian(&stepper.pot, &cur);
    let max0 = start.max_abs();
    let (mut prev, _) = stepper.step(&cur, None, -cfg.dt)?;

    let norms = |u: &RadialField| -> (f64, f64) {
        let w1 = q_w1.map(|q| u.lp_norm_pow_unchecked(q)).unwrap_or(0.0);
        (w1, u.lp_norm_pow_unchecked(q_w))
    };

    let mut trace = EvolutionTrace {
        validity_time: validity_time(&start),
        ..Default::default()
    };
    let (mut acc_w1, mut acc_w) = (0.0, 0.0);
    let mut cur_norms = norms(&start);
    let mut grad_max = 0.0f64;
    let mut phase = 0.0f64;
    let mut last_arg = 0.0f64;
    let mut cfl_warned = false;

    for n in 0..=n_steps {
        let t = n as f64 * cfg.dt;
        let guess: Vec<Complex64> = cur.iter().zip(&prev).map(|(c, p)| 2.0 * c - p).collect();
        let (next, iters) = stepper.step(&cur, Some(&guess), cfg.dt)?;
        trace.max_fixed_point_iters = trace.max_fixed_point_iters.max(iters);
        grad_max = grad_max.max(stepper.op.kinetic(&cur).sqrt());
        if !cfl_warned && grad_max * cfg.dt > cfg.cfl_bound {
            trace.warnings.push(format!(
                "grad_max * dt = {:.3e} exceeds {} at t = {t}",
                grad_max * cfg.dt,
                cfg.cfl_bound
            ));
            cfl_warned = true;
        }

        if n % cfg.sample_every == 0 || n == n_steps {
            let field = RadialField::new(grid.clone(), cur.clone())?;
            let rep = report(spec, omega, &field)?;
            let mass = stepper.op.mass(&cur);
            let ham = stepper.op.hamiltonian(&stepper.pot, &cur);
            let overlap: Complex64 = stepper
                .op
                .vol
                .iter()
                .zip(start.values())
                .zip(&cur)
                .map(|((v, a), b)| a.conj() * b * *v)
                .sum();
            if overlap.norm() > 0.0 {
                let arg = overlap.arg();
                let mut jump = arg - last_arg;
                while jump > std::f64::consts::PI {
                    jump -= 2.0 * std::f64::consts::PI;
                }
                while jump < -std::f64::consts::PI {
                    jump += 2.0 * std::f64::consts::PI;
                }
                phase += jump;
                last_arg = arg;
            }
            let modulus = if max0 > 0.0 {
                cur.iter()
                    .zip(start.values())
                    .map(|(a, b)| (a.norm() - b.norm()).abs())
                    .fold(0.0, f64::max)
                    / max0
            } else {
                0.0
            };
            let res = residual_window(&stepper, &grid, [&prev, &cur, &next], cfg.dt)?;

            trace.times.push(t);
            trace.mass.push(mass);
            trace.hamiltonian.push(ham);
            trace.mass_drift.push(relative_drift(mass, m0));
            trace.h_drift.push(relative_drift(ham, h0));
            trace.k_t.push(rep.nehari);
            trace.action_t.push(rep.action);
            trace.h0_t.push(rep.hamiltonian0);
            trace.kinetic_t.push(rep.kinetic);
            trace.h1_sq.push(rep.h1_norm_sq());
            trace.pot_f.push(rep.pot_f);
            trace.crit_norm.push(rep.pot_crit);
            trace.w_p1_accum.push(acc_w1);
            trace.w_accum.push(acc_w);
            trace.grad_max.push(grad_max);
            trace.residual.push(res);
            trace.phase.push(phase);
            trace.modulus_drift.push(modulus);
            trace.trusted.push(t <= trace.validity_time);
            if cfg.store_states {
                trace.states.push(field);
            }
        }

        if n < n_steps {
            let next_field = RadialField::new(grid.clone(), next.clone())?;
            let next_norms = norms(&next_field);
            acc_w1 += 0.5 * cfg.dt * (cur_norms.0 + next_norms.0);
            acc_w += 0.5 * cfg.dt * (cur_norms.1 + next_norms.1);
            cur_norms = next_norms;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(trace)
}

/// Ground state of the finite-volume equation `-Δ_h u + ωu - f(u) - |u|^{2^*-2}u = 0`
/// obtained by Newton iteration from a nearby real profile, typically the shooting
/// solution sampled on the evolution grid. Its standing wave `e^{iωt}u` has an
/// exactly stationary modulus under [`evolve`].
pub fn discrete_ground_state(
    spec: &NonlinearitySpec,
    omega: f64,
    initial: &RadialField,
) -> Result<RadialField, EvolutionError> {
    let grid = initial.grid().clone();
    let op = RadialOperator::new(&grid);
    let pot = Potential::new(spec, true);
    let u0: Vec<f64> = initial.values().iter().map(|z| z.re).collect();
    let (u, _) = scheme::newton_ground_state(&op, &pot, omega, &u0, 1e-13, 50)?;
    let values = u
        .into_iter()
        .chain(std::iter::once(0.0))
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    Ok(RadialField::new(grid, values)?)
}

fn residual_window(
    stepper: &Stepper,
    grid: &Arc<RadialGrid>,
    [prev, cur, next]: [&[Complex64]; 3],
    dt: f64,
) -> Result<f64, EvolutionError> {
    let op = &stepper.op;
    if grid.len() != op.unknowns() + 1 {
        return Err(EvolutionError::Field(FieldError::GridMismatch));
    }
    let lap = op.apply(cur);
    let mut sum = 0.0;
    for i in 0..op.unknowns() {
        let z = cur[i];
        let e = Complex64::new(0.0, 1.0) * (next[i] - prev[i]) / (2.0 * dt)
            + lap[i] / op.vol[i]
            + z * (2.0 * stepper.pot.derivative(z.norm_sqr()));
        sum += op.vol[i] * e.norm_sqr();
    }
    Ok(sum.sqrt())
}

/// Discrete `‖i∂_tu + Δu + f(u) + |u|^{2^*-2}u‖₂` at each interior sample of
/// equally spaced `states`, using central differences in time and the
/// finite-volume Laplacian. The critical term is dropped when `include_critical` is false.
pub fn residual(
    spec: &NonlinearitySpec,
    states: &[RadialField],
    dt: f64,
    include_critical: bool,
) -> Result<Vec<f64>, EvolutionError> {
    if states.len() < 3 {
        return Err(EvolutionError::InsufficientStates(states.len()));
    }
    let grid = states[0].grid().clone();
    if states.iter().any(|s| s.grid() != &grid) {
        return Err(EvolutionError::Field(FieldError::GridMismatch));
    }
    let stepper = Stepper {
        op: RadialOperator::new(&grid),
        pot: Potential::new(spec, include_critical),
        tol: 0.0,
        max_iter: 1,
    };
    states
        .windows(3)
        .map(|w| {
            residual_window(
                &stepper,
                &grid,
                [w[0].values(), w[1].values(), w[2].values()],
                dt,
            )
        })
        .collect()
}
