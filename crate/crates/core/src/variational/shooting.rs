//! Ground state of `-Δu + ωu - f(u) - |u|^{2^*-2}u = 0` by amplitude shooting.
//!
//! The radial profile solves `u'' + (d-1)/r u' = ωu - f(u) - u^{2^*-1}` with
//! `u(0) = a₀`, `u'(0) = 0`. A trajectory overshoots when it crosses zero and
//! undershoots when it turns back up while still positive; the ground-state
//! amplitude sits on the first undershoot/overshoot transition of an upward
//! amplitude sweep and is located by bisection.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::VariationalError;
use crate::field::{RadialField, RadialGrid};
use crate::functionals::{report, sigma_estimate, FunctionalReport, SigmaEstimate};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootConfig {
    /// Integration radius; `None` selects `max(50/√ω, 30)`.
    pub r_max: Option<f64>,
    /// Local error bound on `|δu| + |δu'|` per step.
    pub abs_tol: f64,
    pub max_step: f64,
    pub bisection_iters: usize,
    pub sweep_points: usize,
    /// The sweep covers `[a_c, a_c · sweep_factor]`, `a_c` being the amplitude at
    /// which the right-hand side vanishes.
    pub sweep_factor: f64,
    /// The computed profile is continued by the linear tail once `u < tail_threshold · a₀`.
    pub tail_threshold: f64,
    /// Required `|K(Q)| / ‖∇Q‖²`.
    pub k_tolerance: f64,
    pub max_steps: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            abs_tol: 1e-12,
            max_step: 0.05,
            bisection_iters: 60,
            sweep_points: 200,
            sweep_factor: 1e3,
            tail_threshold: 1e-6,
            k_tolerance: 1e-4,
            max_steps: 50_000_000,
        }
    }
}

impl ShootConfig {
    pub fn radius(&self, omega: f64) -> f64 {
        self.r_max
            .unwrap_or_else(|| (50.0 / omega.sqrt()).max(30.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trajectory {
    Overshoot,
    Undershoot,
}

/// Radial ODE for one `(spec, ω)` pair.
#[derive(Debug, Clone)]
struct RadialOde {
    spec: NonlinearitySpec,
    omega: f64,
    crit_power: f64,
    dim: f64,
}

type State = [f64; 2];

impl RadialOde {
    fn new(spec: &NonlinearitySpec, omega: f64) -> Self {
        Self {
            spec: spec.clone(),
            omega,
            crit_power: spec.energy_critical() - 2.0,
            dim: spec.dim() as f64,
        }
    }

    /// `ωu - f(u) - |u|^{2^*-2}u`
    fn source(&self, u: f64) -> f64 {
        let a = u.abs();
        let nl = if a == 0.0 {
            0.0
        } else {
            self.spec.gain(a) + a.powf(self.crit_power)
        };
        (self.omega - nl) * u
    }

    fn rhs(&self, r: f64, y: State) -> State {
        let src = self.source(y[0]);
        // u''(0) = source(a₀)/d by symmetry at the origin
        let acc = if r == 0.0 {
            src / self.dim
        } else {
            src - (self.dim - 1.0) / r * y[1]
        };
        [y[1], acc]
    }

    fn rk4(&self, r: f64, y: State, h: f64) -> State {
        let k1 = self.rhs(r, y);
        let k2 = self.rhs(
            r + 0.5 * h,
            [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
        );
        let k3 = self.rhs(
            r + 0.5 * h,
            [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
        );
        let k4 = self.rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Amplitude `a_c > 0` with `source(a_c) = 0`.
    fn critical_amplitude(&self) -> f64 {
        let nl = |a: f64| self.spec.gain(a) + a.powf(self.crit_power);
        let mut hi = 1.0;
        while nl(hi) < self.omega {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if nl(mid) < self.omega {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Adaptive RK4 with step doubling and local extrapolation.
struct Integrator<'a> {
    ode: &'a RadialOde,
    cfg: &'a ShootConfig,
    r_end: f64,
}

enum Stop {
    Classified(Trajectory),
    ReachedEnd,
}

impl Integrator<'_> {
    /// Integrates from the origin, invoking `on_node(i, state)` when the solution
    /// passes `nodes[i]` exactly. Stops at the first classification event.
    fn run(
        &self,
        a0: f64,
        nodes: &[f64],
        mut on_node: impl FnMut(usize, State),
    ) -> Result<Stop, VariationalError> {
        let mut r = 0.0;
        let mut y: State = [a0, 0.0];
        let mut h = 1e-3f64.min(self.cfg.max_step);
        let mut next = 0;
        while next < nodes.len() && nodes[next] <= 0.0 {
            on_node(next, y);
            next += 1;
        }
        let mut steps = 0usize;
        while r < self.r_end {
            steps += 1;
            if steps > self.cfg.max_steps {
                return Err(VariationalError::NonconvergedOde(format!(
                    "step budget exhausted at r = {r}"
                )));
            }
            let mut target = self.r_end;
            if next < nodes.len() {
                target = target.min(nodes[next]);
            }
            let step = h.min(target - r);
            let full = self.ode.rk4(r, y, step);
            let mid = self.ode.rk4(r, y, 0.5 * step);
            let half = self.ode.rk4(r + 0.5 * step, mid, 0.5 * step);
            let err = (half[0] - full[0]).abs() + (half[1] - full[1]).abs();
            if !err.is_finite() {
                return Err(VariationalError::NonconvergedOde(format!(
                    "non-finite state at r = {r}"
                )));
            }
            if err > self.cfg.abs_tol && step > 1e-14 {
                h = step * (0.9 * (self.cfg.abs_tol / err).powf(0.2)).max(0.1);
                continue;
            }
            y = [
                half[0] + (half[0] - full[0]) / 15.0,
                half[1] + (half[1] - full[1]) / 15.0,
            ];
            r = if step == target - r { target } else { r + step };
            let grow = if err == 0.0 {
                4.0
            } else {
                (0.9 * (self.cfg.abs_tol / err).powf(0.2)).min(4.0)
            };
            h = (step * grow).max(h).min(self.cfg.max_step);
            if y[0] < 0.0 {
                return Ok(Stop::Classified(Trajectory::Overshoot));
            }
            if y[1] > 0.0 && y[0] > 0.0 {
                return Ok(Stop::Classified(Trajectory::Undershoot));
            }
            while next < nodes.len() && nodes[next] <= r {
                on_node(next, y);
                next += 1;
            }
        }
        Ok(Stop::ReachedEnd)
    }
}

/// Converged shooting data; re-integrates the profile onto any grid.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateProfile {
    #[serde(skip)]
    ode_spec: NonlinearitySpec,
    pub omega: f64,
    /// Undershooting end of the final bracket.
    pub a0_lo: f64,
    /// Overshooting end of the final bracket.
    pub a0_hi: f64,
    pub config: ShootConfig,
}

/// Profile samples and where the linear tail took over.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    pub field: RadialField,
    pub tail_start: f64,
}

impl GroundStateProfile {
    pub fn amplitude(&self) -> f64 {
        0.5 * (self.a0_lo + self.a0_hi)
    }

    /// `T_λQ = λ^{d/2} Q(λ·)` on the nodes of `grid`.
    pub fn sample_scaled(
        &self,
        grid: &Arc<RadialGrid>,
        lambda: f64,
    ) -> Result<RadialField, VariationalError> {
        let scaled = RadialGrid::from_radii(
            grid.dim(),
            grid.radii().iter().map(|r| lambda * r).collect(),
        )?;
        let q = self.sample(&Arc::new(scaled))?.field;
        let amp = lambda.powf(grid.dim() as f64 / 2.0);
        Ok(RadialField::new(
            grid.clone(),
            q.values().iter().map(|z| z * amp).collect(),
        )?)
    }

    /// `Q` on the nodes of `grid`, continued beyond the trusted shooting range by
    /// the decaying solution `A r^{-ν} K_ν(√ω r)`, `ν = (d-2)/2`, of the linearized equation.
    pub fn sample(&self, grid: &Arc<RadialGrid>) -> Result<SampledProfile, VariationalError> {
        let ode = RadialOde::new(&self.ode_spec, self.omega);
        let nodes = grid.radii();
        let r_end = self.config.radius(self.omega).min(grid.r_max());
        let integ = Integrator {
            ode: &ode,
            cfg: &self.config,
            r_end,
        };
        let n = nodes.len();
        let mut lo = vec![f64::NAN; n];
        let mut hi = vec![f64::NAN; n];
        integ.run(self.a0_lo, nodes, |i, y| lo[i] = y[0])?;
        integ.run(self.a0_hi, nodes, |i, y| hi[i] = y[0])?;

        let a0 = self.amplitude();
        let threshold = self.config.tail_threshold * a0;
        let mut cut = n - 1;
        for i in 0..n {
            let (ul, uh) = (lo[i], hi[i]);
            let unusable = !(ul.is_finite() && uh.is_finite()) || ul <= 0.0 || uh <= 0.0;
            if unusable || (uh - ul).abs() > 1e-6 * ul || ul < threshold {
                cut = i;
                break;
            }
        }
        if cut < 2 {
            return Err(VariationalError::NonconvergedOde(
                "profile unusable next to the origin".into(),
            ));
        }
        let anchor = cut - 1;
        let r_c = nodes[anchor];
        let q_c = 0.5 * (lo[anchor] + hi[anchor]);
        let nu = (ode.dim - 2.0) / 2.0;
        let k = self.omega.sqrt();
        let values = (0..n)
            .map(|i| {
                let v = if i <= anchor {
                    0.5 * (lo[i] + hi[i])
                } else {
                    q_c * bessel_k_ratio(nu, k * nodes[i], k * r_c) * (r_c / nodes[i]).powf(nu)
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        Ok(SampledProfile {
            field: RadialField::new(grid.clone(), values)?,
            tail_start: r_c,
        })
    }
}

/// `K_ν(x) / K_ν(x₀)` from the large-argument expansion
/// `K_ν(x) ~ √(π/2x) e^{-x} Σ_k a_k(ν) x^{-k}`, truncated at its smallest term.
/// The series terminates for half-integer `ν`.
fn bessel_k_ratio(nu: f64, x: f64, x0: f64) -> f64 {
    fn series(nu: f64, x: f64) -> f64 {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let j = k as f64;
            let next = term * (mu - (2.0 * j - 1.0).powi(2)) / (j * 8.0 * x);
            if next == 0.0 {
                break;
            }
            if next.abs() >= term.abs() {
                break;
            }
            sum += next;
            term = next;
        }
        sum
    }
    (x0 / x).sqrt() * (-(x - x0)).exp() * series(nu, x) / series(nu, x0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateResult {
    #[serde(skip)]
    pub q: RadialField,
    pub a0: f64,
    pub omega: f64,
    /// `|K(Q)| / ‖∇Q‖²`
    pub k_residual: f64,
    /// `max |ΔQ - ωQ + f(Q) + Q^{2^*-1}|` over interior nodes, relative to the
    /// largest of `ωQ` and `f(Q) + Q^{2^*-1}`.
    pub pde_residual: f64,
    /// `S_ω(Q)`
    pub m_omega: f64,
    pub sigma: SigmaEstimate,
    /// `σ^{d/2}/d - m_ω`
    pub gap: f64,
    pub iterations: usize,
    pub tail_start: f64,
    pub report: FunctionalReport,
    pub profile: GroundStateProfile,
}

impl GroundStateResult {
    pub fn threshold(&self) -> f64 {
        self.sigma.threshold()
    }
}

/// Solves for the ground state and evaluates it on `grid`.
pub fn shoot_ground_state(
    spec: &NonlinearitySpec,
    omega: f64,
    cfg: &ShootConfig,
    grid: &Arc<RadialGrid>,
) -> Result<GroundStateResult, VariationalError> {
    if spec.dim() < 4 {
        return Err(VariationalError::DimensionTooSmall(spec.dim()));
    }
    spec.require_perturbation()?;
    if !(omega > 0.0) {
        return Err(VariationalError::NonpositiveOmega(omega));
    }
    let ode = RadialOde::new(spec, omega);
    let integ = Integrator {
        ode: &ode,
        cfg,
        r_end: cfg.radius(omega),
    };
    let classify = |a0: f64| -> Result<Trajectory, VariationalError> {
        Ok(match integ.run(a0, &[], |_, _| {})? {
            Stop::Classified(t) => t,
            // degenerate runs count as undershoot
            Stop::ReachedEnd => Trajectory::Undershoot,
        })
    };

    let a_c = ode.critical_amplitude();
    let (a_lo, a_hi) = (a_c * (1.0 + 1e-6), a_c * cfg.sweep_factor);
    let ratio = (a_hi / a_lo).powf(1.0 / (cfg.sweep_points.max(2) - 1) as f64);
    let mut bracket = None;
    let mut prev = (a_lo, classify(a_lo)?);
    for k in 1..cfg.sweep_points.max(2) {
        let a = a_lo * ratio.powi(k as i32);
        let t = classify(a)?;
        if prev.1 == Trajectory::Undershoot && t == Trajectory::Overshoot {
            bracket = Some((prev.0, a));
            break;
        }
        prev = (a, t);
    }
    let (mut under, mut over) =
        bracket.ok_or(VariationalError::NoBracket { lo: a_lo, hi: a_hi })?;

    let mut iterations = 0;
    while iterations < cfg.bisection_iters && over - under > 2.0 * f64::EPSILON * over {
        let mid = 0.5 * (under + over);
        match classify(mid)? {
            Trajectory::Undershoot => under = mid,
            Trajectory::Overshoot => over = mid,
        }
        iterations += 1;
    }

    let profile = GroundStateProfile {
        ode_spec: spec.clone(),
        omega,
        a0_lo: under,
        a0_hi: over,
        config: cfg.clone(),
    };
    let sampled = profile.sample(grid)?;
    let q = sampled.field;
    let rep = report(spec, omega, &q)?;
    let k_residual = rep.nehari.abs() / rep.kinetic;

    let lap = q.laplacian();
    let n = grid.len();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (v, l) in q.values()[..n - 1].iter().zip(&lap) {
        let u = v.re;
        worst = worst.max((l.re - ode.source(u)).abs());
        scale = scale
            .max(omega * u.abs())
            .max((ode.source(u) - omega * u).abs());
    }
    let pde_residual = worst / scale;

    let sigma = sigma_estimate(grid);
    let m_omega = rep.action;
    let result = GroundStateResult {
        a0: profile.amplitude(),
        omega,
        k_residual,
        pde_residual,
        m_omega,
        gap: sigma.threshold() - m_omega,
        sigma,
        iterations,
        tail_start: sampled.tail_start,
        report: rep,
        profile,
        q,
    };
    if !(k_residual <= cfg.k_tolerance) {
        return Err(VariationalError::NonconvergedOde(format!(
            "|K(Q)|/‖∇Q‖² = {k_residual:.3e} exceeds {:.1e}",
            cfg.k_tolerance
        )));
    }
    Ok(result)
}
