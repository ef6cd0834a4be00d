//! Finite-volume radial operator and one Crank–Nicolson step.
//!
//! Node `i` owns the cell `[r_{i-1/2}, r_{i+1/2}]` (with `r_{-1/2} = 0`) of volume
//! `V_i`; neighbouring cells exchange flux through faces of conductance
//! `a_i = c_d r_{i+1/2}^{d-1} / (r_{i+1} - r_i)`. The last node is a Dirichlet wall.
//! With `Φ(s) = Σ μ/(p+1) s^{(p+1)/2} + s^{2^*/2}/2^*` the discrete mass
//! `Σ V|u|²` and Hamiltonian `½ Σ a|Δu|² - Σ V Φ(|u|²)` are conserved exactly
//! by the difference-quotient step, up to the fixed-point tolerance.

use num_complex::Complex64;

use super::EvolutionError;
use crate::field::{sphere_area, RadialGrid};
use crate::nonlinearity::NonlinearitySpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Powers `(coefficient, exponent)` with `Φ(s) = Σ c s^a`.
#[derive(Debug, Clone)]
pub(crate) struct Potential {
    powers: Vec<(f64, f64)>,
}

impl Potential {
    pub(crate) fn new(spec: &NonlinearitySpec, include_critical: bool) -> Self {
        let mut powers: Vec<(f64, f64)> = spec
            .terms()
            .iter()
            .map(|t| (t.mu / (t.p + 1.0), (t.p + 1.0) / 2.0))
            .collect();
        if include_critical {
            let crit = spec.energy_critical();
            powers.push((1.0 / crit, crit / 2.0));
        }
        Self { powers }
    }

    pub(crate) fn value(&self, s: f64) -> f64 {
        self.powers.iter().map(|&(c, a)| c * s.powf(a)).sum()
    }

    /// `Φ'(s)`; `2Φ'(|z|²) z` is the full nonlinearity.
    pub(crate) fn derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        self.powers
            .iter()
            .map(|&(c, a)| c * a * s.powf(a - 1.0))
            .sum()
    }

    pub(crate) fn second_derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        self.powers
            .iter()
            .map(|&(c, a)| c * a * (a - 1.0) * s.powf(a - 2.0))
            .sum()
    }

    /// `[Φ(s1) - Φ(s0)] / (s1 - s0)`, without cancellation when `s1 ≈ s0`.
    pub(crate) fn quotient(&self, s0: f64, s1: f64) -> f64 {
        let base = s0.max(s1);
        if base == 0.0 {
            return 0.0;
        }
        let delta = (s0.min(s1) - base) / base;
        self.powers
            .iter()
            .map(|&(c, a)| {
                let q = if delta == 0.0 {
                    a
                } else {
                    (a * delta.ln_1p()).exp_m1() / delta
                };
                c * base.powf(a - 1.0) * q
            })
            .sum()
    }
}

/// Conservative radial Laplacian on the unknowns `0..n-1` of an `n`-node grid.
#[derive(Debug, Clone)]
pub(crate) struct RadialOperator {
    pub(crate) vol: Vec<f64>,
    /// `face[i]` couples unknown `i` to node `i + 1`; the last one reaches the wall.
    pub(crate) face: Vec<f64>,
}

impl RadialOperator {
    pub(crate) fn new(grid: &RadialGrid) -> Self {
        let r = grid.radii();
        let d = grid.dim() as i32;
        let c = sphere_area(grid.dim());
        let m = r.len() - 1;
        let mid: Vec<f64> = (0..m).map(|i| 0.5 * (r[i] + r[i + 1])).collect();
        let vol = (0..m)
            .map(|i| {
                let inner = if i == 0 { 0.0 } else { mid[i - 1] };
                c * (mid[i].powi(d) - inner.powi(d)) / d as f64
            })
            .collect();
        let face = (0..m)
            .map(|i| c * mid[i].powi(d - 1) / (r[i + 1] - r[i]))
            .collect();
        Self { vol, face }
    }

    pub(crate) fn unknowns(&self) -> usize {
        self.vol.len()
    }

    /// `(Lu)_i = a_i(u_{i+1} - u_i) - a_{i-1}(u_i - u_{i-1})`, with `u` zero at the wall.
    pub(crate) fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let m = self.unknowns();
        let at = |k: usize| {
            if k < m {
                u[k]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        (0..m)
            .map(|i| {
                let right = (at(i + 1) - u[i]) * self.face[i];
                let left = if i == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    (u[i] - u[i - 1]) * self.face[i - 1]
                };
                right - left
            })
            .collect()
    }

    pub(crate) fn mass(&self, u: &[Complex64]) -> f64 {
        self.vol.iter().zip(u).map(|(v, z)| v * z.norm_sqr()).sum()
    }

    /// `Σ a_i |u_{i+1} - u_i|²`
    pub(crate) fn kinetic(&self, u: &[Complex64]) -> f64 {
        let m = self.unknowns();
        (0..m)
            .map(|i| {
                let next = if i + 1 < m {
                    u[i + 1]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                self.face[i] * (next - u[i]).norm_sqr()
            })
            .sum()
    }

    pub(crate) fn hamiltonian(&self, pot: &Potential, u: &[Complex64]) -> f64 {
        0.5 * self.kinetic(u)
            - self
                .vol
                .iter()
                .zip(u)
                .map(|(v, z)| v * pot.value(z.norm_sqr()))
                .sum::<f64>()
    }
}

/// Solves the complex symmetric tridiagonal system with diagonal `b` and
/// off-diagonal `c` (`c[i]` couples `i` and `i + 1`) in place of `rhs`.
fn thomas(b: &mut [Complex64], c: &[Complex64], rhs: &mut [Complex64]) {
    let m = b.len();
    for i in 1..m {
        let w = c[i - 1] / b[i - 1];
        b[i] -= w * c[i - 1];
        let prev = rhs[i - 1];
        rhs[i] -= w * prev;
    }
    rhs[m - 1] /= b[m - 1];
    for i in (0..m - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] = (rhs[i] - c[i] * next) / b[i];
    }
}

/// One step `u0 -> u1` of size `dt` (negative steps run backwards). `guess`
/// seeds the fixed-point iteration. Returns the new state and the iteration count.
pub(crate) fn cn_step(
    op: &RadialOperator,
    pot: &Potential,
    u0: &[Complex64],
    guess: Option<&[Complex64]>,
    dt: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, usize), EvolutionError> {
    let m = op.unknowns();
    let lu0 = op.apply(u0);
    let base_rhs: Vec<Complex64> = (0..m)
        .map(|i| I * (op.vol[i] / dt) * u0[i] - 0.5 * lu0[i])
        .collect();
    let off: Vec<Complex64> = op
        .face
        .iter()
        .map(|a| Complex64::new(0.5 * a, 0.0))
        .collect();
    let s0: Vec<f64> = u0.iter().map(|z| z.norm_sqr()).collect();
    let mut u1: Vec<Complex64> = guess
        .map(|g| g[..m].to_vec())
        .unwrap_or_else(|| u0[..m].to_vec());
    let mut diag = vec![Complex64::new(0.0, 0.0); m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for iter in 1..=max_iter {
        for i in 0..m {
            let g = pot.quotient(s0[i], u1[i].norm_sqr());
            let left = if i == 0 { 0.0 } else { op.face[i - 1] };
            diag[i] = I * (op.vol[i] / dt) - 0.5 * (op.face[i] + left) + op.vol[i] * g;
            rhs[i] = base_rhs[i] - op.vol[i] * g * u0[i];
        }
        thomas(&mut diag, &off, &mut rhs);
        let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let change = rhs
            .iter()
            .zip(&u1)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if !(scale.is_finite() && change.is_finite()) {
            return Err(EvolutionError::FixedPointDiverged {
                iterations: iter,
                change: f64::INFINITY,
            });
        }
        std::mem::swap(&mut u1, &mut rhs);
        if change <= tol * scale {
            return Ok((u1, iter));
        }
        if iter == max_iter {
            return Err(EvolutionError::FixedPointDiverged {
                iterations: iter,
                change: change / scale.max(f64::MIN_POSITIVE),
            });
        }
    }
    unreachable!("max_iter is at least one")
}

/// Newton iteration for the real solution of `-Lu/V + ωu - 2Φ'(u²)u = 0` near `u0`.
/// Returns the solution on the unknowns and the number of iterations.
pub(crate) fn newton_ground_state(
    op: &RadialOperator,
    pot: &Potential,
    omega: f64,
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), EvolutionError> {
    let m = op.unknowns();
    let mut u: Vec<f64> = u0[..m].to_vec();
    let off: Vec<Complex64> = op.face.iter().map(|a| Complex64::new(-a, 0.0)).collect();
    for iter in 1..=max_iter {
        let uc: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let lu = op.apply(&uc);
        let mut diag = vec![Complex64::new(0.0, 0.0); m];
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let s = u[i] * u[i];
            let left = if i == 0 { 0.0 } else { op.face[i - 1] };
            let jac = omega - 2.0 * pot.derivative(s) - 4.0 * pot.second_derivative(s) * s;
            diag[i] = Complex64::new(op.face[i] + left + op.vol[i] * jac, 0.0);
            rhs[i] = Complex64::new(
                lu[i].re - op.vol[i] * (omega - 2.0 * pot.derivative(s)) * u[i],
                0.0,
            );
        }
        thomas(&mut diag, &off, &mut rhs);
        let scale = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let change = rhs.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(EvolutionError::FixedPointDiverged {
                iterations: iter,
                change,
            });
        }
        for (x, dx) in u.iter_mut().zip(&rhs) {
            *x += dx.re;
        }
        if change <= tol * scale {
            return Ok((u, iter));
        }
    }
    Err(EvolutionError::FixedPointDiverged {
        iterations: max_iter,
        change: f64::NAN,
    })
}
