use serde::Serialize;

use super::VariationalError;
use crate::field::RadialField;
use crate::functionals::{report, FunctionalReport, ScalingLaw};
use crate::nonlinearity::NonlinearitySpec;

const LAMBDA_MIN: f64 = 1e-9;
const LAMBDA_MAX: f64 = 1e9;

/// Root of `λ ↦ K(T_λu)` for the field `u`.
pub fn lambda_star(
    spec: &NonlinearitySpec,
    omega: f64,
    u: &RadialField,
) -> Result<f64, VariationalError> {
    lambda_star_of(&report(spec, omega, u)?)
}

/// Root of `λ ↦ K(T_λu)` from the base norms of `u`.
///
/// Brackets by doubling or halving from `λ = 1`, then bisects to a relative
/// width of `1e-12`.
pub fn lambda_star_of(base: &FunctionalReport) -> Result<f64, VariationalError> {
    if base.kinetic == 0.0 && base.pot_crit == 0.0 && base.mass == 0.0 {
        return Err(VariationalError::ZeroField);
    }
    let law = ScalingLaw::from_report(base);
    let k = |l: f64| law.nehari(l);
    let (mut lo, mut hi) = if k(1.0) > 0.0 {
        let mut hi = 2.0;
        while k(hi) > 0.0 {
            hi *= 2.0;
            if hi > LAMBDA_MAX {
                return Err(VariationalError::BracketFailure);
            }
        }
        (hi / 2.0, hi)
    } else {
        let mut lo = 0.5;
        while k(lo) <= 0.0 {
            lo /= 2.0;
            if lo < LAMBDA_MIN {
                return Err(VariationalError::BracketFailure);
            }
        }
        (lo, 2.0 * lo)
    };
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if k(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pass/fail flags and worst-case excesses of a [`LambdaScan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCertificates {
    /// `I_ω(T_λu)` strictly increasing: adjacent differences `> -1e-12` and a positive total rise.
    pub i_increasing: bool,
    pub min_i_step: f64,
    /// Exactly one sign change of `K`, positive before and negative after `λ(u)`.
    pub single_sign_change: bool,
    /// Discrete `S''` below `K/λ² + tol` at every interior node.
    pub second_derivative_bound: bool,
    pub max_second_derivative_excess: f64,
    /// Discrete `S''` nonpositive (up to tolerance) for `λ >= λ(u)`.
    pub concave_beyond_root: bool,
    pub max_concavity_excess: f64,
    /// `H >= ½(1 - C₀')‖∇u‖²` wherever `K >= 0`.
    pub coercive_where_nonnegative: bool,
    /// Relative error between a finite-difference `dS/dλ` at `λ = 1` and `K(u)`.
    pub derivative_rel_error: f64,
}

impl ScanCertificates {
    pub fn all_pass(&self) -> bool {
        self.i_increasing
            && self.single_sign_change
            && self.second_derivative_bound
            && self.concave_beyond_root
            && self.coercive_where_nonnegative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaScan {
    pub lambdas: Vec<f64>,
    pub k_vals: Vec<f64>,
    pub s_vals: Vec<f64>,
    pub i_vals: Vec<f64>,
    pub lambda_star: f64,
    pub sign_changes: usize,
    pub certificates: ScanCertificates,
}

/// `C₀' = max{4/(4 + dε₀), (d-2)/d}`; `(d-2)/d` alone in diagnostic mode.
pub fn coercivity_constant(spec: &NonlinearitySpec) -> f64 {
    let d = spec.dim() as f64;
    let crit_part = (d - 2.0) / d;
    if spec.is_diagnostic() {
        crit_part
    } else {
        (4.0 / (4.0 + d * spec.eps0())).max(crit_part)
    }
}

pub fn scan(
    spec: &NonlinearitySpec,
    omega: f64,
    u: &RadialField,
    lambda_range: (f64, f64),
    n_points: usize,
) -> Result<LambdaScan, VariationalError> {
    scan_report(spec, &report(spec, omega, u)?, lambda_range, n_points)
}

/// Log-spaced scan of `T_λu` evaluated from the closed-form scaling laws.
pub fn scan_report(
    spec: &NonlinearitySpec,
    base: &FunctionalReport,
    (lo, hi): (f64, f64),
    n_points: usize,
) -> Result<LambdaScan, VariationalError> {
    if !(lo > 0.0 && hi > lo) || n_points < 3 {
        return Err(VariationalError::InvalidScan(format!(
            "range ({lo}, {hi}) with {n_points} points"
        )));
    }
    let lambda_star = lambda_star_of(base)?;
    let law = ScalingLaw::from_report(base);
    let step = (hi / lo).ln() / (n_points - 1) as f64;
    let lambdas: Vec<f64> = (0..n_points)
        .map(|j| lo * (step * j as f64).exp())
        .collect();
    let k_vals: Vec<f64> = lambdas.iter().map(|&l| law.nehari(l)).collect();
    let s_vals: Vec<f64> = lambdas.iter().map(|&l| law.action(l)).collect();
    let i_vals: Vec<f64> = lambdas.iter().map(|&l| law.i_omega(l)).collect();

    let sign_changes = k_vals
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    let sides_ok = lambdas.iter().zip(&k_vals).all(|(&l, &k)| {
        if l < lambda_star * (1.0 - 1e-9) {
            k > 0.0
        } else if l > lambda_star * (1.0 + 1e-9) {
            k < 0.0
        } else {
            true
        }
    });
    let brackets_root = lambdas[0] < lambda_star && lambda_star < lambdas[n_points - 1];
    let single_sign_change =
        sides_ok && (sign_changes == 1 || (!brackets_root && sign_changes == 0));

    let min_i_step = i_vals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let i_increasing = min_i_step > -1e-12 && i_vals[n_points - 1] > i_vals[0];

    // Second differences of S - ωM/2; the constant drops out of the differences
    // and only adds rounding noise.
    let offset = 0.5 * base.omega * base.mass;
    let mut max_second_derivative_excess = f64::NEG_INFINITY;
    let mut max_concavity_excess = f64::NEG_INFINITY;
    for j in 1..n_points - 1 {
        let (l0, l1, l2) = (lambdas[j - 1], lambdas[j], lambdas[j + 1]);
        let (h1, h2) = (l1 - l0, l2 - l1);
        let (s0, s1, s2) = (
            s_vals[j - 1] - offset,
            s_vals[j] - offset,
            s_vals[j + 1] - offset,
        );
        let d2 = 2.0 * ((s2 - s1) / h2 - (s1 - s0) / h1) / (h1 + h2);
        let tol = 1e-10 * law.scale(l1) / (l1 * l1);
        max_second_derivative_excess =
            max_second_derivative_excess.max((d2 - k_vals[j] / (l1 * l1)) / tol);
        if l0 >= lambda_star {
            max_concavity_excess = max_concavity_excess.max(d2 / tol);
        }
    }

    let c0 = coercivity_constant(spec);
    let coercive_where_nonnegative = lambdas.iter().zip(&k_vals).all(|(&l, &k)| {
        if k < 0.0 {
            return true;
        }
        let kinetic = base.kinetic * l * l;
        let h = law.action(l) - offset;
        h >= 0.5 * (1.0 - c0) * kinetic - 1e-12 * law.scale(l)
    });

    let h = 1e-3;
    let s = |l: f64| law.action(l) - offset;
    let fd = (8.0 * (s(1.0 + h) - s(1.0 - h)) - (s(1.0 + 2.0 * h) - s(1.0 - 2.0 * h))) / (12.0 * h);
    let derivative_rel_error = (fd - base.nehari).abs() / base.nehari.abs().max(f64::MIN_POSITIVE);

    Ok(LambdaScan {
        lambdas,
        k_vals,
        s_vals,
        i_vals,
        lambda_star,
        sign_changes,
        certificates: ScanCertificates {
            i_increasing,
            min_i_step,
            single_sign_change,
            second_derivative_bound: max_second_derivative_excess <= 1.0,
            max_second_derivative_excess,
            concave_beyond_root: max_concavity_excess <= 1.0,
            max_concavity_excess,
            coercive_where_nonnegative,
            derivative_rel_error,
        },
    })
}
