use std::path::PathBuf;

use critnls::evolution::{classify, evolve, invariance_audit, EvolveConfig};
use critnls::exponents::{
    default_p, exotic_or_ordinary, is_l2_admissible, named_pairs, ExoticNorms, ExtRational,
};
use critnls::functionals::{bubble_residual, report, sigma_estimate};
use critnls::nonlinearity::validate;
use critnls::variational::{
    gaussian_family, lambda_star, m_omega_upper_bounds, scan, shoot_ground_state,
};
use critnls::RadialField;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::context::Context;
use crate::error::CliError;
use crate::init::{random_mixture, InitialData};
use crate::output::{num, table, write_file, Output};

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn validate_nl(ctx: &Context) -> Result<Output, CliError> {
    let r = validate(ctx.cfg.dimension, ctx.spec.terms())?;
    let csv = table(
        &[
            "dimension",
            "mass_critical",
            "energy_critical",
            "eps0",
            "p_min",
            "p_max",
            "diagnostic",
            "homogeneity_identity",
            "monotonicity",
            "convexity",
            "positivity",
        ],
        &[vec![
            r.dim.to_string(),
            num(r.mass_critical),
            num(r.energy_critical),
            opt(r.eps0),
            opt(r.p_min),
            opt(r.p_max),
            r.diagnostic.to_string(),
            r.homogeneity_identity.to_string(),
            r.monotonicity.to_string(),
            r.convexity.to_string(),
            r.positivity.to_string(),
        ]],
    )?;
    Ok(Output::new(
        csv,
        serde_json::to_value(&r).unwrap_or_default(),
    ))
}

fn field(ctx: &Context, init: &InitialData) -> Result<RadialField, CliError> {
    init.build(ctx, &ctx.cfg.variational_grid()?)
}

pub fn functionals(ctx: &Context, init: &InitialData) -> Result<Output, CliError> {
    let u = field(ctx, init)?;
    let r = report(&ctx.spec, ctx.cfg.omega, &u)?;
    let csv = table(
        &[
            "dim",
            "omega",
            "mass",
            "kinetic",
            "pot_f",
            "pot_crit",
            "hamiltonian",
            "hamiltonian0",
            "action",
            "i_omega",
            "nehari",
            "h1_norm_sq",
        ],
        &[vec![
            r.dim.to_string(),
            num(r.omega),
            num(r.mass),
            num(r.kinetic),
            num(r.pot_f),
            num(r.pot_crit),
            num(r.hamiltonian),
            num(r.hamiltonian0),
            num(r.action),
            num(r.i_omega),
            num(r.nehari),
            num(r.h1_norm_sq()),
        ]],
    )?;
    Ok(Output::new(
        csv,
        json!({ "init": init, "per_term": r.per_term, "momentum": r.momentum }),
    ))
}

pub struct ScanArgs {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub points: usize,
}

pub fn scan_lambda(ctx: &Context, init: &InitialData, args: &ScanArgs) -> Result<Output, CliError> {
    let u = field(ctx, init)?;
    let ls = lambda_star(&ctx.spec, ctx.cfg.omega, &u)?;
    let range = (
        args.lambda_min.unwrap_or(ls / 10.0),
        args.lambda_max.unwrap_or(ls * 10.0),
    );
    let sc = scan(&ctx.spec, ctx.cfg.omega, &u, range, args.points)?;
    let rows: Vec<Vec<String>> = (0..sc.lambdas.len())
        .map(|j| {
            vec![
                num(sc.lambdas[j]),
                num(sc.k_vals[j]),
                num(sc.s_vals[j]),
                num(sc.i_vals[j]),
            ]
        })
        .collect();
    let csv = table(&["lambda", "K", "S", "I"], &rows)?;
    Ok(Output::new(
        csv,
        json!({
            "init": init,
            "lambda_star": sc.lambda_star,
            "sign_changes": sc.sign_changes,
            "certificates": sc.certificates,
            "all_pass": sc.certificates.all_pass(),
        }),
    ))
}

pub fn ground_state(
    ctx: &Context,
    omegas: &[f64],
    profile: Option<&PathBuf>,
) -> Result<Output, CliError> {
    let grid = ctx.cfg.variational_grid()?;
    let shoot = ctx.cfg.shoot_config();
    let spec = &ctx.spec;
    let results = omegas
        .par_iter()
        .map(|&w| shoot_ground_state(spec, w, &shoot, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|g| {
            vec![
                num(g.omega),
                num(g.a0),
                num(g.m_omega),
                num(g.threshold()),
                num(g.gap),
            ]
        })
        .collect();
    let csv = table(&["omega", "a0", "m_omega", "threshold", "gap"], &rows)?;
    let mut out = Output::new(
        csv,
        json!(results
            .iter()
            .map(|g| json!({
                "omega": g.omega,
                "k_residual": g.k_residual,
                "pde_residual": g.pde_residual,
                "iterations": g.iterations,
                "tail_start": g.tail_start,
                "sigma": g.sigma,
            }))
            .collect::<Vec<_>>()),
    );
    if let (Some(path), Some(first)) = (profile, results.first()) {
        let path = ctx.cfg.resolve(path);
        let mut buf = Vec::new();
        first.q.write_csv(&mut buf)?;
        write_file(&path, &buf)?;
        out.files.push(path);
    }
    Ok(out)
}

pub struct SweepArgs {
    pub widths: Vec<f64>,
    pub scales: Vec<f64>,
    pub random: usize,
}

pub fn bound_sweep(ctx: &Context, args: &SweepArgs) -> Result<Output, CliError> {
    let grid = ctx.cfg.variational_grid()?;
    let gs = ctx.ground_state()?;
    let mut family = gaussian_family(&grid, &args.widths);
    for &mu in &args.scales {
        family.push((format!("T_{mu} Q"), gs.profile.sample_scaled(&grid, mu)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    for k in 0..args.random {
        let comps = 1 + k % 4;
        family.push((
            format!("mixture #{k} ({comps} bumps)"),
            random_mixture(&mut rng, &grid, comps),
        ));
    }
    let tol = ctx.cfg.solver.bound_tolerance * gs.m_omega;
    let b = m_omega_upper_bounds(&ctx.spec, ctx.cfg.omega, &family, Some(gs.m_omega), tol)?;
    let rows: Vec<Vec<String>> = b
        .points
        .iter()
        .map(|p| {
            vec![
                p.label.clone(),
                num(p.lambda_star),
                num(p.bound),
                num(p.k_residual),
            ]
        })
        .collect();
    let csv = table(&["label", "lambda_star", "bound", "k_residual"], &rows)?;
    Ok(Output::new(
        csv,
        json!({
            "m_omega": gs.m_omega,
            "min_bound": b.min_bound,
            "relative_excess": (b.min_bound - gs.m_omega) / gs.m_omega,
            "tolerance": tol,
            "all_above": b.all_above,
        }),
    ))
}

pub fn sigma(ctx: &Context) -> Result<Output, CliError> {
    let grid = ctx.cfg.variational_grid()?;
    let s = sigma_estimate(&grid);
    let res = bubble_residual(&grid);
    let csv = table(
        &[
            "d",
            "grad_sq",
            "crit_pow",
            "mismatch",
            "sigma",
            "sigma_pow",
            "threshold",
            "bubble_residual",
        ],
        &[vec![
            s.dim.to_string(),
            num(s.grad_sq),
            num(s.crit_pow),
            num(s.mismatch),
            num(s.sigma),
            num(s.sigma_pow),
            num(s.threshold()),
            num(res),
        ]],
    )?;
    Ok(Output::new(
        csv,
        json!({ "grid": grid.kind(), "n": grid.len(), "r_max": grid.r_max() }),
    ))
}

pub fn evolve_cmd(ctx: &Context, init: &InitialData, audit: bool) -> Result<Output, CliError> {
    let e = &ctx.cfg.evolution;
    let psi0 = init.build(ctx, &ctx.cfg.evolution_grid()?)?;
    let cfg = EvolveConfig {
        dt: e.dt,
        t_end: e.t_end,
        sample_every: e.sample_every,
        fixed_point_tol: e.fixed_point_tol,
        max_fixed_point_iters: e.max_fixed_point_iters,
        ..EvolveConfig::default()
    };
    let trace = evolve(&ctx.spec, ctx.cfg.omega, &psi0, &cfg)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let mut summary = json!({
        "init": init,
        "samples": trace.len(),
        "max_mass_drift": trace.max_mass_drift(),
        "max_h_drift": trace.max_h_drift(),
        "conserved_1e-8": trace.conserved(1e-8),
        "validity_time": trace.validity_time,
        "max_fixed_point_iters": trace.max_fixed_point_iters,
        "final_modulus_drift": trace.modulus_drift.last(),
        "final_phase": trace.phase.last(),
        "warnings": trace.warnings,
    });
    let mut out = Output::new(csv, summary.clone());
    if audit {
        let gs = ctx.ground_state()?;
        match invariance_audit(&ctx.spec, ctx.cfg.omega, &trace, gs.m_omega) {
            Ok(a) => summary["audit"] = json!(a),
            Err(err) => {
                summary["audit"] = json!({ "error": err.to_string() });
                out.failure = Some(err.into());
            }
        }
        summary["m_omega"] = json!(gs.m_omega);
        out.summary = summary;
    }
    Ok(out)
}

pub fn classify_cmd(
    ctx: &Context,
    init: &InitialData,
    m_omega: Option<f64>,
) -> Result<Output, CliError> {
    let u = field(ctx, init)?;
    let m = match m_omega {
        Some(m) => m,
        None => ctx.ground_state()?.m_omega,
    };
    let sp = sigma_estimate(u.grid()).sigma_pow;
    let c = classify(&ctx.spec, ctx.cfg.omega, &u, m, sp)?;
    let csv = table(
        &[
            "in_a_omega_plus",
            "in_a0",
            "action_margin",
            "nehari_margin",
            "h0_margin",
            "kinetic_margin",
        ],
        &[vec![
            c.in_a_omega_plus.to_string(),
            c.in_a0.to_string(),
            num(c.action_margin),
            num(c.nehari_margin),
            num(c.h0_margin),
            num(c.kinetic_margin),
        ]],
    )?;
    Ok(Output::new(
        csv,
        json!({ "init": init, "m_omega": m, "sigma_pow": sp }),
    ))
}

fn rational(s: &str) -> Result<BigRational, CliError> {
    let x: ExtRational = s.parse()?;
    x.finite()
        .cloned()
        .ok_or_else(|| CliError::Validation(format!("{s} must be finite")))
}

pub fn exponents(ctx: &Context, p1: Option<&str>) -> Result<Output, CliError> {
    let d = ctx.cfg.dimension;
    let p1 = match p1 {
        Some(s) => rational(s)?,
        None => default_p(d)?,
    };
    let (csv, summary) = match exotic_or_ordinary(d, &p1)? {
        ExoticNorms::Exotic(e) => {
            let c = &e.certificates;
            let csv = table(
                &[
                    "d",
                    "p1",
                    "s_p1",
                    "alpha",
                    "s_alpha",
                    "rho",
                    "gamma",
                    "rho_star",
                    "gamma_star",
                    "alpha_in_interval",
                    "s_alpha_consistent",
                    "hs_admissible",
                    "gamma_exceeds_diagonal",
                    "rho_star_conjugate",
                    "dual_admissible",
                    "invariants_pass",
                ],
                &[vec![
                    d.to_string(),
                    e.p1.to_string(),
                    e.s_p1.to_string(),
                    e.alpha.to_string(),
                    e.s_alpha.to_string(),
                    e.rho.to_string(),
                    e.gamma.to_string(),
                    e.rho_star.to_string(),
                    e.gamma_star.to_string(),
                    c.alpha_in_interval.to_string(),
                    c.s_alpha_consistent.to_string(),
                    c.hs_admissible.to_string(),
                    c.gamma_exceeds_diagonal.to_string(),
                    c.rho_star_conjugate.to_string(),
                    c.dual_admissible.to_string(),
                    c.invariants_pass().to_string(),
                ]],
            )?;
            (csv, json!({ "kind": "exotic", "record": e }))
        }
        ExoticNorms::Ordinary(o) => {
            let csv = table(
                &["d", "p1", "v_q", "v_r", "dual_q", "dual_r"],
                &[vec![
                    d.to_string(),
                    p1.to_string(),
                    o.pair.q.to_string(),
                    o.pair.r.to_string(),
                    o.dual.q.to_string(),
                    o.dual.r.to_string(),
                ]],
            )?;
            (csv, json!({ "kind": "ordinary" }))
        }
    };
    Ok(Output::new(csv, summary))
}

pub fn pairs(ctx: &Context, p: Option<&str>) -> Result<Output, CliError> {
    let d = ctx.cfg.dimension;
    let p = match p {
        Some(s) => rational(s)?,
        None => default_p(d)?,
    };
    let named = named_pairs(d, &p)?;
    let rows: Vec<Vec<String>> = named
        .iter()
        .map(|(name, pair)| {
            vec![
                name.to_string(),
                pair.q.to_string(),
                pair.r.to_string(),
                is_l2_admissible(d, pair).to_string(),
            ]
        })
        .collect();
    let csv = table(&["name", "q", "r", "l2_admissible"], &rows)?;
    Ok(Output::new(csv, json!({ "d": d, "p": p.to_string() })))
}
