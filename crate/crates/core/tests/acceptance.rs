//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero on any FAIL.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use critnls::evolution::{
    discrete_ground_state, evolve, invariance_audit, EvolutionTrace, EvolveConfig,
};
use critnls::exponents::{default_p, exotic, interior_p1, is_l2_admissible, named_pairs};
use critnls::functionals::{bubble_residual, report, sigma_estimate};
use critnls::variational::{
    gaussian_family, m_omega_upper_bounds, scan, shoot_ground_state, GroundStateResult, ShootConfig,
};
use critnls::{NonlinearitySpec, RadialField, RadialGrid};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(n: usize, name: &str, started: Instant, o: &Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "{tag} criterion {n} ({name}): {} [{:.2}s]",
        o.detail,
        started.elapsed().as_secs_f64()
    );
}

fn criterion1() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [4, 5] {
        let t = Instant::now();
        let grid = Arc::new(RadialGrid::default_variational(d).unwrap());
        let est = sigma_estimate(&grid);
        let res = bubble_residual(&grid);
        let secs = t.elapsed().as_secs_f64();
        pass &= est.mismatch < 1e-3 && res < 1e-4 && secs < 1.0;
        detail.push(format!(
            "d={d} mismatch={:.2e} residual={res:.2e} t={secs:.2}s",
            est.mismatch
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn criterion2(cases: &[(usize, f64, GroundStateResult, f64)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (d, p, gs, secs) in cases {
        pass &= gs.k_residual < 1e-4 && gs.m_omega < gs.threshold() && gs.gap > 0.0 && *secs < 30.0;
        detail.push(format!(
            "d={d} p={p} K_res={:.2e} m={:.6} threshold={:.6} gap={:.4} t={secs:.2}s",
            gs.k_residual,
            gs.m_omega,
            gs.threshold(),
            gs.gap
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn gaussian_mixture(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> RadialField {
    let k = rng.random_range(1..=4);
    let comps: Vec<(f64, f64, f64)> = (0..k)
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

fn criterion3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20111207);
    let mut failures = 0;
    let (mut worst_i, mut worst_conc, mut worst_deriv) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for (d, p) in [(4, 2.5), (5, 2.0)] {
        let spec = NonlinearitySpec::from_pairs(d, &[(1.0, p)]).unwrap();
        let grid = Arc::new(RadialGrid::default_variational(d).unwrap());
        for _ in 0..100 {
            let u = gaussian_mixture(&mut rng, &grid);
            let omega = rng.random_range(0.5..2.0);
            let base = report(&spec, omega, &u).unwrap();
            let ls = critnls::variational::lambda_star_of(&base).unwrap();
            let sc = scan(&spec, omega, &u, (ls / 10.0, ls * 10.0), 401).unwrap();
            let c = &sc.certificates;
            worst_i = worst_i.min(c.min_i_step);
            worst_conc = worst_conc.max(c.max_concavity_excess);
            worst_deriv = worst_deriv.max(c.derivative_rel_error);
            let ok = sc.sign_changes == 1
                && c.single_sign_change
                && c.i_increasing
                && c.concave_beyond_root
                && c.derivative_rel_error < 1e-8;
            failures += usize::from(!ok);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: failures == 0 && secs < 10.0,
        detail: format!(
            "200 fields, {failures} failing; min I step={worst_i:.2e}, max S''/tol beyond root={worst_conc:.2e} (pass <= 1), max dS/dλ error={worst_deriv:.2e}"
        ),
    }
}

fn criterion4(gs: &GroundStateResult) -> Outcome {
    let t = Instant::now();
    let spec = NonlinearitySpec::from_pairs(5, &[(1.0, 2.0)]).unwrap();
    let grid = gs.q.grid().clone();
    let mut family: Vec<(String, RadialField)> = [0.5, 0.7, 0.85, 1.0, 1.2, 1.5, 2.0]
        .iter()
        .map(|&mu| {
            (
                format!("T_{mu}Q"),
                gs.profile.sample_scaled(&grid, mu).unwrap(),
            )
        })
        .collect();
    let q_bounds = m_omega_upper_bounds(
        &spec,
        gs.omega,
        &family,
        Some(gs.m_omega),
        1e-6 * gs.m_omega,
    )
    .unwrap();
    let rel = (q_bounds.min_bound - gs.m_omega).abs() / gs.m_omega;
    family = gaussian_family(&grid, &[0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]);
    let g_bounds = m_omega_upper_bounds(&spec, gs.omega, &family, Some(gs.m_omega), 1e-6).unwrap();
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: rel < 1e-6 && g_bounds.all_above == Some(true) && secs < 5.0,
        detail: format!(
            "d=5 T_μQ min bound rel error={rel:.2e}; Gaussian min bound={:.4} vs m={:.4}",
            g_bounds.min_bound, gs.m_omega
        ),
    }
}

fn criterion5(
    tiny: &EvolutionTrace,
    tiny_secs: f64,
    scaled: &EvolutionTrace,
    scaled_secs: f64,
) -> Outcome {
    let ok = |tr: &EvolutionTrace| tr.max_mass_drift() < 1e-8 && tr.max_h_drift() < 1e-8;
    Outcome {
        pass: ok(tiny) && ok(scaled) && tiny_secs < 300.0 && scaled_secs < 300.0,
        detail: format!(
            "tiny Gaussian mass={:.1e} H={:.1e} t={tiny_secs:.1}s; T_0.8Q mass={:.1e} H={:.1e} t={scaled_secs:.1}s",
            tiny.max_mass_drift(),
            tiny.max_h_drift(),
            scaled.max_mass_drift(),
            scaled.max_h_drift()
        ),
    }
}

fn criterion6(spec: &NonlinearitySpec, gs: &GroundStateResult, scaled: &EvolutionTrace) -> Outcome {
    match invariance_audit(spec, gs.omega, scaled, gs.m_omega) {
        Ok(a) => Outcome {
            pass: a.inf_k > 0.0 && a.bounded,
            detail: format!(
                "{} samples in A_ω,+; inf K={:.4e}, inf(m-S)={:.4e}, sup H1²={:.4} <= bound {:.4}",
                a.samples, a.inf_k, a.inf_action_margin, a.sup_h1_sq, a.h1_bound
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn criterion7(spec: &NonlinearitySpec, gs: &GroundStateResult) -> Outcome {
    let t = Instant::now();
    let run = |n: usize, dt: f64| {
        let grid = Arc::new(RadialGrid::uniform(5, n, 100.0).unwrap());
        let q = discrete_ground_state(spec, gs.omega, &gs.profile.sample(&grid).unwrap().field)
            .unwrap();
        let cfg = EvolveConfig {
            dt,
            t_end: 0.5,
            sample_every: (0.05 / dt).round() as usize,
            ..Default::default()
        };
        evolve(spec, gs.omega, &q, &cfg)
    };
    let (fine, coarse) = match (run(8192, 1e-3), run(4096, 2e-3)) {
        (Ok(f), Ok(c)) => (f, c),
        (Err(e), _) | (_, Err(e)) => {
            return Outcome {
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let drift = fine.modulus_drift.iter().copied().fold(0.0, f64::max);
    let rate = fine.phase.last().unwrap() / fine.times.last().unwrap() / gs.omega;
    // both traces sample every 0.05
    let shrink = coarse
        .residual
        .iter()
        .zip(&fine.residual)
        .map(|(c, f)| c / f)
        .fold(f64::INFINITY, f64::min);
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: drift < 1e-3 && shrink >= 3.0 && (rate - 1.0).abs() < 1e-2 && secs < 300.0,
        detail: format!(
            "modulus drift={drift:.2e}, phase rate/ω={rate:.6}, min residual shrink={shrink:.2}"
        ),
    }
}

fn criterion8() -> (Outcome, String) {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = 0;
    let mut gamma_fail = Vec::new();
    let mut pairs_ok = true;
    for d in [5, 6, 7] {
        let mut gf = 0;
        for p1 in interior_p1(d, 20).unwrap() {
            let e = exotic(d, &p1).unwrap();
            checked += 1;
            failures += usize::from(!e.certificates.invariants_pass());
            gf += usize::from(!e.certificates.gamma_exceeds_diagonal);
        }
        gamma_fail.push(format!("d={d}: {gf}/20"));
        let p = default_p(d).unwrap();
        pairs_ok &= named_pairs(d, &p)
            .unwrap()
            .iter()
            .all(|(_, pair)| is_l2_admissible(d, pair));
    }
    let secs = t.elapsed().as_secs_f64();
    (
        Outcome {
            pass: failures == 0 && pairs_ok && secs < 1.0,
            detail: format!("{checked} exotic records, {failures} failing; five named pairs admissible for d=5,6,7: {pairs_ok}"),
        },
        format!("INFO γ > (d+2)(p₁-1)/2 fails for {}", gamma_fail.join(", ")),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report_line = |n: usize, name: &str, started: Instant, o: Outcome| {
        all &= o.pass;
        line(n, name, started, &o);
    };

    let t = Instant::now();
    report_line(1, "bubble identity", t, criterion1());

    let t = Instant::now();
    let mut cases = Vec::new();
    for (d, p) in [(5, 2.0), (4, 2.5)] {
        let spec = NonlinearitySpec::from_pairs(d, &[(1.0, p)]).unwrap();
        let grid = Arc::new(RadialGrid::default_variational(d).unwrap());
        let s = Instant::now();
        match shoot_ground_state(&spec, 1.0, &ShootConfig::default(), &grid) {
            Ok(gs) => cases.push((d, p, gs, s.elapsed().as_secs_f64())),
            Err(e) => {
                report_line(
                    2,
                    "threshold gap",
                    t,
                    Outcome {
                        pass: false,
                        detail: format!("d={d}: {e}"),
                    },
                );
                return ExitCode::FAILURE;
            }
        }
    }
    report_line(2, "threshold gap", t, criterion2(&cases));
    let gs5 = &cases[0].2;

    let t = Instant::now();
    report_line(3, "scaling suite", t, criterion3());

    let t = Instant::now();
    report_line(4, "Nehari consistency", t, criterion4(gs5));

    let spec = NonlinearitySpec::from_pairs(5, &[(1.0, 2.0)]).unwrap();
    let grid = Arc::new(RadialGrid::default_evolution(5).unwrap());
    let cfg = EvolveConfig {
        dt: 1e-3,
        t_end: 2.0,
        sample_every: 20,
        ..Default::default()
    };
    let t = Instant::now();
    let tiny_start = Instant::now();
    let tiny = evolve(
        &spec,
        1.0,
        &RadialField::sample_real(grid.clone(), |r| 1e-3 * (-r * r).exp()),
        &cfg,
    );
    let tiny_secs = tiny_start.elapsed().as_secs_f64();
    let scaled_start = Instant::now();
    let scaled = evolve(
        &spec,
        1.0,
        &gs5.profile.sample_scaled(&grid, 0.8).unwrap(),
        &cfg,
    );
    let scaled_secs = scaled_start.elapsed().as_secs_f64();
    match (tiny, scaled) {
        (Ok(tiny), Ok(scaled)) => {
            report_line(
                5,
                "conservation",
                t,
                criterion5(&tiny, tiny_secs, &scaled, scaled_secs),
            );
            let t = Instant::now();
            report_line(6, "flow invariance", t, criterion6(&spec, gs5, &scaled));
        }
        (Err(e), _) | (_, Err(e)) => {
            report_line(
                5,
                "conservation",
                t,
                Outcome {
                    pass: false,
                    detail: e.to_string(),
                },
            );
            report_line(
                6,
                "flow invariance",
                t,
                Outcome {
                    pass: false,
                    detail: "no trace".into(),
                },
            );
        }
    }

    let t = Instant::now();
    report_line(7, "standing wave", t, criterion7(&spec, gs5));

    let t = Instant::now();
    let (o, info) = criterion8();
    report_line(8, "exponent certificates", t, o);
    println!("{info}");

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
