//! `critnls`: command-line driver. Every subcommand writes one CSV (to `--out`
//! or stdout) and a JSON manifest (next to `--out`, at `--manifest`, or on
//! stderr). Exit status: 0 success, 2 invalid input, 3 solver nonconvergence,
//! 1 i/o failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod context;
mod error;
mod init;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_terms, RunConfig};
use crate::context::Context;
use crate::error::CliError;
use crate::init::InitialData;
use crate::output::{manifest_path_for, write_file, Manifest, Output};

#[derive(Debug, Parser)]
#[command(
    name = "critnls",
    version,
    about = "Numerics for the energy-critical NLS with subcritical perturbations"
)]
struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "CRITNLS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spatial dimension.
    #[arg(long = "d")]
    d: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    /// Perturbation terms as `mu:p,mu:p`.
    #[arg(long, value_parser = terms_arg, allow_hyphen_values = true)]
    terms: Option<Terms>,
    /// Grid size (evolution grid for `evolve`, variational grid otherwise).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest destination; defaults to `<out>.manifest.json`, or stderr.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Terms(Vec<[f64; 2]>);

fn terms_arg(s: &str) -> Result<Terms, String> {
    parse_terms(s).map(Terms)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the nonlinearity against the structural assumptions.
    ValidateNl(Common),
    /// Mass, Hamiltonian, action, Nehari functional of a field, as one row.
    Functionals {
        #[command(flatten)]
        common: Common,
        /// Initial data, e.g. `gaussian:1:1`, `scaled-q:0.8`, `file:u.csv`.
        #[arg(long)]
        init: Option<String>,
    },
    /// K, S and I along the scaling T_λu.
    ScanLambda {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Shooting ground state(s) and the threshold gap.
    GroundState {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frequencies; defaults to the configured omega.
        #[arg(long, value_delimiter = ',')]
        omegas: Vec<f64>,
        /// Dump Q (first frequency) as r,re,im CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Nehari upper bounds for m_ω over trial families.
    BoundSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.5,1,2,5,10")]
        widths: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.5,0.7,0.85,1,1.2,1.5,2"
        )]
        scales: Vec<f64>,
        /// Number of seeded random Gaussian mixtures.
        #[arg(long, default_value_t = 20)]
        random: usize,
    },
    /// Bubble norms and the sharp Sobolev constant.
    Sigma(Common),
    /// Crank–Nicolson evolution; writes the diagnostic trace.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        sample_every: Option<usize>,
        /// Check that every sample stays in A_ω,+ (needs the ground state).
        #[arg(long)]
        audit: bool,
    },
    /// Membership of a field in A_ω,+ and A₀.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        init: Option<String>,
        /// Threshold to compare with; computed by shooting when absent.
        #[arg(long)]
        m_omega: Option<f64>,
    },
    /// Exotic Strichartz exponents for (d, p1).
    Exponents {
        #[command(flatten)]
        common: Common,
        /// Exact rational, e.g. `2`, `9/4`, `2.25`; defaults to the midpoint of the range.
        #[arg(long)]
        p1: Option<String>,
    },
    /// The five named Strichartz pairs with admissibility verdicts.
    Pairs {
        #[command(flatten)]
        common: Common,
        /// Exponent of the perturbative pair; defaults to the midpoint of the range.
        #[arg(long)]
        p: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ValidateNl(_) => "validate-nl",
            Command::Functionals { .. } => "functionals",
            Command::ScanLambda { .. } => "scan-lambda",
            Command::GroundState { .. } => "ground-state",
            Command::BoundSweep { .. } => "bound-sweep",
            Command::Sigma(_) => "sigma",
            Command::Evolve { .. } => "evolve",
            Command::Classify { .. } => "classify",
            Command::Exponents { .. } => "exponents",
            Command::Pairs { .. } => "pairs",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::ValidateNl(c) | Command::Sigma(c) => c,
            Command::Functionals { common, .. }
            | Command::ScanLambda { common, .. }
            | Command::GroundState { common, .. }
            | Command::BoundSweep { common, .. }
            | Command::Evolve { common, .. }
            | Command::Classify { common, .. }
            | Command::Exponents { common, .. }
            | Command::Pairs { common, .. } => common,
        }
    }

    fn needs_spec(&self) -> bool {
        !matches!(
            self,
            Command::Sigma(_) | Command::Exponents { .. } | Command::Pairs { .. }
        )
    }
}

fn load_config(cmd: &Command) -> Result<RunConfig, CliError> {
    let c = cmd.common();
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = c.d {
        cfg.dimension = d;
    }
    if let Some(w) = c.omega {
        cfg.omega = w;
    }
    if let Some(t) = &c.terms {
        cfg.terms = t.0.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Command::Evolve {
        init,
        dt,
        t_end,
        sample_every,
        ..
    } = cmd
    {
        if let Some(n) = c.n {
            cfg.evolution.n = n;
        }
        if let Some(r) = c.r_max {
            cfg.evolution.r_max = r;
        }
        if let Some(i) = init {
            cfg.evolution.init = i.clone();
        }
        cfg.evolution.dt = dt.unwrap_or(cfg.evolution.dt);
        cfg.evolution.t_end = t_end.unwrap_or(cfg.evolution.t_end);
        cfg.evolution.sample_every = sample_every.unwrap_or(cfg.evolution.sample_every);
    } else {
        if let Some(n) = c.n {
            cfg.grid.n = n;
        }
        if let Some(r) = c.r_max {
            cfg.grid.r_max = r;
        }
    }
    Ok(cfg)
}

fn initial(cfg: &RunConfig, flag: &Option<String>) -> Result<InitialData, CliError> {
    flag.as_deref().unwrap_or(&cfg.evolution.init).parse()
}

fn dispatch(cmd: &Command, ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.cfg;
    match cmd {
        Command::ValidateNl(_) => commands::validate_nl(ctx),
        Command::Functionals { init, .. } => commands::functionals(ctx, &initial(cfg, init)?),
        Command::ScanLambda {
            init,
            lambda_min,
            lambda_max,
            points,
            ..
        } => commands::scan_lambda(
            ctx,
            &initial(cfg, init)?,
            &commands::ScanArgs {
                lambda_min: *lambda_min,
                lambda_max: *lambda_max,
                points: *points,
            },
        ),
        Command::GroundState {
            omegas, profile, ..
        } => {
            let omegas = if omegas.is_empty() {
                vec![cfg.omega]
            } else {
                omegas.clone()
            };
            commands::ground_state(ctx, &omegas, profile.as_ref())
        }
        Command::BoundSweep {
            widths,
            scales,
            random,
            ..
        } => commands::bound_sweep(
            ctx,
            &commands::SweepArgs {
                widths: widths.clone(),
                scales: scales.clone(),
                random: *random,
            },
        ),
        Command::Sigma(_) => commands::sigma(ctx),
        Command::Evolve { audit, .. } => {
            commands::evolve_cmd(ctx, &cfg.evolution.init.parse()?, *audit)
        }
        Command::Classify { init, m_omega, .. } => {
            commands::classify_cmd(ctx, &initial(cfg, init)?, *m_omega)
        }
        Command::Exponents { p1, .. } => commands::exponents(ctx, p1.as_deref()),
        Command::Pairs { p, .. } => commands::pairs(ctx, p.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let cmd = &cli.command;
    let common = cmd.common();

    let cfg = match load_config(cmd) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let out_path = common.out.as_ref().map(|p| cfg.resolve(p));
    let manifest_path = common
        .manifest
        .as_ref()
        .map(|p| cfg.resolve(p))
        .or_else(|| out_path.as_deref().map(manifest_path_for));

    let result = Context::new(cfg.clone(), cmd.needs_spec()).and_then(|ctx| dispatch(cmd, &ctx));
    let (summary, mut outputs, mut error) = match result {
        Ok(out) => {
            let mut outputs = out.files;
            let written = match &out_path {
                Some(p) => write_file(p, &out.csv).map(|_| outputs.insert(0, p.clone())),
                None => std::io::stdout()
                    .write_all(&out.csv)
                    .map_err(CliError::from),
            };
            (out.summary, outputs, written.err().or(out.failure))
        }
        Err(e) => (serde_json::Value::Null, Vec::new(), Some(e)),
    };
    let code = error.as_ref().map_or(0, CliError::exit_code);
    let manifest = Manifest {
        command: cmd.name(),
        argv: std::env::args().collect(),
        seed: cfg.seed,
        config: &cfg,
        versions: Manifest::versions(),
        threads: rayon::current_num_threads(),
        started_unix,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: std::mem::take(&mut outputs),
        exit_code: code,
        error: error.as_ref().map(ToString::to_string),
        summary,
    };
    let json = serde_json::to_string_pretty(&manifest).unwrap_or_default();
    match &manifest_path {
        Some(p) => {
            if let Err(e) = write_file(p, json.as_bytes()) {
                error.get_or_insert(e);
            }
        }
        None => eprintln!("{json}"),
    }
    match error {
        Some(e) => fail(&e),
        None => ExitCode::SUCCESS,
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}
