//! `gsqg-vstates`: equilibria, V-state continuation, rotation checks and
//! parameter sweeps for nested-polygon gSQG vortex patches.
//!
//! Exit codes: 0 ok, 2 configuration or degeneracy, 3 solver failure,
//! 4 verification failure, 5 missing prerequisite.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gsqg::config::{RunConfig, SweepAxis};
use gsqg::dynamics::{evolve, rotation_fit, stable_dt, CurveEnsemble, FitMode};
use gsqg::equilibria::{nondegeneracy_report, solve_equilibrium, ConfigParams};
use gsqg::io::{
    boundary_csv, eps_label, fmt17, trajectory_csv, vstate_from_json, vstate_to_json, write_json,
};
use gsqg::solver::{
    asymptotic_report, continuation, convexity_sweep, geometric_ladder, solve_vstate,
};
use gsqg::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "gsqg-vstates",
    version,
    about = "Nested-polygon vortex patches for the generalized SQG equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (key = value file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest epsilon of the continuation ladder.
    #[arg(long)]
    eps_max: Option<f64>,
    /// Number of ladder rungs.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Point-vortex equilibrium and non-degeneracy diagnostics.
    Equilibrium(Common),
    /// Continuation of finite-size V-states along an epsilon ladder.
    Solve(Common),
    /// Evolve the largest solved state and check its rotation rate.
    Verify(Common),
    /// Equilibrium (and optionally a solve) over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary (alpha, m, vartheta, b0, b1, b2, d1, d2, gamma0, gamma1).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated grid values.
        #[arg(long)]
        grid: Option<String>,
    },
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } | Error::Numerical(_) => 3,
            Error::Io(_) => 5,
            _ => 2,
        };
        Fail(code, e.to_string())
    }
}

type CmdResult = Result<(), Fail>;

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Fail> {
    let mut cfg = RunConfig::load(&common.config).map_err(|e| match e {
        Error::Io(io) => Fail(
            2,
            format!("cannot read config {}: {io}", common.config.display()),
        ),
        other => Fail::from(other),
    })?;
    if let Some(v) = common.eps_max {
        if !(v.is_finite() && v > 0.0) {
            return Err(Fail(2, format!("--eps-max must be positive, got {v}")));
        }
        cfg.eps_max = v;
    }
    if let Some(k) = common.steps {
        if k == 0 {
            return Err(Fail(2, "--steps must be positive".into()));
        }
        cfg.solve.continuation_steps = k;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&out)
        .map_err(|e| Fail(5, format!("cannot create {}: {e}", out.display())))?;
    Ok((cfg, out))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Fail(5, format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct EquilibriumDoc {
    omega_star: f64,
    gamma2_star: f64,
    s_alpha: f64,
    t_plus: f64,
    t_minus: f64,
    det: f64,
    nondeg_lhs: f64,
    residuals: [f64; 2],
    det_nonzero: bool,
    nondeg_nonzero: bool,
}

fn cmd_equilibrium(common: &Common) -> CmdResult {
    let (cfg, out) = load(common)?;
    let eq = solve_equilibrium(&cfg.params)?;
    let rep = nondegeneracy_report(&cfg.params, &eq);
    let doc = EquilibriumDoc {
        omega_star: eq.omega_star,
        gamma2_star: eq.gamma2_star,
        s_alpha: eq.s_alpha,
        t_plus: eq.t_plus,
        t_minus: eq.t_minus,
        det: eq.det_jacobian,
        nondeg_lhs: eq.nondeg_lhs,
        residuals: eq.residuals,
        det_nonzero: rep.det_nonzero,
        nondeg_nonzero: rep.nondeg_nonzero,
    };
    write_json(&out.join("equilibrium.json"), &doc)?;
    println!(
        "omega* = {}  gamma2* = {}",
        fmt17(eq.omega_star),
        fmt17(eq.gamma2_star)
    );
    println!(
        "det = {}  nondeg_lhs = {}",
        fmt17(eq.det_jacobian),
        fmt17(eq.nondeg_lhs)
    );
    if !rep.nondeg_nonzero {
        return Err(Fail(
            2,
            "non-degeneracy condition fails: gamma2* vanishes".into(),
        ));
    }
    if !rep.det_nonzero {
        return Err(Fail(
            2,
            "degenerate configuration: the lambda-Jacobian determinant vanishes".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveRecord {
    epsilon: f64,
    iterations: usize,
    residual: f64,
    omega: f64,
    gamma2: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    tol: f64,
    states: Vec<SolveRecord>,
    failed_at: Option<f64>,
    failure: Option<String>,
}

fn cmd_solve(common: &Common) -> CmdResult {
    let (cfg, out) = load(common)?;
    let targets = match &cfg.targets {
        Some(t) if common.eps_max.is_none() && common.steps.is_none() => t.clone(),
        _ => geometric_ladder(cfg.eps_max, cfg.solve.continuation_steps),
    };
    let vdir = out.join("vstates");
    fs::create_dir_all(&vdir)
        .map_err(|e| Fail(5, format!("cannot create {}: {e}", vdir.display())))?;
    let run = continuation(&targets, &cfg.params, &cfg.solve)?;
    for s in &run.states {
        let label = eps_label(s.state.epsilon);
        write(
            &vdir.join(format!("eps_{label}.json")),
            &vstate_to_json(&s.state, &cfg.params)?,
        )?;
        if s.state.epsilon != 0.0 {
            write(
                &out.join(format!("boundary_eps_{label}.csv")),
                &boundary_csv(&s.state, &cfg.params, cfg.dynamics.nodes)?,
            )?;
        }
        println!(
            "eps = {:<12} iterations = {:2}  residual = {:.3e}  omega = {}",
            label,
            s.iterations,
            s.residual,
            fmt17(s.state.lambda.omega)
        );
    }
    let family: Vec<_> = run.states.iter().map(|s| s.state.clone()).collect();
    write_json(
        &out.join("convexity.json"),
        &convexity_sweep(&family, &cfg.params, 4 * cfg.dynamics.nodes.max(64))?,
    )?;
    match asymptotic_report(&family, &cfg.params) {
        Ok(r) => write_json(&out.join("asymptotics.json"), &r)?,
        Err(Error::InsufficientData(m)) => println!("asymptotics skipped: {m}"),
        Err(e) => return Err(e.into()),
    }
    let summary = SolveSummary {
        tol: cfg.solve.tol,
        states: run
            .states
            .iter()
            .map(|s| SolveRecord {
                epsilon: s.state.epsilon,
                iterations: s.iterations,
                residual: s.residual,
                omega: s.state.lambda.omega,
                gamma2: s.state.lambda.gamma2,
            })
            .collect(),
        failed_at: run.failure.as_ref().map(|f| f.0),
        failure: run.failure.as_ref().map(|f| f.1.to_string()),
    };
    write_json(&out.join("solve.json"), &summary)?;
    if let Some((eps, e)) = run.failure {
        let code = Fail::from(e);
        return Err(Fail(
            code.0.max(3),
            format!("continuation stopped at eps = {eps}: {}", code.1),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct RotationDoc {
    epsilon: f64,
    omega_fit: f64,
    omega_solver: f64,
    rel_error: f64,
    deviation: f64,
    deviation_bound: f64,
    area_drift: f64,
    impulse_drift: f64,
    t_final: f64,
    dt: f64,
    steps: usize,
    nodes: usize,
}

fn largest_state(dir: &Path) -> Result<Option<(f64, PathBuf)>, Fail> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(None);
    };
    let mut best: Option<(f64, PathBuf)> = None;
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path)
                .map_err(|e| Fail(5, format!("cannot read {}: {e}", path.display())))?;
            let stored =
                vstate_from_json(&text).map_err(|e| Fail(5, format!("{}: {e}", path.display())))?;
            let eps = stored.state.epsilon.abs();
            if eps > 0.0 && best.as_ref().map_or(true, |b| eps > b.0) {
                best = Some((eps, path));
            }
        }
    }
    Ok(best)
}

fn cmd_verify(common: &Common) -> CmdResult {
    let (cfg, out) = load(common)?;
    let Some((_, path)) = largest_state(&out.join("vstates"))? else {
        return Err(Fail(
            5,
            format!(
                "no solved states with epsilon != 0 under {}; run solve first",
                out.display()
            ),
        ));
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Fail(5, format!("cannot read {}: {e}", path.display())))?;
    let stored = vstate_from_json(&text)?;
    if stored.b != cfg.params.b || stored.state.shapes[0].fold != cfg.params.m {
        return Err(Fail(
            2,
            format!(
                "{} was solved with different parameters; re-run solve",
                path.display()
            ),
        ));
    }
    let state = stored.state;
    let omega = state.lambda.omega;
    let alpha = cfg.params.alpha;
    let ensemble = CurveEnsemble::from_vstate(&state, &cfg.params, cfg.dynamics.nodes)?;
    let t_final = cfg.dynamics.t_fraction_of_period * 2.0 * std::f64::consts::PI / omega.abs();
    let dt = if cfg.dynamics.dt > 0.0 {
        cfg.dynamics.dt
    } else {
        stable_dt(&ensemble, alpha)?
    };
    let run =
        evolve(&ensemble, alpha, t_final, dt, cfg.dynamics.velocity).map_err(|e| match e {
            Error::TimeStep(m) => Fail(4, format!("time step too large: {m}")),
            Error::Geometry(m) => Fail(4, format!("patches collided: {m}")),
            other => Fail::from(other),
        })?;
    let fit = rotation_fit(&ensemble, &run.ensemble, t_final, FitMode::ClosestPoint)?;
    let reference = omega * cfg.omega_scale;
    let rel_error = (fit.omega_fit - reference).abs() / reference.abs();
    let b_min = cfg.params.b.iter().copied().fold(f64::INFINITY, f64::min);
    let doc = RotationDoc {
        epsilon: state.epsilon,
        omega_fit: fit.omega_fit,
        omega_solver: reference,
        rel_error,
        deviation: fit.deviation,
        deviation_bound: 1e-3 * state.epsilon.abs() * b_min,
        area_drift: run.area_drift(),
        impulse_drift: run.impulse_drift(),
        t_final,
        dt: run.dt,
        steps: run.steps,
        nodes: cfg.dynamics.nodes,
    };
    write_json(&out.join("rotation.json"), &doc)?;
    write(
        &out.join("trajectory.csv"),
        &trajectory_csv(&[(0.0, &ensemble), (t_final, &run.ensemble)]),
    )?;
    println!(
        "eps = {}  omega_fit = {}  omega_solver = {}  rel_error = {:.3e}  deviation = {:.3e}  area_drift = {:.3e}",
        eps_label(state.epsilon),
        fmt17(fit.omega_fit),
        fmt17(reference),
        rel_error,
        fit.deviation,
        doc.area_drift
    );
    if rel_error > 1e-3 {
        return Err(Fail(
            4,
            format!("rotation rate mismatch: relative error {rel_error:.3e} > 1e-3"),
        ));
    }
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Fail> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Fail(2, format!("bad grid value '{s}'")))
        })
        .collect()
}

fn sweep_row(axis: SweepAxis, base: &ConfigParams, value: f64, cfg: &RunConfig) -> String {
    let params = match axis.apply(base, value) {
        Ok(p) => p,
        Err(e) => {
            return format!(
                "{},,,,,invalid,,,\"{}\"",
                fmt17(value),
                e.to_string().replace('"', "'")
            )
        }
    };
    let eq = match solve_equilibrium(&params) {
        Ok(eq) => eq,
        Err(e) => {
            let status = if matches!(e, Error::Degenerate(_)) {
                "degenerate"
            } else {
                "invalid"
            };
            return format!(
                "{},,,,,{status},,,\"{}\"",
                fmt17(value),
                e.to_string().replace('"', "'")
            );
        }
    };
    let rep = nondegeneracy_report(&params, &eq);
    let status = if !rep.det_nonzero || !rep.nondeg_nonzero {
        "degenerate"
    } else {
        "ok"
    };
    let mut row = format!(
        "{},{},{},{},{},{status}",
        fmt17(value),
        fmt17(eq.omega_star),
        fmt17(eq.gamma2_star),
        fmt17(rep.det),
        fmt17(rep.nondeg_lhs)
    );
    if cfg.sweep.solve && status == "ok" {
        match solve_vstate(cfg.eps_max, &params, &cfg.solve, None) {
            Ok(s) => {
                let _ = write!(row, ",{},{},", s.iterations, fmt17(s.residual));
            }
            Err(e) => {
                let _ = write!(row, ",,,\"{}\"", e.to_string().replace('"', "'"));
            }
        }
    } else {
        row.push_str(",,,");
    }
    row
}

fn cmd_sweep(common: &Common, axis: Option<&str>, grid: Option<&str>) -> CmdResult {
    let (cfg, out) = load(common)?;
    let axis = match axis {
        Some(a) => a.parse::<SweepAxis>()?,
        None => cfg
            .sweep
            .axis
            .ok_or_else(|| Fail(2, "no sweep axis given (--axis or sweep.axis)".into()))?,
    };
    let grid = match grid {
        Some(g) => parse_grid(g)?,
        None => cfg.sweep.grid.clone(),
    };
    if grid.is_empty() {
        return Err(Fail(2, "empty sweep grid".into()));
    }
    let mut csv = format!(
        "{},omega_star,gamma2_star,det,nondeg_lhs,status,iterations,residual,message\n",
        axis.name()
    );
    for v in &grid {
        csv.push_str(&sweep_row(axis, &cfg.params, *v, &cfg));
        csv.push('\n');
    }
    write(&out.join("sweep.csv"), &csv)?;
    println!(
        "{} rows written to {}",
        grid.len(),
        out.join("sweep.csv").display()
    );
    Ok(())
}

fn init_threads() -> CmdResult {
    let Ok(v) = std::env::var("GSQG_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        Fail(
            2,
            format!("GSQG_THREADS must be a non-negative integer, got '{v}'"),
        )
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Fail(2, format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Equilibrium(c) => cmd_equilibrium(c),
        Command::Solve(c) => cmd_solve(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Sweep { common, axis, grid } => {
            cmd_sweep(common, axis.as_deref(), grid.as_deref())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
