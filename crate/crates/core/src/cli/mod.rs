//! Batch front-end behind the `varinf` binary.
//!
//! ```text
//! varinf solve       --config problems/affine.json --out out/affine
//! varinf triple      --config problems/sandwich.json --eps 0.1
//! varinf sandwich    --config problems/sandwich.json --eps 0.4,0.2,0.1,0.05
//! varinf harnack     --config problems/harnack.json
//! varinf convergence --out out/conv
//! varinf verify      --seed 7 --out out/verify
//! ```
//!
//! Exit status: 0 success, 2 usage or configuration error, 3 numerical
//! failure (non-convergence, violated ordering, failed property). Reports
//! are written before a numerical failure is signalled.

mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    convergence_order, fit_harnack_family, harnack_check, sandwich_experiment, ConvergenceSetup, FullOperator,
    HarnackOptions,
};
use crate::error::Error;
use crate::exponent::ExponentFamily;
use crate::grid::{sup_norm, GridFunction};
use crate::io::{load_config, write_json, write_pgm, write_records, write_solution_csv, BoundarySpec, ExponentSpec, LoadedConfig, SolverKind};
use crate::operator::{residual_field, LogMagnitude, Probe, SchemeOptions, SmoothProbe, Stencil};
use crate::solvers::{solve_direct, solve_triple, solve_variational_limit, Problem, SolveReport, SourceSign};
use crate::suite;

pub use verify::{verify_suite, verify_suite_with, CheckResult, VerifyOptions, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "varinf", version, about = "Variable-exponent infinity-Laplacian solver and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Epsilon (solve, triple) or comma-separated epsilon list (sandwich).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    eps: Option<Vec<f64>>,
    /// Cap on k * p_max for the doubling k schedule.
    #[arg(long, global = true, value_name = "N")]
    kmax: Option<f64>,
    /// Residual tolerance; the variational step tolerance follows at 1e-3 of it.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Log-term discretization; `monotone` also selects the axis stencil.
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, global = true, value_enum)]
    stencil: Option<StencilArg>,
    #[arg(long, global = true, value_enum)]
    solver: Option<SolverArg>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve the Dirichlet problem.
    Solve,
    /// Lower, plain and upper solutions for one epsilon (variational).
    Triple,
    /// Lower/upper solutions over an epsilon list.
    Sandwich,
    /// Harnack ratios and multiplicative constants on balls.
    Harnack,
    /// Operator consistency orders on smooth probes.
    Convergence,
    /// Property suite (inequality fuzz, g-function, operator, comparison,
    /// Caccioppoli, energy gradient).
    Verify {
        /// Cases in the inequality fuzz.
        #[arg(long, default_value_t = 100_000)]
        cases: usize,
        /// Boundary-data pairs in the comparison check.
        #[arg(long, default_value_t = 5)]
        pairs: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Centered,
    UpwindLog,
    Monotone,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StencilArg {
    Axis4,
    Directional,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Variational,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged(_) | Error::Overflow(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult = std::result::Result<i32, CliError>;

/// Parses `args` (program name first) and runs the command. Returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_operator(args, &crate::operator::full_operator_discrete_with)
}

/// [`run`] with the discrete operator checked by `verify` replaced by
/// `full_op` (fault injection).
pub fn run_with_operator<I, T>(args: I, full_op: &FullOperator) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli, full_op) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli, full_op: &FullOperator) -> CliResult {
    fs::create_dir_all(&cli.out).map_err(|e| usage(format!("cannot create {}: {e}", cli.out.display())))?;
    match cli.command {
        Command::Solve => cmd_solve(cli),
        Command::Triple => cmd_triple(cli),
        Command::Sandwich => cmd_sandwich(cli),
        Command::Harnack => cmd_harnack(cli),
        Command::Convergence => cmd_convergence(cli),
        Command::Verify { cases, pairs } => cmd_verify(cli, cases, pairs, full_op),
    }
}

struct Loaded {
    config: LoadedConfig,
    problem: Problem,
    solver: SolverKind,
}

fn scheme_with_overrides(cli: &Cli, base: SchemeOptions) -> SchemeOptions {
    let mut s = base;
    match cli.scheme {
        Some(SchemeArg::Centered) => s.log_magnitude = LogMagnitude::Centered,
        Some(SchemeArg::UpwindLog) => s.log_magnitude = LogMagnitude::UpwindLog,
        Some(SchemeArg::Monotone) => {
            s.log_magnitude = LogMagnitude::Monotone;
            s.stencil = Stencil::Axis4;
        }
        None => {}
    }
    match cli.stencil {
        Some(StencilArg::Axis4) => s.stencil = Stencil::Axis4,
        Some(StencilArg::Directional) => s.stencil = Stencil::Directional,
        None => {}
    }
    s
}

fn load(cli: &Cli, single_eps: bool) -> std::result::Result<Loaded, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| usage("--config is required for this command"))?;
    let mut config = load_config(path).map_err(|e| usage(format!("cannot load {}: {e}", path.display())))?;
    let c = &mut config.config;
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(usage(format!("--tol {tol} must be positive")));
        }
        c.tolerances.residual_tol = Some(tol);
        c.tolerances.step_tol = Some(1e-3 * tol);
    }
    if let Some(kmax) = cli.kmax {
        c.kp_max = Some(kmax);
        c.k_schedule = None;
    }
    if single_eps {
        if let Some(eps) = &cli.eps {
            if eps.len() != 1 {
                return Err(usage("this command takes a single --eps value"));
            }
            c.epsilon = eps[0];
        }
    }
    c.scheme = scheme_with_overrides(cli, c.scheme);
    if let Some(s) = cli.solver {
        c.solver = match s {
            SolverArg::Direct => SolverKind::Direct,
            SolverArg::Variational => SolverKind::Variational,
        };
    }
    let problem = c.build_problem(&config.base_dir)?;
    let solver = c.solver;
    Ok(Loaded {
        config,
        problem,
        solver,
    })
}

const ZERO_GRADIENT_CONVENTION: &str =
    "below the guard |grad u|: axis stencil max + min of neighbors, log term 0";

#[derive(Serialize)]
struct Provenance<'a> {
    command: &'a str,
    version: &'static str,
    config: Option<String>,
    config_hash: Option<String>,
    seed: u64,
    scheme: SchemeOptions,
    /// How the operator is defined where the gradient vanishes; a scheme
    /// choice, not part of the equation.
    zero_gradient_convention: &'static str,
    tolerances: Option<crate::solvers::Tolerances>,
    k_schedule: Option<Vec<f64>>,
    epsilon: Option<f64>,
    solver: Option<SolverKind>,
}

fn provenance<'a>(cli: &Cli, command: &'a str, loaded: Option<&Loaded>, scheme: SchemeOptions) -> Provenance<'a> {
    Provenance {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cli.config.as_ref().map(|p| p.display().to_string()),
        config_hash: loaded.map(|l| l.config.hash.clone()),
        seed: cli.seed,
        scheme,
        zero_gradient_convention: ZERO_GRADIENT_CONVENTION,
        tolerances: loaded.map(|l| l.problem.tolerances),
        k_schedule: loaded.map(|l| l.problem.k_schedule.clone()),
        epsilon: loaded.map(|l| l.problem.epsilon),
        solver: loaded.map(|l| l.solver),
    }
}

fn write_report(dir: &Path, prov: &Provenance, result: Value) -> std::result::Result<(), CliError> {
    write_json(&dir.join("report.json"), &json!({ "provenance": prov, "result": result }))?;
    Ok(())
}

/// Converged solution or the last iterate with exit status 3.
fn solve(loaded: &Loaded) -> std::result::Result<(GridFunction, SolveReport, i32), CliError> {
    let p = &loaded.problem;
    let res = match loaded.solver {
        SolverKind::Direct => solve_direct(p),
        SolverKind::Variational => solve_variational_limit(p, SourceSign::Equation),
    };
    match res {
        Ok((u, r)) => Ok((u, r, EXIT_OK)),
        Err(Error::NotConverged(b)) => {
            let b = *b;
            eprintln!("warning: {}", b.report.summary());
            Ok((b.solution, b.report, EXIT_NUMERICAL))
        }
        Err(e) => Err(e.into()),
    }
}

fn probe_of(loaded: &Loaded) -> Option<Probe> {
    match &loaded.config.config.boundary {
        BoundarySpec::Probe(p) => Some(p.clone()),
        _ => None,
    }
}

/// Sup over active nodes of `|u - probe|`.
fn probe_error(u: &GridFunction, probe: &Probe) -> f64 {
    let d = u.domain();
    (0..d.len())
        .filter(|&i| d.is_active(i))
        .fold(0.0, |m, i| m.max((u.get(i) - probe.value(d.position(i))).abs()))
}

fn cmd_solve(cli: &Cli) -> CliResult {
    let loaded = load(cli, true)?;
    let (u, report, code) = solve(&loaded)?;
    let p = &loaded.problem;
    write_solution_csv(&cli.out.join("solution.csv"), &u)?;
    write_pgm(&cli.out.join("solution.pgm"), &u)?;
    let residual = sup_norm(&residual_field(&u, &p.exponent, &p.scheme));
    let probe_err = probe_of(&loaded).map(|pr| probe_error(&u, &pr));
    println!("{}", report.summary());
    if let Some(e) = probe_err {
        println!("sup error against the boundary expression: {e:.3e}");
    }
    let prov = provenance(cli, "solve", Some(&loaded), p.scheme);
    write_report(
        &cli.out,
        &prov,
        json!({ "solve": report, "residual_sup": residual, "probe_error": probe_err }),
    )?;
    Ok(code)
}

/// `max (a - b)^+` over interior nodes.
fn excess(a: &GridFunction, b: &GridFunction) -> f64 {
    a.domain()
        .interior()
        .iter()
        .fold(0.0, |m, &i| m.max(a.get(i) - b.get(i)))
}

fn cmd_triple(cli: &Cli) -> CliResult {
    let loaded = load(cli, true)?;
    let p = &loaded.problem;
    let prov = provenance(cli, "triple", Some(&loaded), p.scheme);
    let t = match solve_triple(p) {
        Ok(t) => t,
        Err(e @ Error::NotConverged(_)) => {
            write_report(&cli.out, &prov, json!({ "error": e.to_string() }))?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_solution_csv(&cli.out.join("lower.csv"), &t.lower)?;
    write_solution_csv(&cli.out.join("solution.csv"), &t.equation)?;
    write_solution_csv(&cli.out.join("upper.csv"), &t.upper)?;
    write_pgm(&cli.out.join("solution.pgm"), &t.equation)?;
    let tol = 10.0 * p.tolerances.residual_tol;
    let lower_violation = excess(&t.lower, &t.equation);
    let upper_violation = excess(&t.equation, &t.upper);
    let diff = excess(&t.upper, &t.lower);
    let ordered = lower_violation <= tol && upper_violation <= tol;
    println!(
        "eps = {}: sup(u+ - u-) = {diff:.3e}, ordering violations {lower_violation:.1e} / {upper_violation:.1e}",
        p.epsilon
    );
    write_report(
        &cli.out,
        &prov,
        json!({
            "diff_sup": diff,
            "lower_violation": lower_violation,
            "upper_violation": upper_violation,
            "ordering_ok": ordered,
            "lower": t.lower_report,
            "equation": t.equation_report,
            "upper": t.upper_report,
        }),
    )?;
    Ok(if ordered { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_sandwich(cli: &Cli) -> CliResult {
    let loaded = load(cli, false)?;
    let eps = cli
        .eps
        .clone()
        .or_else(|| loaded.config.config.epsilons.clone())
        .unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]);
    let report = sandwich_experiment(&loaded.problem, &eps)?;
    write_records(&cli.out.join("sandwich.csv"), &report.rows)?;
    for r in &report.rows {
        match (&r.error, r.diff_sup) {
            (Some(e), _) => println!("eps = {}: failed: {e}", r.epsilon),
            (None, Some(d)) => println!("eps = {}: sup(u+ - u-) = {d:.4e}", r.epsilon),
            (None, None) => {}
        }
    }
    match report.kappa {
        Some(k) => println!("fitted kappa = {k:.3}"),
        None => println!("kappa not fitted (fewer than two usable rows)"),
    }
    let prov = provenance(cli, "sandwich", Some(&loaded), loaded.problem.scheme);
    let failed = !report.ordering_ok || report.rows.iter().any(|r| r.error.is_some());
    write_report(&cli.out, &prov, serde_json::to_value(&report).map_err(Error::from)?)?;
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

fn cmd_harnack(cli: &Cli) -> CliResult {
    let loaded = load(cli, true)?;
    let (u, solve_report, mut code) = solve(&loaded)?;
    write_solution_csv(&cli.out.join("solution.csv"), &u)?;
    let d = &loaded.problem.domain;
    let spec = loaded.config.config.harnack.clone().unwrap_or_default();
    let (lo, hi) = d.bounding_box();
    let extent = (hi[0] - lo[0]).min(hi[1] - lo[1]);
    let center = spec.center.unwrap_or_else(|| d.center());
    let radii = spec
        .radii
        .unwrap_or_else(|| vec![0.1 * extent, 0.15 * extent, 0.2 * extent]);
    let mut opts = HarnackOptions::default();
    if let Some(a) = spec.alpha {
        opts.alpha = a;
    }
    let reports = radii
        .iter()
        .map(|&r| harnack_check(&u, center, r, &opts))
        .collect::<crate::Result<Vec<_>>>()?;
    let fit = fit_harnack_family(&reports, &opts);
    let rows: Vec<HarnackRow> = reports
        .iter()
        .map(|r| HarnackRow {
            radius: r.radius,
            sup_r: r.sup_r,
            inf_r: r.inf_r,
            ratio: r.ratio,
            sup_2r: r.sup_2r,
            max_log_slope: r.max_log_slope,
            c1: r.c1,
            c2: r.c2,
            feasible: r.feasible,
            family_bound: fit.bound(r.radius, r.sup_2r),
        })
        .collect();
    write_records(&cli.out.join("harnack.csv"), &rows)?;
    for r in &reports {
        println!(
            "R = {}: ratio {:.4}, feasible {} (C1 {:?}, C2 {:?})",
            r.radius, r.ratio, r.feasible, r.c1, r.c2
        );
    }
    if !(fit.bounded && reports.iter().all(|r| r.feasible)) {
        code = EXIT_NUMERICAL;
    }
    let prov = provenance(cli, "harnack", Some(&loaded), loaded.problem.scheme);
    write_report(
        &cli.out,
        &prov,
        json!({ "solve": solve_report, "balls": reports, "family_fit": fit }),
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct HarnackRow {
    radius: f64,
    sup_r: f64,
    inf_r: f64,
    ratio: f64,
    sup_2r: f64,
    max_log_slope: f64,
    c1: Option<f64>,
    c2: Option<f64>,
    feasible: bool,
    family_bound: f64,
}

#[derive(Serialize)]
struct ConvergenceRow {
    probe: String,
    h: f64,
    normalized_error: f64,
    full_error: f64,
}

fn cmd_convergence(cli: &Cli) -> CliResult {
    let family = match &cli.config {
        None => suite::bump_exponent(),
        Some(path) => {
            let c = load_config(path).map_err(|e| usage(format!("cannot load {}: {e}", path.display())))?;
            match c.config.exponent {
                ExponentSpec::Constant { value } => ExponentFamily::Constant { value },
                ExponentSpec::Affine { a, b } => ExponentFamily::Affine { a, b },
                ExponentSpec::Gaussian {
                    base,
                    amplitude,
                    center,
                    width,
                } => ExponentFamily::Gaussian {
                    base,
                    amplitude,
                    center,
                    width,
                },
                _ => return Err(usage("convergence needs a closed-form exponent family")),
            }
        }
    };
    let scheme = scheme_with_overrides(cli, SchemeOptions::default());
    let setup = ConvergenceSetup {
        origin: [0.0, 0.0],
        extent: 1.0,
        points: vec![[0.5, 0.5], [0.375, 0.625], [0.625, 0.25]],
        scheme,
    };
    let h = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let probes = [
        ("trig", Probe::Trig),
        ("exponential", Probe::Exponential { a: [0.8, 0.5] }),
        ("cone", Probe::Cone {
            vertex: [-0.5, -0.5],
            scale: 1.0,
        }),
    ];
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (name, probe) in probes {
        let r = convergence_order(&probe, &family, &h, &setup)?;
        for i in 0..r.h.len() {
            rows.push(ConvergenceRow {
                probe: name.to_string(),
                h: r.h[i],
                normalized_error: r.normalized_errors[i],
                full_error: r.full_errors[i],
            });
        }
        println!(
            "{name}: normalized order {:.3}, full order {:.3}",
            r.normalized_order.value(),
            r.full_order.value()
        );
        summary.push(json!({ "probe": name, "exponent": family, "report": r }));
    }
    write_records(&cli.out.join("convergence.csv"), &rows)?;
    let prov = provenance(cli, "convergence", None, scheme);
    write_report(&cli.out, &prov, Value::Array(summary))?;
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, cases: usize, pairs: usize, full_op: &FullOperator) -> CliResult {
    let opts = VerifyOptions {
        seed: cli.seed,
        fuzz_cases: cases,
        comparison_pairs: pairs,
        scheme: scheme_with_overrides(cli, SchemeOptions::default()),
        ..VerifyOptions::default()
    };
    let report = verify_suite_with(&opts, full_op);
    for c in &report.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
        for f in &c.failures {
            println!("    {f}");
        }
    }
    let prov = provenance(cli, "verify", None, opts.scheme);
    write_report(&cli.out, &prov, serde_json::to_value(&report).map_err(Error::from)?)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_NUMERICAL })
}
