//! Command-line front end: load a problem, run the solver, emit trace and
//! result artifacts, or run gradient diagnostics.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_config, ProblemSpec, RunConfig};
use crate::dataset::load_dataset;
use crate::objective::{check_gradients, default_fd_step, FnFamily, ObjectiveFamily};
use crate::problems::{demyanov_malozemov, maxmean_objective, quadratic_family};
use crate::solver::{fmt_float, solve, write_trace, SolveResult, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_QP_FAILURE: i32 = 3;

const GRAD_CHECK_POINTS: usize = 20;
const GRAD_CHECK_SEED: u64 = 0;
const GRAD_CHECK_THRESHOLD: f64 = 1e-6;

fn load_config(config_path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| format!("cannot read config {}: {e}", config_path.display()))?;
    parse_config(&text).map_err(|e| format!("config error: {e}"))
}

fn build_family(problem: &ProblemSpec) -> Result<Box<dyn ObjectiveFamily<f64>>, String> {
    match problem {
        ProblemSpec::DemyanovMalozemov => Ok(Box::new(demyanov_malozemov::<f64>())),
        ProblemSpec::Quadratic { seed, components, dim } => {
            Ok(Box::new(quadratic_family::<f64>(*seed, *components, *dim)))
        }
        ProblemSpec::Dataset { path, model } => {
            let ds = load_dataset(path).map_err(|e| format!("dataset error: {e}"))?;
            maxmean_objective(&ds, *model).map(|f| Box::new(f) as _).map_err(|e| e.to_string())
        }
        ProblemSpec::SabotagedGradient => Ok(Box::new(
            FnFamily::new(1).push(|x: &[f64]| x[0] * x[0], |x: &[f64]| vec![4.0 * x[0]]),
        )),
    }
}

/// `solve` subcommand. Exit 0 on convergence, 2 on iteration cap or stalled
/// line search, 3 on QP failure, 1 on config/IO errors.
pub fn run(
    config_path: &Path,
    trace_override: Option<&Path>,
    result_override: Option<&Path>,
) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    let family = match build_family(&config.problem) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    if let Some(x0) = &config.solver.x0 {
        if x0.len() != family.dim() {
            eprintln!(
                "config error: solver.x0 has {} entries, problem dimension is {}",
                x0.len(),
                family.dim()
            );
            return EXIT_CONFIG;
        }
    }

    let start = Instant::now();
    let result = solve(&*family, &config.solver);
    let wall = start.elapsed().as_secs_f64();

    let trace_path = trace_override.or(config.trace_path.as_deref());
    if let Some(path) = trace_path {
        let mut buf = Vec::new();
        write_trace(&result.trace, &mut buf).expect("in-memory write");
        if let Err(e) = fs::write(path, buf) {
            eprintln!("cannot write trace {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    }

    let summary = render_result(&result, wall);
    let result_path = result_override.or(config.result_path.as_deref());
    match result_path {
        Some(path) => {
            if let Err(e) = fs::write(path, &summary) {
                eprintln!("cannot write result {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
        None => print!("{summary}"),
    }

    match result.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterations | SolveStatus::LineSearchStalled => EXIT_NOT_CONVERGED,
        SolveStatus::QpFailure => EXIT_QP_FAILURE,
    }
}

fn render_result(result: &SolveResult<f64>, wall_seconds: f64) -> String {
    let x = result
        .x_final
        .iter()
        .map(|&v| fmt_float(v))
        .collect::<Vec<_>>()
        .join(",");
    let phi = result.trace.last().map_or(f64::NAN, |r| r.phi);
    format!(
        "status = {}\niterations = {}\nphi = {}\nstationarity = {}\nx = {}\nwall_time_seconds = {}\n",
        result.status.as_str(),
        result.trace.len(),
        fmt_float(phi),
        fmt_float(result.stationarity),
        x,
        fmt_float(wall_seconds),
    )
}

/// `check` subcommand: gradient validation at seeded random points. Exit 0
/// iff every component's worst relative error stays within 1e-6.
pub fn check(config_path: &Path) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    let family = match build_family(&config.problem) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(GRAD_CHECK_SEED);
    let mut worst = vec![0.0f64; family.num_components()];
    for _ in 0..GRAD_CHECK_POINTS {
        let x: Vec<f64> = (0..family.dim()).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        match check_gradients(&*family, &x, default_fd_step(&x)) {
            Ok(report) => {
                for (w, &e) in worst.iter_mut().zip(&report.per_component) {
                    *w = w.max(e);
                }
            }
            Err(e) => {
                eprintln!("gradient check failed: {e}");
                return EXIT_CONFIG;
            }
        }
    }

    let mut failed = Vec::new();
    for (j, &e) in worst.iter().enumerate() {
        println!("component {j}: worst relative error {}", fmt_float(e));
        if e > GRAD_CHECK_THRESHOLD {
            failed.push(j);
        }
    }
    if failed.is_empty() {
        EXIT_OK
    } else {
        for j in failed {
            eprintln!(
                "component {j}: gradient disagrees with finite differences (error {} > {GRAD_CHECK_THRESHOLD:e})",
                fmt_float(worst[j])
            );
        }
        EXIT_NOT_CONVERGED
    }
}
