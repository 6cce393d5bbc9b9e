//! Command-line surface for the delta-potential solvers: one-shot scattering
//! reports, wavenumber sweeps with multi-branch CSV/JSON emission, bound-state
//! reports, figure presets, and the randomized validation harness.
//!
//! Exit codes: 0 ok, 1 validation-harness failure, 2 invalid input,
//! 3 no scattering branch, 4 no bound state.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use nlsdelta::bound::{
    odd_existence_margin, solve_general_bound, solve_single_bound, solve_symmetric_double,
    BoundSolveError,
};
use nlsdelta::greens::solve_scattering_default;
use nlsdelta::model::{
    BoundConfig, BoundProblem, BoundStateSolution, Parity, ScatterConfig, ScatteringProblem,
    ScatteringSolution,
};
use nlsdelta::sweep::{
    preset_by_name, presets, run_sweep, write_csv, SweepSpec, DEFAULT_SWEEP_RANGE,
};
use nlsdelta::validate::{run_validation, ValidationConfig};

const EXIT_INVALID: u8 = 2;
const EXIT_NO_BRANCH: u8 = 3;
const EXIT_NO_BOUND_STATE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "nlsdelta",
    version,
    about = "Scattering branches and bound states for 1-D nonlinear delta potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scattering problem and print every coexisting branch.
    Scatter {
        /// JSON problem file: {"centers": [{"c", "z": [re, im], "alpha"}],
        /// "k", "A": [re, im], "incidence"}
        #[arg(long)]
        config: PathBuf,
        /// Wavenumber override (takes precedence over the config's "k").
        #[arg(long)]
        k: Option<f64>,
        /// Emit a JSON document instead of the text report.
        #[arg(long)]
        json: bool,
    },
    /// Sweep the wavenumber and emit one row per (k, branch).
    Sweep {
        /// JSON problem file (its "k" is ignored; the sweep fills it).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Named parameter set; see `preset list`.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SWEEP_RANGE.0)]
        k_min: f64,
        #[arg(long, default_value_t = DEFAULT_SWEEP_RANGE.1)]
        k_max: f64,
        /// Number of k grid points.
        #[arg(short = 'n', long = "points", default_value_t = 600)]
        n_points: usize,
        /// Log-spaced k grid instead of uniform.
        #[arg(long)]
        log_spacing: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit a JSON document (records array) instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Solve a bound-state problem and report every state.
    Bound {
        /// JSON problem file: {"centers": [{"c", "omega", "alpha"}]}
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Cross-validate the solver against the transfer-matrix oracle on a
    /// random corpus and check every solution invariant.
    Validate {
        #[arg(long, default_value_t = 50)]
        corpus: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also draw negative nonlinear exponents.
        #[arg(long)]
        allow_singular: bool,
    },
    /// Inspect the built-in parameter presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names and their parameters.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Scatter { config, k, json } => cmd_scatter(&config, k, json),
        Command::Sweep {
            config,
            preset,
            k_min,
            k_max,
            n_points,
            log_spacing,
            out,
            json,
        } => cmd_sweep(
            config.as_deref(),
            preset.as_deref(),
            k_min,
            k_max,
            n_points,
            log_spacing,
            out.as_deref(),
            json,
        ),
        Command::Bound { config, json } => cmd_bound(&config, json),
        Command::Validate {
            corpus,
            seed,
            allow_singular,
        } => cmd_validate(corpus, seed, allow_singular),
        Command::Preset {
            action: PresetAction::List,
        } => {
            for p in presets() {
                println!(
                    "{:<14} c = {:?}, z = {} + {}i, alpha = {}  ({})",
                    p.name, p.positions, p.coupling.re, p.coupling.im, p.alpha, p.description
                );
            }
            ExitCode::SUCCESS
        }
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, (u8, String)> {
    let text = fs::read_to_string(path)
        .map_err(|e| (EXIT_INVALID, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        (
            EXIT_INVALID,
            format!(
                "{}: parse error at line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ),
        )
    })
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

fn cmd_scatter(config: &Path, k: Option<f64>, json: bool) -> ExitCode {
    let cfg: ScatterConfig = match read_json(config) {
        Ok(cfg) => cfg,
        Err((code, msg)) => return fail(code, msg),
    };
    let problem: ScatteringProblem = match cfg.to_problem(k) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let solutions = match solve_scattering_default(&problem) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_NO_BRANCH, e),
    };
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&scatter_json(&problem, &solutions)).unwrap()
        );
    } else {
        println!(
            "k = {}, |A| = {}, {} branch(es)",
            problem.wavenumber(),
            problem.incident_amplitude().norm(),
            solutions.len()
        );
        for s in &solutions {
            println!("branch {}:", s.branch_index);
            println!("  |T|^2 = {:.12e}", s.transmission.norm_sqr());
            println!("  |R|^2 = {:.12e}", s.reflection.norm_sqr());
            println!("  T     = {}", fmt_c(s.transmission));
            println!("  R     = {}", fmt_c(s.reflection));
            for (center, psi) in problem.centers().iter().zip(&s.psi_at_centers) {
                println!("  psi(c = {:+.6}) = {}", center.position, fmt_c(*psi));
            }
            println!("  closure residual = {:.3e}", s.closure_residual);
        }
    }
    ExitCode::SUCCESS
}

fn scatter_json(
    problem: &ScatteringProblem,
    solutions: &[ScatteringSolution],
) -> serde_json::Value {
    serde_json::json!({
        "k": problem.wavenumber(),
        "branches": solutions.iter().map(|s| serde_json::json!({
            "branch": s.branch_index,
            "T2": s.transmission.norm_sqr(),
            "R2": s.reflection.norm_sqr(),
            "T": [s.transmission.re, s.transmission.im],
            "R": [s.reflection.re, s.reflection.im],
            "psi": s.psi_at_centers.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
            "residual": s.closure_residual,
        })).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: Option<&Path>,
    preset: Option<&str>,
    k_min: f64,
    k_max: f64,
    n_points: usize,
    log_spacing: bool,
    out: Option<&Path>,
    json: bool,
) -> ExitCode {
    let template: ScatteringProblem = if let Some(name) = preset {
        let Some(p) = preset_by_name(name) else {
            return fail(
                EXIT_INVALID,
                format!("unknown preset {name:?}; see `nlsdelta preset list`"),
            );
        };
        match p.problem(1.0) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_INVALID, e),
        }
    } else if let Some(path) = config {
        let cfg: ScatterConfig = match read_json(path) {
            Ok(cfg) => cfg,
            Err((code, msg)) => return fail(code, msg),
        };
        match cfg.to_problem(Some(1.0)) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_INVALID, e),
        }
    } else {
        return fail(EXIT_INVALID, "sweep needs --config or --preset");
    };

    let mut spec = match SweepSpec::new(template, k_min, k_max, n_points) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    spec.log_spacing = log_spacing;
    let records = match run_sweep(&spec) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let payload = if json {
        serde_json::to_string_pretty(&serde_json::json!({ "records": records })).unwrap()
    } else {
        write_csv(&records)
    };
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, payload) {
                return fail(EXIT_INVALID, format!("{}: {e}", path.display()));
            }
            eprintln!("wrote {} rows to {}", records.len(), path.display());
        }
        None => print!("{payload}"),
    }
    ExitCode::SUCCESS
}

/// Symmetric double wells take the Lambert-W path; a single center takes the
/// closed form; everything else goes through the general Newton solver.
fn solve_bound_problem(
    problem: &BoundProblem,
) -> Result<(Vec<BoundStateSolution>, Vec<String>), (u8, String)> {
    let centers = problem.centers();
    let mut notes = Vec::new();
    let states = if centers.len() == 1 {
        let c = centers[0];
        vec![solve_single_bound(c.strength, c.exponent, c.position)
            .map_err(|e| (EXIT_NO_BOUND_STATE, e.to_string()))?]
    } else if centers.len() == 2
        && (centers[0].strength - centers[1].strength).abs() < 1e-12
        && (centers[0].exponent - centers[1].exponent).abs() < 1e-12
    {
        let d = centers[1].position - centers[0].position;
        let states = solve_symmetric_double(centers[0].strength, centers[0].exponent, d)
            .map_err(|e| match e {
                BoundSolveError::NoState(ns) => (EXIT_NO_BOUND_STATE, ns.to_string()),
                other => (EXIT_NO_BOUND_STATE, other.to_string()),
            })?;
        if !states.iter().any(|s| s.parity == Parity::Odd) {
            let beta = states
                .first()
                .map(|s| centers[0].strength * s.psi_at_centers[1].norm().powf(centers[0].exponent))
                .unwrap_or(centers[0].strength);
            notes.push(format!(
                "odd state absent: two states require d > 2/beta at the odd amplitude \
                 (here d = {d:.6}, even-state beta = {beta:.6}, margin d - 2/beta = {:+.6})",
                odd_existence_margin(d, beta)
            ));
        }
        states
    } else {
        solve_general_bound(problem, None).map_err(|e| (EXIT_NO_BOUND_STATE, e.to_string()))?
    };
    Ok((states, notes))
}

fn cmd_bound(config: &Path, json: bool) -> ExitCode {
    let cfg: BoundConfig = match read_json(config) {
        Ok(cfg) => cfg,
        Err((code, msg)) => return fail(code, msg),
    };
    let problem = match cfg.to_problem() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INVALID, e),
    };
    let (states, notes) = match solve_bound_problem(&problem) {
        Ok(out) => out,
        Err((code, msg)) => return fail(code, msg),
    };
    if json {
        let doc = serde_json::json!({
            "states": states.iter().map(|s| serde_json::json!({
                "nu": s.nu,
                "energy": s.energy,
                "parity": match s.parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                    Parity::None => "none",
                },
                "psi": s.psi_at_centers.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
                "norm_residual": s.norm_residual,
            })).collect::<Vec<_>>(),
            "notes": notes,
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("{} bound state(s)", states.len());
        for (i, s) in states.iter().enumerate() {
            println!(
                "state {i}: nu = {:.12e}, E = {:.12e}, parity = {:?}",
                s.nu, s.energy, s.parity
            );
            for (center, psi) in problem.centers().iter().zip(&s.psi_at_centers) {
                println!("  psi(c = {:+.6}) = {}", center.position, fmt_c(*psi));
            }
            println!("  norm residual = {:.3e}", s.norm_residual);
        }
        for note in &notes {
            println!("note: {note}");
        }
    }
    ExitCode::SUCCESS
}

fn cmd_validate(corpus: usize, seed: u64, allow_singular: bool) -> ExitCode {
    let report = run_validation(&ValidationConfig {
        corpus,
        seed,
        allow_singular,
    });
    print!("{}", report.render());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
