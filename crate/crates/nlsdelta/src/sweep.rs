//! Wavenumber sweeps with multi-branch output, and the named parameter
//! presets for the transmission-intensity figures.

use crate::greens::{default_scan_config, solve_scattering, NoBranchError};
use crate::model::{Incidence, ScatteringProblem, ValidationError};
use crate::numerics::RootScanConfig;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// A k-sweep over a fixed geometry; the template's wavenumber is replaced at
/// every grid point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub n_points: usize,
    pub problem: ScatteringProblem,
    /// Scan override; the per-problem default window when absent.
    pub scan: Option<RootScanConfig>,
    /// Log-spaced k grid instead of uniform.
    pub log_spacing: bool,
}

impl SweepSpec {
    pub fn new(
        problem: ScatteringProblem,
        k_min: f64,
        k_max: f64,
        n_points: usize,
    ) -> Result<Self, ValidationError> {
        if !(k_min > 0.0 && k_min < k_max) {
            return Err(ValidationError {
                field: "k_min/k_max",
                message: format!("need 0 < k_min < k_max, got [{k_min}, {k_max}]"),
            });
        }
        if n_points < 2 {
            return Err(ValidationError {
                field: "n_points",
                message: format!("need at least 2 sweep points, got {n_points}"),
            });
        }
        Ok(Self {
            k_min,
            k_max,
            n_points,
            problem,
            scan: None,
            log_spacing: false,
        })
    }

    fn k_at(&self, i: usize) -> f64 {
        let frac = i as f64 / (self.n_points - 1) as f64;
        if self.log_spacing {
            (self.k_min.ln() + frac * (self.k_max.ln() - self.k_min.ln())).exp()
        } else {
            self.k_min + frac * (self.k_max - self.k_min)
        }
    }
}

/// One `(k, branch)` row of a sweep.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRecord {
    pub k: f64,
    pub branch: usize,
    /// `|T|^2`; exceeds 1 only for non-conservative (complex) couplings.
    pub t_intensity: f64,
    /// `|R|^2`.
    pub r_intensity: f64,
    /// Closure modulus: `|psi|` at the outgoing-side center.
    pub psi_cn_modulus: f64,
    /// Closure-equation residual at the accepted root.
    pub residual: f64,
    pub t_re: f64,
    pub t_im: f64,
    pub r_re: f64,
    pub r_im: f64,
}

/// Runs the sweep, k points ascending, branches per point ordered by the
/// closure modulus. Points are evaluated in parallel and collected in grid
/// order, so output is deterministic. Wavenumbers where the scan finds no
/// branch contribute no rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, ValidationError> {
    let per_point: Vec<Vec<SweepRecord>> = (0..spec.n_points)
        .into_par_iter()
        .map(|i| {
            let k = spec.k_at(i);
            let problem = match spec.problem.with_wavenumber(k) {
                Ok(p) => p,
                Err(_) => return Vec::new(),
            };
            let cfg = spec.scan.unwrap_or_else(|| default_scan_config(&problem));
            match solve_scattering(&problem, &cfg) {
                Ok(solutions) => solutions
                    .iter()
                    .map(|s| {
                        let outgoing = match problem.incidence() {
                            Incidence::Left => s.psi_at_centers[problem.num_centers() - 1],
                            Incidence::Right => s.psi_at_centers[0],
                        };
                        SweepRecord {
                            k,
                            branch: s.branch_index,
                            t_intensity: s.transmission.norm_sqr(),
                            r_intensity: s.reflection.norm_sqr(),
                            psi_cn_modulus: outgoing.norm(),
                            residual: s.closure_residual,
                            t_re: s.transmission.re,
                            t_im: s.transmission.im,
                            r_re: s.reflection.re,
                            r_im: s.reflection.im,
                        }
                    })
                    .collect(),
                Err(NoBranchError::NoRoot { .. }) => Vec::new(),
                Err(NoBranchError::Scan(_)) => Vec::new(),
            }
        })
        .collect();
    Ok(per_point.into_iter().flatten().collect())
}

/// CSV header matching [`write_csv`].
pub const CSV_HEADER: &str = "k,branch,T2,R2,psi_cN,residual";

/// Serializes records as CSV with 17 significant digits, UTF-8, LF endings.
pub fn write_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.k, r.branch, r.t_intensity, r.r_intensity, r.psi_cn_modulus, r.residual
        ));
    }
    out
}

/// A named parameter set reproducing one published transmission-intensity
/// panel. Sweep ranges are this crate's defaults (k in [0.1, 6]), not a
/// published value.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub positions: [f64; 3],
    pub coupling: Complex64,
    pub alpha: f64,
}

pub const DEFAULT_SWEEP_RANGE: (f64, f64) = (0.1, 6.0);

/// Three equal-strength centers; the `fig1-*` family uses real couplings at
/// c = {0, 1, 2}, the `fig2-*` family imaginary coupling z = i at the
/// mirror-symmetric c = {-1, 0, 1}.
pub fn presets() -> Vec<Preset> {
    let real = [0.0, 1.0, 2.0];
    let sym = [-1.0, 0.0, 1.0];
    vec![
        Preset {
            name: "fig1-linear",
            description: "linear case: z = 2, alpha = 0",
            positions: real,
            coupling: Complex64::new(2.0, 0.0),
            alpha: 0.0,
        },
        Preset {
            name: "fig1-weak",
            description: "weak nonlinearity: z = 2, alpha = 2",
            positions: real,
            coupling: Complex64::new(2.0, 0.0),
            alpha: 2.0,
        },
        Preset {
            name: "fig1-strong",
            description: "strong nonlinearity: z = 20, alpha = 2 (bistable)",
            positions: real,
            coupling: Complex64::new(20.0, 0.0),
            alpha: 2.0,
        },
        Preset {
            name: "fig2-alpham07",
            description: "imaginary coupling z = i, alpha = -0.7",
            positions: sym,
            coupling: Complex64::new(0.0, 1.0),
            alpha: -0.7,
        },
        Preset {
            name: "fig2-alpham05",
            description: "imaginary coupling z = i, alpha = -0.5",
            positions: sym,
            coupling: Complex64::new(0.0, 1.0),
            alpha: -0.5,
        },
        Preset {
            name: "fig2-alpha0",
            description: "imaginary coupling z = i, linear",
            positions: sym,
            coupling: Complex64::new(0.0, 1.0),
            alpha: 0.0,
        },
        Preset {
            name: "fig2-alpha1",
            description: "imaginary coupling z = i, alpha = 1",
            positions: sym,
            coupling: Complex64::new(0.0, 1.0),
            alpha: 1.0,
        },
        Preset {
            name: "fig2-alpha2",
            description: "imaginary coupling z = i, alpha = 2 (multistable)",
            positions: sym,
            coupling: Complex64::new(0.0, 1.0),
            alpha: 2.0,
        },
    ]
}

pub fn preset_by_name(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

impl Preset {
    /// Unit-amplitude left-incident problem at the given wavenumber.
    pub fn problem(&self, k: f64) -> Result<ScatteringProblem, ValidationError> {
        ScatteringProblem::new(
            self.positions
                .iter()
                .map(|&p| crate::model::DeltaCenter::new(p, self.coupling, self.alpha))
                .collect(),
            k,
            Complex64::new(1.0, 0.0),
            Incidence::Left,
        )
    }
}
