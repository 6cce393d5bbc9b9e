//! Domain types, validation, and the intensity-dependent nonlinearity shared
//! by every solver.
//!
//! Two sign conventions coexist deliberately. Scattering uses the
//! `+delta(x-c) f(|psi|) psi` form with a complex coupling `z` (gain/loss
//! allowed); bound states use the `-Omega delta(x-c) |psi|^alpha psi` form
//! with `Omega > 0`. They are kept in separate problem types rather than a
//! shared signed coupling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Positions closer than this are treated as one physical center; closer
/// spacings make the consistency matrix rows numerically dependent.
pub const DUPLICATE_POSITION_TOL: f64 = 1e-12;

/// A nonlinearity evaluation left its domain (diverging `f`, Lambert W
/// argument off its branch, or a closed form at its singular exponent).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("f = z|psi|^alpha diverges: exponent {exponent} < 0 at modulus 0")]
    NegativeExponentAtZeroModulus { exponent: f64 },
    #[error("Lambert W branch {branch}: argument {argument} outside [{lo}, {hi})")]
    LambertArgument {
        branch: i32,
        argument: f64,
        lo: f64,
        hi: f64,
    },
    #[error("bound-state closed form is singular at exponent {alpha} (requires alpha < 2)")]
    BoundExponentSingular { alpha: f64 },
}

/// Input rejected during problem construction, with the offending field named.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {message}")]
pub struct ValidationError {
    pub field: &'static str,
    pub message: String,
}

impl ValidationError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

/// One delta site of a scattering problem: `f_i(|psi|) = z_i |psi|^alpha_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCenter {
    /// Location of the delta, in length units.
    pub position: f64,
    /// Complex opacity `z_i`; the imaginary part models gain or loss.
    pub coupling: Complex64,
    /// Nonlinear exponent `alpha_i`; 0 is the linear case, 2 is Kerr.
    pub exponent: f64,
}

impl DeltaCenter {
    pub fn new(position: f64, coupling: Complex64, exponent: f64) -> Self {
        Self {
            position,
            coupling,
            exponent,
        }
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity::PowerLaw {
            coupling: self.coupling,
            exponent: self.exponent,
        }
    }
}

/// The intensity-dependent interaction strength `f(|psi|)`.
///
/// `Linear(z)` evaluates identically to `PowerLaw(z, 0)` for every modulus;
/// it exists so linear problems read as what they are. Other modulus maps can
/// be modelled by precomputing an effective `PowerLaw`, but every closed form
/// in this crate assumes the power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    PowerLaw { coupling: Complex64, exponent: f64 },
    Linear { coupling: Complex64 },
}

impl Nonlinearity {
    /// `f(|psi|) = z |psi|^alpha`.
    ///
    /// Requires `modulus >= 0`, and `modulus > 0` when the exponent is
    /// negative (the power law diverges at zero).
    pub fn evaluate(&self, modulus: f64) -> Result<Complex64, DomainError> {
        debug_assert!(modulus >= 0.0, "modulus must be nonnegative");
        match *self {
            Nonlinearity::Linear { coupling } => Ok(coupling),
            Nonlinearity::PowerLaw { coupling, exponent } => {
                if exponent == 0.0 {
                    return Ok(coupling);
                }
                if exponent < 0.0 && modulus == 0.0 {
                    return Err(DomainError::NegativeExponentAtZeroModulus { exponent });
                }
                Ok(coupling * modulus.powf(exponent))
            }
        }
    }

    /// The dimensionless coupling `g = (i/2k) f(|psi|)` that enters every
    /// consistency-matrix entry.
    pub fn effective_g(&self, modulus: f64, k: f64) -> Result<Complex64, DomainError> {
        debug_assert!(k > 0.0, "wavenumber must be positive");
        let f = self.evaluate(modulus)?;
        Ok(Complex64::new(0.0, 1.0 / (2.0 * k)) * f)
    }
}

/// Side the incident plane wave comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Incidence {
    Left,
    Right,
}

/// A validated scattering problem: sorted centers, `k > 0`, `|A| > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProblem {
    centers: Vec<DeltaCenter>,
    wavenumber: f64,
    incident_amplitude: Complex64,
    incidence: Incidence,
}

impl ScatteringProblem {
    /// Validates and sorts the raw input. Centers are ordered ascending by
    /// position; positions within [`DUPLICATE_POSITION_TOL`] of each other,
    /// non-finite fields, `k <= 0`, and `A = 0` are rejected with the field
    /// named in the error.
    pub fn new(
        centers: Vec<DeltaCenter>,
        wavenumber: f64,
        incident_amplitude: Complex64,
        incidence: Incidence,
    ) -> Result<Self, ValidationError> {
        if centers.is_empty() {
            return Err(ValidationError::new("centers", "center list is empty"));
        }
        for (i, c) in centers.iter().enumerate() {
            if !c.position.is_finite() {
                return Err(ValidationError::new(
                    "centers.position",
                    format!("center {i}: position {} is not finite", c.position),
                ));
            }
            if !c.coupling.re.is_finite() || !c.coupling.im.is_finite() {
                return Err(ValidationError::new(
                    "centers.coupling",
                    format!("center {i}: coupling {} is not finite", c.coupling),
                ));
            }
            if !c.exponent.is_finite() {
                return Err(ValidationError::new(
                    "centers.exponent",
                    format!("center {i}: exponent {} is not finite", c.exponent),
                ));
            }
        }
        if !wavenumber.is_finite() || wavenumber <= 0.0 {
            return Err(ValidationError::new(
                "k",
                format!("wavenumber must be finite and > 0, got {wavenumber}"),
            ));
        }
        if !incident_amplitude.re.is_finite() || !incident_amplitude.im.is_finite() {
            return Err(ValidationError::new(
                "A",
                format!("incident amplitude {incident_amplitude} is not finite"),
            ));
        }
        if incident_amplitude.norm() == 0.0 {
            return Err(ValidationError::new(
                "A",
                "incident amplitude must be nonzero",
            ));
        }
        let mut centers = centers;
        centers.sort_by(|a, b| a.position.total_cmp(&b.position));
        for w in centers.windows(2) {
            if (w[1].position - w[0].position).abs() < DUPLICATE_POSITION_TOL {
                return Err(ValidationError::new(
                    "centers.position",
                    format!(
                        "positions {} and {} coincide within {DUPLICATE_POSITION_TOL:e}",
                        w[0].position, w[1].position
                    ),
                ));
            }
        }
        Ok(Self {
            centers,
            wavenumber,
            incident_amplitude,
            incidence,
        })
    }

    pub fn centers(&self) -> &[DeltaCenter] {
        &self.centers
    }

    pub fn num_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn incident_amplitude(&self) -> Complex64 {
        self.incident_amplitude
    }

    pub fn incidence(&self) -> Incidence {
        self.incidence
    }

    /// Same geometry and couplings, different wavenumber. Used by sweeps.
    pub fn with_wavenumber(&self, k: f64) -> Result<Self, ValidationError> {
        Self::new(
            self.centers.clone(),
            k,
            self.incident_amplitude,
            self.incidence,
        )
    }

    /// The problem reflected through x -> -x: positions negated and the center
    /// order reversed, incidence side swapped. A right-incident solve is a
    /// left-incident solve of the mirror.
    pub fn mirrored(&self) -> Self {
        let mut centers: Vec<DeltaCenter> = self
            .centers
            .iter()
            .map(|c| DeltaCenter::new(-c.position, c.coupling, c.exponent))
            .collect();
        centers.reverse();
        Self {
            centers,
            wavenumber: self.wavenumber,
            incident_amplitude: self.incident_amplitude,
            incidence: match self.incidence {
                Incidence::Left => Incidence::Right,
                Incidence::Right => Incidence::Left,
            },
        }
    }
}

/// One self-consistent scattering branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    /// `psi` evaluated at each center, in center order.
    pub psi_at_centers: Vec<Complex64>,
    /// Reflection amplitude `R` (coefficient of the returning wave).
    pub reflection: Complex64,
    /// Transmission amplitude `T` (outgoing over incident).
    pub transmission: Complex64,
    /// Branch ordinal, ascending in the closure modulus at this wavenumber.
    pub branch_index: usize,
    /// Absolute value of the closure equation at the accepted root.
    pub closure_residual: f64,
}

/// One attractive delta site of a bound-state problem
/// (`-Omega delta(x-c) |psi|^alpha psi`, `Omega > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCenter {
    pub position: f64,
    /// Strength `Omega_i > 0`.
    pub strength: f64,
    /// Nonlinear exponent `alpha_i`.
    pub exponent: f64,
}

impl BoundCenter {
    pub fn new(position: f64, strength: f64, exponent: f64) -> Self {
        Self {
            position,
            strength,
            exponent,
        }
    }
}

/// A validated bound-state problem: sorted centers with positive strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProblem {
    centers: Vec<BoundCenter>,
}

impl BoundProblem {
    pub fn new(centers: Vec<BoundCenter>) -> Result<Self, ValidationError> {
        if centers.is_empty() {
            return Err(ValidationError::new("centers", "center list is empty"));
        }
        for (i, c) in centers.iter().enumerate() {
            if !c.position.is_finite() {
                return Err(ValidationError::new(
                    "centers.position",
                    format!("center {i}: position {} is not finite", c.position),
                ));
            }
            if !c.strength.is_finite() || c.strength <= 0.0 {
                return Err(ValidationError::new(
                    "centers.omega",
                    format!(
                        "center {i}: strength must be finite and > 0, got {}",
                        c.strength
                    ),
                ));
            }
            if !c.exponent.is_finite() {
                return Err(ValidationError::new(
                    "centers.alpha",
                    format!("center {i}: exponent {} is not finite", c.exponent),
                ));
            }
        }
        let mut centers = centers;
        centers.sort_by(|a, b| a.position.total_cmp(&b.position));
        for w in centers.windows(2) {
            if (w[1].position - w[0].position).abs() < DUPLICATE_POSITION_TOL {
                return Err(ValidationError::new(
                    "centers.position",
                    format!(
                        "positions {} and {} coincide within {DUPLICATE_POSITION_TOL:e}",
                        w[0].position, w[1].position
                    ),
                ));
            }
        }
        Ok(Self { centers })
    }

    pub fn centers(&self) -> &[BoundCenter] {
        &self.centers
    }

    pub fn num_centers(&self) -> usize {
        self.centers.len()
    }
}

/// Relative phase between the two center values of a symmetric double well:
/// `Even` for cos(theta) = 1, `Odd` for cos(theta) = -1, `None` when parity
/// is not a label that applies (general geometries).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// One bound state: decay rate `nu > 0`, energy `E = -nu^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSolution {
    pub nu: f64,
    /// Always exactly `-nu * nu`.
    pub energy: f64,
    pub psi_at_centers: Vec<Complex64>,
    pub parity: Parity,
    /// Deviation of the closed-form normalization sum from 1.
    pub norm_residual: f64,
}

impl BoundStateSolution {
    pub fn new(
        nu: f64,
        psi_at_centers: Vec<Complex64>,
        parity: Parity,
        norm_residual: f64,
    ) -> Self {
        Self {
            nu,
            energy: -nu * nu,
            psi_at_centers,
            parity,
            norm_residual,
        }
    }
}

// --- JSON problem schema -------------------------------------------------
//
// Scattering: { "centers": [{"c": f, "z": [re, im], "alpha": f}],
//               "k": f, "A": [re, im], "incidence": "left"|"right" }
// Bound:      { "centers": [{"c": f, "omega": f, "alpha": f}] }

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterCenterConfig {
    pub c: f64,
    pub z: [f64; 2],
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub centers: Vec<ScatterCenterConfig>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(rename = "A", default = "default_amplitude")]
    pub amplitude: [f64; 2],
    #[serde(default = "default_incidence")]
    pub incidence: Incidence,
}

fn default_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_incidence() -> Incidence {
    Incidence::Left
}

impl ScatterConfig {
    /// Builds the problem, with `k_override` taking precedence over the
    /// config's own `k` (sweeps fill it per point).
    pub fn to_problem(&self, k_override: Option<f64>) -> Result<ScatteringProblem, ValidationError> {
        let k = k_override
            .or(self.k)
            .ok_or_else(|| ValidationError::new("k", "no wavenumber in config or on command line"))?;
        let centers = self
            .centers
            .iter()
            .map(|c| DeltaCenter::new(c.c, Complex64::new(c.z[0], c.z[1]), c.alpha))
            .collect();
        ScatteringProblem::new(
            centers,
            k,
            Complex64::new(self.amplitude[0], self.amplitude[1]),
            self.incidence,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCenterConfig {
    pub c: f64,
    pub omega: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundConfig {
    pub centers: Vec<BoundCenterConfig>,
}

impl BoundConfig {
    pub fn to_problem(&self) -> Result<BoundProblem, ValidationError> {
        BoundProblem::new(
            self.centers
                .iter()
                .map(|c| BoundCenter::new(c.c, c.omega, c.alpha))
                .collect(),
        )
    }
}
