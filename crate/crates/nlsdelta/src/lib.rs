//! Scattering and bound states for the 1-D stationary nonlinear Schrödinger
//! equation with finitely many Dirac delta potentials.
//!
//! Each delta site carries a complex, intensity-dependent opacity
//! `f(|psi|) = z |psi|^alpha`, so the strength a wave sees depends on the wave
//! itself. The solver closes this self-consistency with a Green's-function
//! consistency matrix: evaluating the Lippmann-Schwinger solution at the
//! centers gives an N x N linear system whose triangular reduction leaves a
//! single scalar equation in `|psi(c_N)|`. Every root of that closure equation
//! is one coexisting scattering branch (bistability / multistability), each
//! with its own reflection and transmission amplitudes.
//!
//! Modules:
//! - [`model`] — domain types, validation, the nonlinearity, JSON config schema.
//! - [`numerics`] — root scanning, the Kerr modulus cubic, real Lambert W.
//! - [`greens`] — the consistency-matrix scattering solver (all branches).
//! - [`bound`] — bound states: single-delta closed form, symmetric double well
//!   via Lambert W, general-N Newton on `det Phi = 0` plus normalization.
//! - [`oracle`] — independent cross-checks: transfer-matrix backward march and
//!   a shooting bound-state finder. Shares no code with the primary paths.
//! - [`sweep`] — wavenumber sweeps and the figure presets.
//! - [`validate`] — randomized cross-method validation corpus.

pub mod bound;
pub mod greens;
mod linalg;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod sweep;
pub mod validate;

pub use model::{
    BoundCenter, BoundProblem, BoundStateSolution, DeltaCenter, DomainError, Incidence,
    Nonlinearity, Parity, ScatteringProblem, ScatteringSolution, ValidationError,
};
pub use numerics::RootScanConfig;
