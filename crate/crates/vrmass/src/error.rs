//! Error type shared by every module.

use thiserror::Error;

/// Errors produced by solvers, quadrature, and input validation.
#[derive(Debug, Error)]
pub enum VrError {
    #[error("evaluation at r = {r} outside the domain [{lo}, {hi})")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },

    #[error("grid is empty or degenerate: {0}")]
    EmptyGrid(String),

    #[error("adaptive quadrature did not reach tolerance {tol} on [{a}, {b}] (error estimate {err})")]
    QuadratureNonConvergent { a: f64, b: f64, tol: f64, err: f64 },

    #[error("improper integral tail does not converge (fitted decay rate {rate}, need > 1)")]
    TailDivergent { rate: f64 },

    #[error("profile vanishes identically on the fit window [{lo}, {hi}]")]
    VanishesOnWindow { lo: f64, hi: f64 },

    #[error("Newton iteration diverged after {iters} steps (residual {residual})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("conformal factor lost positivity (min {min_u} at r = {r})")]
    PositivityLost { min_u: f64, r: f64 },

    #[error("no horizon: the lapse r²+k−2m r^(2−n) has no positive root for m = {m}")]
    NoHorizon { m: f64 },

    #[error(
        "trace equation inconsistent: boundary value and asymptote {requested} cannot both hold; \
         the boundary-regular solution {attained}"
    )]
    TraceInconsistent { requested: f64, attained: String },

    #[error("V-static integration stopped at r = {r_stop}: {reason}")]
    IntegrationBlowUp { r_stop: f64, reason: String },

    #[error("asymptotic classification is ambiguous: {detail}")]
    AsymptoticsAmbiguous { detail: String },

    #[error("perturbation violates the Bartnik-preservation precondition: {0}")]
    BartnikViolation(String),

    #[error("experiment failed on family member {index}: {source}")]
    Experiment {
        index: usize,
        #[source]
        source: Box<VrError>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("report serialisation failed: {0}")]
    Serialise(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, VrError>;
