use thiserror::Error;

use crate::catalog::TranscendentId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The recurrence leaves a coefficient undetermined. `order` is the
    /// exponent in `s` of the free coefficient.
    #[error("{id:?}: coefficient of s^{order} is not determined by the seed")]
    NonUniqueCoefficient { id: TranscendentId, order: f64 },

    #[error("{id:?}: no coefficient choice cancels the residual at s^{order} (residual {residual:e})")]
    InconsistentSeed { id: TranscendentId, order: f64, residual: f64 },

    #[error("{id:?}: residual at s^{order} couples several unknown coefficients or has no closed-form root")]
    UnresolvedOrder { id: TranscendentId, order: f64 },

    #[error("s = {s} lies outside the series trust radius {radius}")]
    OutOfTrustRadius { s: f64, radius: f64 },

    #[error("{id:?}: F = {f:e} < 0 at s = {s}, no real second derivative")]
    BranchAmbiguity { id: TranscendentId, s: f64, f: f64 },

    #[error("{id:?}: step size collapsed to {h:e} at s = {s}")]
    StiffnessFailure { id: TranscendentId, s: f64, h: f64 },

    #[error("{id:?}: series and integrator disagree by {diff:e} at s = {s}")]
    HandoffMismatch { id: TranscendentId, s: f64, diff: f64 },

    #[error("argument {s} exceeds the computed range {max}")]
    RangeExceeded { s: f64, max: f64 },

    #[error("degenerate Painleve V variable u = {u} at s = {s}")]
    DegenerateU { s: f64, u: f64 },

    #[error("{0}")]
    UnsupportedForm(String),

    #[error("integrand of the square-root formula is negative ({value:e}) at x = {x}")]
    NegativeIntegrand { x: f64, value: f64 },

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigensolverNoConvergence { iterations: usize },

    #[error("bulk window holds {count} eigenvalues, need at least 2")]
    WindowTooSmall { count: usize },

    #[error("{have} spacings available, need at least {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
