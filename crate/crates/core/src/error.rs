use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{op}: argument {value} outside the admissible domain ({reason})")]
    Domain {
        op: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{op}: tolerance not met (estimate {estimate:e}, requested {requested:e})")]
    ToleranceNotMet {
        op: &'static str,
        estimate: f64,
        requested: f64,
    },
    #[error("{op}: bracket [{lo}, {hi}] does not enclose a sign change")]
    Bracket { op: &'static str, lo: f64, hi: f64 },
    #[error("{op}: no sign change on [{lo}, {hi}]")]
    NoSignChange { op: &'static str, lo: f64, hi: f64 },
    #[error("{op}: lambda fails to increase at index {index} ({prev} -> {next})")]
    MonotonicityViolation {
        op: &'static str,
        index: usize,
        prev: f64,
        next: f64,
    },
    #[error("{op}: no root found ({detail})")]
    NoRootFound { op: &'static str, detail: String },
    #[error("{op}: corrector diverged after {attempts} step reductions")]
    CorrectorDiverged { op: &'static str, attempts: usize },
    #[error("{op}: discretization failure ({detail})")]
    DiscretizationFailure { op: &'static str, detail: String },
    #[error("{op}: Morse index uncertain ({detail})")]
    IndexUncertain { op: &'static str, detail: String },
    #[error("{op}: eigenfunction of rank {rank} has {zeros} zeros")]
    RankMismatch {
        op: &'static str,
        rank: usize,
        zeros: usize,
    },
    #[error("{op}: energy drift {drift:e} exceeds bound {bound:e}")]
    EnergyDrift { op: &'static str, drift: f64, bound: f64 },
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
