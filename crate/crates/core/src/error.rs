use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("allocation vector is empty")]
    EmptyAllocation,

    #[error("allocation entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("allocation entry {index} is not finite")]
    NonFiniteEntry { index: usize },

    #[error("allocation vector is all zero")]
    AllZero,

    #[error("allocation entry {index} is zero but the operation needs strictly positive entries")]
    ZeroEntry { index: usize },

    #[error("beta = {beta} is a singular point: {hint}")]
    SingularBeta { beta: f64, hint: &'static str },

    #[error("parameter `{name}` = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(&'static str),

    #[error("partition irrelevance not guaranteed: rho = {got}, consistent value is {expected}")]
    RhoMismatch { expected: f64, got: f64 },

    #[error("eta degenerate: allocation is already equal, fairness direction has zero norm")]
    EtaDegenerate,

    #[error("feasible region is empty")]
    EmptyRegion,

    #[error("feasible region is unbounded along coordinate {0}")]
    UnboundedRegion(usize),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("allocation is not inside the feasible region (violation {violation:e})")]
    InfeasibleAllocation { violation: f64 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyAllocation
            | Error::NegativeEntry { .. }
            | Error::NonFiniteEntry { .. }
            | Error::AllZero
            | Error::ZeroEntry { .. } => "invalid_allocation",
            Error::SingularBeta { .. } => "singular_beta",
            Error::Domain { .. } => "precondition",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidPartition(_) | Error::RhoMismatch { .. } => "partition",
            Error::EtaDegenerate => "eta_degenerate",
            Error::EmptyRegion
            | Error::UnboundedRegion(_)
            | Error::InvalidRegion(_)
            | Error::InfeasibleAllocation { .. } => "region",
            Error::Solver(_) => "solver",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Usage(_) => "usage",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
