use thiserror::Error;

use crate::iad::IadTrace;

/// Errors produced by the solver, the diagnostics and the model constructors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular (pivot magnitude {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("null space is not one-dimensional (two R-diagonal entries below tolerance)")]
    AmbiguousNullspace,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("operator is not self-adjoint in the weighted inner product (max asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("eigenvalue iteration failed to converge after {iterations} iterations")]
    EigenConvergence { iterations: usize },

    #[error("weights must be strictly positive and finite (index {index}, value {value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not column stochastic: column {column} sums to {sum}")]
    NotStochastic { column: usize, sum: f64 },

    #[error("matrix has negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("transition matrix is reducible")]
    Reducible,

    #[error("coarse matrix is reducible; its steady state is not unique")]
    ReducibleCoarseMatrix,

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("vector is not invariant under the chain (max residual {residual:e})")]
    NotInvariant { residual: f64 },

    #[error("leading eigenvalue of the reversal product is {lambda1}, expected 1")]
    InconsistentSteadyState { lambda1: f64 },

    #[error("steady-state refinement did not converge in {rounds} rounds")]
    SteadyStateNotConverged { rounds: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("coarse state {stratum} has zero mass")]
    ZeroMassStratum { stratum: usize },

    #[error("partition is not a refinement of the coarse partition (fine state {state})")]
    NotRefinement { state: usize },

    #[error("IAD did not converge within {iterations} outer iterations")]
    NotConverged {
        iterations: usize,
        trace: Box<IadTrace>,
    },

    #[error("not enough usable iterates to estimate a rate (have {usable}, need {needed})")]
    InsufficientData { usable: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
