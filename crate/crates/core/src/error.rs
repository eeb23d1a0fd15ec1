use thiserror::Error;

/// Errors reported by the operator catalog and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A sign-change bracket could not be established. For the operations
    /// here this signals violated structural hypotheses, since the
    /// underlying existence proofs guarantee a bracket.
    #[error("no sign-change bracket for {context} after {attempts} expansions")]
    BracketNotFound { context: &'static str, attempts: usize },

    #[error("integration stalled near t = {at}: step size underflow")]
    StepSizeUnderflow { at: f64 },

    #[error("{method} did not converge within {iterations} iterations")]
    NonConvergence { method: &'static str, iterations: usize },

    /// Eigenfunction gluing failed, e.g. a vanishing endpoint derivative,
    /// which signals an unconverged node vector.
    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("operator file: {0}")]
    OpFile(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
