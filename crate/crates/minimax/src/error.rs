use thiserror::Error;

#[derive(Debug, Error)]
pub enum MinimaxError {
    /// A component value or gradient entry came back NaN or infinite. Either
    /// the problem definition is bad or the iterate has diverged.
    #[error("non-finite evaluation of component {component} ({what})")]
    NonFiniteEvaluation { component: usize, what: &'static str },

    /// The inner QP could not certify the requested gap within its iteration
    /// cap. Reported rather than silently ignored.
    #[error("QP failed to reach gap {target:e} within {iterations} iterations (gap {achieved:e})")]
    MaxQpIterations { target: f64, achieved: f64, iterations: usize },

    /// Backtracking exhausted `j_max` halvings without satisfying the Armijo
    /// predicate.
    #[error("line search stalled after {j_max} backtracking steps")]
    LineSearchStalled { j_max: usize },

    #[error("brute-force QP oracle supports N <= 4, got N = {n}")]
    DimensionTooLarge { n: usize },

    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
}

pub type Result<T> = std::result::Result<T, MinimaxError>;
