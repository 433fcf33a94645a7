use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must share a grid (or operator) do not.
    #[error("structural mismatch: {0}")]
    Mismatch(String),

    /// The kernel fails a Lévy admissibility requirement.
    #[error("inadmissible kernel: {0}")]
    Inadmissible(String),

    /// A quadrature did not reach its target accuracy.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// The Poincaré bound needs mass outside the ball of radius diam(Ω).
    #[error("bound unavailable: {0}")]
    BoundUnavailable(String),

    /// The potential failed sampled validation of its structural assumptions.
    #[error("potential rejected: {0}")]
    Potential(String),

    /// A dense factorization failed (matrix not positive definite).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Newton's line search stopped making progress.
    #[error("line search stagnated after {iterations} Newton steps (residual {residual:.3e})")]
    LineSearch { iterations: usize, residual: f64 },

    /// Newton exceeded its iteration budget.
    #[error("newton did not converge in {iterations} steps (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    /// A failure inside one stage of the fixed-point map.
    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Picard iteration hit `max_iters`; the report is carried along.
    #[error("fixed-point iteration did not converge in {iterations} iterations (last residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        report: Box<crate::memory::PiIterationReport>,
    },

    /// Configuration could not be parsed or failed validation.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
