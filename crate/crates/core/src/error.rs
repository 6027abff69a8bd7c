use thiserror::Error;

/// Errors raised by kernel evaluation, propagators and the reconstruction engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LchsError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument {value} outside domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("{what} did not converge (last two estimates {previous:e}, {last:e})")]
    Convergence {
        what: String,
        previous: f64,
        last: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix norm {norm:e} exceeds exponential cap {cap:e}")]
    Overflow { norm: f64, cap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    #[error("evaluation failed at node k = {node}: {source}")]
    AtNode {
        node: f64,
        #[source]
        source: Box<LchsError>,
    },

    #[error("epsilon {epsilon:e} unreachable below K cap {cap}")]
    Unreachable { epsilon: f64, cap: f64 },
}

impl LchsError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        LchsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for numerical non-convergence (including wrapped node failures).
    pub fn is_convergence(&self) -> bool {
        match self {
            LchsError::Convergence { .. } | LchsError::Unreachable { .. } => true,
            LchsError::AtNode { source, .. } => source.is_convergence(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, LchsError>;
