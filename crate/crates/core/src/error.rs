use std::fmt;

use crate::optimizer::CachingPolicy;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the analytical, optimization and simulation routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adaptive quadrature hit its refinement limit before meeting tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// Dual subgradient iteration hit the iteration cap.
    #[error("dual iteration did not converge after {iterations} iterations (duality gap {duality_gap:e})")]
    DualNonConvergence {
        iterations: usize,
        duality_gap: f64,
        best: Box<CachingPolicy>,
    },

    /// An inner convex solve or the outer DC loop failed.
    #[error("convex-concave procedure failed at outer iteration {iteration}: {reason}")]
    DcFailure {
        iteration: usize,
        reason: DcFailureReason,
        trace: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DcFailureReason {
    InnerSolve,
    NonMonotone { previous: f64, current: f64 },
}

impl fmt::Display for DcFailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcFailureReason::InnerSolve => write!(f, "inner projected-gradient solve did not reach stationarity"),
            DcFailureReason::NonMonotone { previous, current } => write!(
                f,
                "objective increased from {previous:e} to {current:e}"
            ),
        }
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}
