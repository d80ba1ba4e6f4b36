use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

use crate::inner::InnerTrace;

/// Errors reported by the solvers and the supporting numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("derivative order {0} is not supported (orders 1 to 4 are)")]
    UnsupportedOrder(usize),

    #[error("dimension {dim} exceeds the limit {limit} of this routine")]
    UnsupportedDimension { dim: usize, limit: usize },

    #[error("unknown catalogue problem `{0}`")]
    NotFound(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("runtime invariant violated: {0}")]
    InvariantViolation(String),

    #[error("outer iteration limit of {limit} reached")]
    OuterLimit { limit: usize },

    /// The inner trust-region loop ran out of iterations; the trace of the
    /// aborted run is attached.
    #[error("iteration limit of {limit} reached")]
    MaxIterExceeded { limit: usize, trace: Box<InnerTrace> },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
