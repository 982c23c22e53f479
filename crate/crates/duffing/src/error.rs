//! Error type shared across the crate.

use crate::bvp::SolveReport;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A sampled path contains NaN or an infinity.
    #[error("non-finite sample")]
    NonFiniteSample,

    /// An exponent was outside (1, inf).
    #[error("exponent out of range")]
    ExponentOutOfRange,

    /// The scalar bisection for the operator inverse could not bracket a
    /// root below the safety radius (non-coercive custom profile).
    #[error("inverse out of bracket")]
    InverseOutOfBracket,

    /// A quotient against the norm of an identically-zero function.
    #[error("zero trial function")]
    ZeroTrialFunction,

    /// The one-dimensional oscillator integration blew up.
    #[error("eigenfunction integration failed")]
    EigenfunctionIntegrationFailed,

    #[error("hausdorff not closed-form for these kinds")]
    HausdorffUnsupported,

    #[error("projection unsupported")]
    ProjectionUnsupported,

    #[error("selection strategy unsupported")]
    SelectionUnsupported,

    /// Root solve for the integration constant failed to converge.
    #[error("shooting solve diverged")]
    ShootingDiverged,

    /// Picard iteration hit the iteration cap; the last iterate is attached
    /// so callers can inspect or continue from it.
    #[error("fixed point did not converge")]
    FixedPointDidNotConverge { last: Box<SolveReport> },

    /// The positivity-margin estimate came out nonpositive, which signals a
    /// weight-invariant breach or a grid too coarse to resolve the margin.
    #[error("positivity margin estimate nonpositive")]
    MarginEstimateNonpositive,

    /// Epsilon for the a-priori bound must lie in (0, lambda1 * c1).
    #[error("epsilon outside admissible window")]
    EpsilonOutsideWindow,

    /// The weight must stay below lambda1 * xi at every node.
    #[error("weight exceeds admissible bound")]
    WeightExceedsBound,

    /// The weight must be strictly below lambda1 * xi on at least one full
    /// grid subinterval.
    #[error("strict inequality set empty")]
    StrictInequalitySetEmpty,

    #[error("grid mismatch")]
    GridMismatch,

    #[error("dimension mismatch")]
    DimensionMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
