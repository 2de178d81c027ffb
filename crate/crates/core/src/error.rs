use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by a quaternion of norm below the floor")]
    ZeroDivision,

    #[error("components T{i} and T{j} do not commute (residual {residual:.3e})")]
    CommutationViolation { i: usize, j: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is numerically singular (condition estimate {cond:.3e})")]
    SingularOperator { cond: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolverFailure,

    #[error("stem is not intrinsic: {0}")]
    NotIntrinsic(String),

    #[error("point {point} lies within {dist:.3e} of the pole {pole}")]
    PoleProximity { point: String, pole: f64, dist: f64 },

    #[error("function has no value at infinity")]
    MissingValueAtInfinity,

    #[error("cannot separate avoid point {point} from the spectrum")]
    CannotSeparate { point: f64 },

    #[error(
        "quadrature did not converge with {nodes} nodes: |I_N| = {last:.6e}, |I_N/2| = {previous:.6e}, gap {gap:.3e}"
    )]
    NoConvergence { nodes: usize, last: f64, previous: f64, gap: f64 },

    #[error("integrand is not finite at contour node s = {0}")]
    KernelSingularity(String),

    #[error("s lies on the sphere of q")]
    SphereCollision,

    #[error("{0} lies on the S-spectrum")]
    SpectrumHit(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Failures of a numerical method rather than of the request.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularOperator { .. }
                | Error::EigenSolverFailure
                | Error::NoConvergence { .. }
                | Error::KernelSingularity(_)
                | Error::ZeroDivision
        )
    }
}
