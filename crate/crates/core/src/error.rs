use core::fmt;

/// Failure modes of the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Mesh with fewer than two subintervals.
    InvalidMesh { n: usize },
    /// Basis index outside the admissible range for its kind.
    InvalidBasis { index: usize, n: usize },
    /// A negative diffusion, stabilization weight, or otherwise bad parameter.
    InvalidParameter(&'static str),
    /// Quadrature or function evaluation produced a non-finite value.
    NonFinite(&'static str),
    /// Direct factorization hit a zero pivot.
    Singular { row: usize },
    /// Schur complement of the saddle point system is not positive definite.
    InfSupFailure,
    /// The reduced system only decouples for an odd number of subintervals.
    NotDecoupled { n: usize },
    /// Adaptive quadrature could not reach the requested tolerance.
    Accuracy { estimate: f64, tolerance: f64 },
    /// Dimension mismatch between operands.
    Dimension { expected: usize, found: usize },
    /// Eigenvalue iteration did not converge.
    Eigen,
    /// A documented precondition does not hold.
    Precondition(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMesh { n } => write!(f, "mesh needs at least 2 subintervals, got {n}"),
            Error::InvalidBasis { index, n } => {
                write!(f, "basis index {index} out of range for n = {n}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::Singular { row } => write!(f, "singular system: zero pivot at row {row}"),
            Error::InfSupFailure => {
                write!(f, "saddle point Schur complement is singular (inf-sup failure)")
            }
            Error::NotDecoupled { n } => {
                write!(f, "reduced system decouples only for odd n, got n = {n}")
            }
            Error::Accuracy { estimate, tolerance } => write!(
                f,
                "quadrature tolerance {tolerance:e} not reached (estimate {estimate:e})"
            ),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Eigen => write!(f, "eigenvalue iteration did not converge"),
            Error::Precondition(what) => write!(f, "precondition violated: {what}"),
        }
    }
}


impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
