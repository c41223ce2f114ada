use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem `{label}` has invalid dimension {dim}")]
    InvalidDimension { label: String, dim: usize },

    #[error("composite dimension {dim} exceeds the dense cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("expected {expected} amplitudes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("state norm is zero or not finite ({0})")]
    InvalidNorm(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not square or does not match layout dimension {0}")]
    BadMatrixShape(usize),

    #[error("partial trace needs a nonempty keep set; use the full trace instead")]
    EmptyKeepSet,

    #[error("segment duration must be positive and finite, got {0}")]
    InvalidDuration(f64),

    #[error("forward and backward states are orthogonal (|overlap| = {0:e}); not a valid two-state")]
    OrthogonalTwoState(f64),

    #[error("inconsistent boundary pair: no outcome connects initial and final states")]
    InconsistentBoundary,

    #[error("observable is degenerate (eigenvalue gap {0:e})")]
    DegenerateObservable(f64),

    #[error("basis is not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("basis is incomplete: {size} vectors for dimension {dim}")]
    IncompleteBasis { size: usize, dim: usize },

    #[error("encodings {0} and {1} collide (overlap {2:e} exceeds allowed {3:e})")]
    EncodingCollision(usize, usize, f64, f64),

    #[error("pointer is not in its ready state (ready weight {0})")]
    PointerNotReady(f64),

    #[error("macroscopic core violated: n = {n} collapsed of N = {total}")]
    MacroscopicCoreViolated { n: usize, total: usize },

    #[error("collapse of particle {0} onto an orthogonal state (gamma_1 = 0)")]
    OrthogonalCollapse(usize),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
