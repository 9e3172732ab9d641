use alloc::string::String;
use alloc::vec::Vec;

use crate::C64;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not strictly positive (min eigenvalue {min_eig:.3e}, threshold {threshold:.3e})")]
    NotStrictlyPositive { min_eig: f64, threshold: f64 },

    #[error("operator does not have unit trace (trace {trace})")]
    NotUnitTrace { trace: C64 },

    #[error("scalar function undefined at eigenvalue {value:.6e}")]
    FunctionUndefined { value: f64 },

    #[error("power exponent {alpha} outside (0, 1]")]
    ExponentOutOfRange { alpha: f64 },

    #[error("custom monotone function was not attested as operator monotone")]
    MonotonicityNotAttested,

    #[error("monotone function is not positive at ratio {ratio:.6e} (value {value:.6e})")]
    NonPositiveMonotone { ratio: f64, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("singular value decomposition did not converge")]
    SvdNonConvergence,

    #[error("singular linear system")]
    SingularSystem,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model invariant violated: {what} (defect {defect:.3e}, tolerance {tolerance:.3e})")]
    InvariantViolation {
        what: &'static str,
        defect: f64,
        tolerance: f64,
    },

    #[error("peripheral eigenvalue {eigenvalue} is defective: geometric multiplicity {geometric} < algebraic multiplicity {algebraic}")]
    DefectivePeripheralPart {
        eigenvalue: C64,
        geometric: usize,
        algebraic: usize,
    },

    #[error("kernel at {eigenvalue} has dimension {geometric}, exceeding algebraic multiplicity {algebraic}; tolerances are inconsistent")]
    KernelExceedsMultiplicity {
        eigenvalue: C64,
        geometric: usize,
        algebraic: usize,
    },

    #[error(
        "picture mismatch at {eigenvalue}: schrodinger dimension {schrodinger}, heisenberg dimension {heisenberg}"
    )]
    PictureMismatch {
        eigenvalue: C64,
        schrodinger: usize,
        heisenberg: usize,
    },

    #[error("automatic T-state search needs a trace-preserving model")]
    TracePreservingRequired,

    #[error("no faithful T-state: maximal invariant state has rank {rank} of {dim}")]
    NoFaithfulTState {
        rank: usize,
        dim: usize,
        /// Orthonormal vectors spanning the kernel of the maximal invariant state.
        kernel: Vec<Vec<C64>>,
    },

    #[error("T-state defect is negative (min eigenvalue {min_eig:.3e})")]
    DefectNegative {
        min_eig: f64,
        /// Eigenvector of the defect operator belonging to `min_eig`.
        witness: Vec<C64>,
    },

    #[error("gram matrix numerically singular (pivot {pivot:.3e})")]
    SingularGram { pivot: f64 },

    #[error("spectral and structure spaces differ at {eigenvalue} (distance {distance:.3e})")]
    MismatchBeyondTolerance { eigenvalue: C64, distance: f64 },

    #[error("hermitian basis rank {rank} does not match attractor dimension {expected}")]
    BasisRankMismatch { rank: usize, expected: usize },

    #[error("state is not asymptotic for this model (residual {residual:.3e})")]
    NotAsymptotic { residual: f64 },

    #[error("log(rho) - log(sigma) is not in the basis span (residual {residual:.3e})")]
    NotForm2Representable { residual: f64 },

    #[error("coefficient count {found} does not match basis size {expected}")]
    CoefficientCount { expected: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
