use qmpa_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("invalid document: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes. Stable: scripts depend on them.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const TSTATE: i32 = 5;
    pub const MISMATCH: i32 = 6;
    pub const REPRESENTABILITY: i32 = 7;
    pub const NUMERICAL: i32 = 8;
}

impl Error {
    /// Stable identifier used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
            Error::Format(_) => "format",
            Error::Usage(_) => "usage",
            Error::ChecksFailed { .. } => "checks_failed",
            Error::Core(e) => core_code(e),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse(_) => exit::PARSE,
            Error::Format(_) => exit::VALIDATION,
            Error::Usage(_) => exit::USAGE,
            Error::ChecksFailed { .. } => exit::CHECK_FAILED,
            Error::Core(e) => core_exit(e),
        }
    }
}

pub fn core_code(e: &CoreError) -> &'static str {
    use CoreError::*;
    match e {
        DimensionMismatch { .. } => "dimension_mismatch",
        NotSquare { .. } => "not_square",
        NotHermitian { .. } => "not_hermitian",
        NotStrictlyPositive { .. } => "not_strictly_positive",
        NotUnitTrace { .. } => "not_unit_trace",
        FunctionUndefined { .. } => "function_undefined",
        ExponentOutOfRange { .. } => "exponent_out_of_range",
        MonotonicityNotAttested => "monotonicity_not_attested",
        NonPositiveMonotone { .. } => "non_positive_monotone",
        EigenNonConvergence { .. } => "eigen_non_convergence",
        SvdNonConvergence => "svd_non_convergence",
        SingularSystem => "singular_system",
        InvalidModel(_) => "invalid_model",
        InvariantViolation { .. } => "invariant_violation",
        DefectivePeripheralPart { .. } => "defective_peripheral_part",
        KernelExceedsMultiplicity { .. } => "kernel_exceeds_multiplicity",
        PictureMismatch { .. } => "picture_mismatch",
        TracePreservingRequired => "trace_preserving_required",
        NoFaithfulTState { .. } => "no_faithful_tstate",
        DefectNegative { .. } => "defect_negative",
        SingularGram { .. } => "singular_gram",
        MismatchBeyondTolerance { .. } => "mismatch_beyond_tolerance",
        BasisRankMismatch { .. } => "basis_rank_mismatch",
        NotAsymptotic { .. } => "not_asymptotic",
        NotForm2Representable { .. } => "not_form2_representable",
        CoefficientCount { .. } => "coefficient_count",
    }
}

pub fn core_exit(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        DimensionMismatch { .. }
        | NotSquare { .. }
        | NotHermitian { .. }
        | InvalidModel(_)
        | InvariantViolation { .. }
        | ExponentOutOfRange { .. }
        | MonotonicityNotAttested
        | CoefficientCount { .. } => exit::VALIDATION,
        NotStrictlyPositive { .. }
        | NotUnitTrace { .. }
        | TracePreservingRequired
        | NoFaithfulTState { .. }
        | DefectNegative { .. } => exit::TSTATE,
        PictureMismatch { .. } | MismatchBeyondTolerance { .. } | BasisRankMismatch { .. } => exit::MISMATCH,
        NotAsymptotic { .. } | NotForm2Representable { .. } => exit::REPRESENTABILITY,
        FunctionUndefined { .. }
        | NonPositiveMonotone { .. }
        | EigenNonConvergence { .. }
        | SvdNonConvergence
        | SingularSystem
        | DefectivePeripheralPart { .. }
        | KernelExceedsMultiplicity { .. }
        | SingularGram { .. } => exit::NUMERICAL,
    }
}
