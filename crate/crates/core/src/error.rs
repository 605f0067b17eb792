use thiserror::Error;

/// Errors raised by the numerical kernels and the state pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("input is not Hermitian: |M[{row},{col}] - conj(M[{col},{row}])| = {deviation:e}")]
    NonHermitianInput { row: usize, col: usize, deviation: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator cannot be normalized (trace {trace:e})")]
    NotNormalizable { trace: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilityVector(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergent { sweeps: usize },

    #[error("non-finite value encountered in a numerical kernel")]
    NonFinite,

    #[error("two-qubit partial transpose has {count} negative eigenvalues")]
    DegenerateNegativeSpectrum { count: usize },

    #[error("state is PPT; no entanglement to decompose")]
    NotEntangled,

    #[error("normal-form iteration did not converge after {iterations} iterations")]
    NonConvergent { iterations: usize },

    #[error("operator is full rank (p3 = {p3:e}); no kernel state")]
    FullRankInput { p3: f64 },

    #[error("positive part already has rank 3")]
    RankAlready3,

    #[error("normal form is not Bell-diagonal")]
    NotBellDiagonal,

    #[error("largest weight p0 = {p0} is not below 1/2")]
    P0TooLarge { p0: f64 },

    #[error("certificate failure: {reason}")]
    CertificateFailure { reason: String, margins: Vec<(String, f64)> },

    #[error("section plane is degenerate")]
    DegeneratePlane,

    #[error("state file: {0}")]
    StateFile(String),
}

impl Error {
    /// Whether the error comes from a numerical breakdown rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergent { .. }
                | Error::NonFinite
                | Error::NonConvergent { .. }
                | Error::DegenerateNegativeSpectrum { .. }
                | Error::CertificateFailure { .. }
        )
    }
}

impl Error {
    /// Stable snake_case tag for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "non_hermitian_input",
            Error::Shape(_) => "shape",
            Error::NotPsd { .. } => "not_psd",
            Error::NotNormalizable { .. } => "not_normalizable",
            Error::InvalidProbabilityVector(_) => "invalid_probability_vector",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EigenNonConvergent { .. } => "eigen_non_convergent",
            Error::NonFinite => "non_finite",
            Error::DegenerateNegativeSpectrum { .. } => "degenerate_negative_spectrum",
            Error::NotEntangled => "not_entangled",
            Error::NonConvergent { .. } => "non_convergent",
            Error::FullRankInput { .. } => "full_rank_input",
            Error::RankAlready3 => "rank_already_3",
            Error::NotBellDiagonal => "not_bell_diagonal",
            Error::P0TooLarge { .. } => "p0_too_large",
            Error::CertificateFailure { .. } => "certificate_failure",
            Error::DegeneratePlane => "degenerate_plane",
            Error::StateFile(_) => "state_file",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
