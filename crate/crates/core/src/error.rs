use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Each variant maps onto a stable snake_case code (see [`Error::code`]) which the
/// command-line front end writes into its machine-readable error objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid dimension {dim}: {reason}")]
    BadDimension { dim: usize, reason: &'static str },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian: max deviation {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace_re} + {trace_im}i, expected 1")]
    BadTrace { trace_re: f64, trace_im: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("basis vectors {i} and {j} are not orthonormal: |<i|j> - delta| = {deviation:e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("operator is not a Hermitian projector: deviation {deviation:e}")]
    NotProjector { deviation: f64 },

    #[error("rank {rank} outside 1..={dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("overlap <b|a> vanishes{}: |<b|a>| = {magnitude:e}", fmt_pair(.pair))]
    SingularOverlap { pair: Option<(usize, usize)>, magnitude: f64 },

    #[error("marginal entry {index} has imaginary part {imag:e}")]
    ComplexMarginal { index: usize, imag: f64 },

    #[error("sample count must be at least 1")]
    BadSampleCount,

    #[error("epsilon must be non-zero and finite, got {epsilon}")]
    BadEpsilon { epsilon: f64 },

    #[error("dimension {dim} is even; the discrete Wigner kernel needs an odd dimension")]
    EvenDimension { dim: usize },

    #[error("invalid slits ({slit1}, {slit2}) for dimension {dim}")]
    BadSlits { dim: usize, slit1: usize, slit2: usize },

    #[error("Wigner table is not real: imaginary part {imag:e} at ({q}, {p})")]
    NonRealWigner { q: usize, p: usize, imag: f64 },

    #[error("invalid pointer configuration: {0}")]
    InvalidPointerConfig(String),

    #[error("pointer grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("post-selection probability {probability:e} is below {threshold:e}")]
    DegeneratePostselection { probability: f64, threshold: f64 },

    #[error("coupling must be non-zero")]
    ZeroCoupling,
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimMismatch { .. } => "dim_mismatch",
            Error::BadDimension { .. } => "bad_dimension",
            Error::NonFinite { .. } => "non_finite",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::BadTrace { .. } => "bad_trace",
            Error::NotPositive { .. } => "not_positive",
            Error::NotOrthonormal { .. } => "not_orthonormal",
            Error::NotProjector { .. } => "not_projector",
            Error::BadRank { .. } => "bad_rank",
            Error::SingularOverlap { .. } => "singular_overlap",
            Error::ComplexMarginal { .. } => "complex_marginal",
            Error::BadSampleCount => "bad_sample_count",
            Error::BadEpsilon { .. } => "bad_epsilon",
            Error::EvenDimension { .. } => "even_dimension",
            Error::BadSlits { .. } => "bad_slits",
            Error::NonRealWigner { .. } => "non_real_wigner",
            Error::InvalidPointerConfig(_) => "invalid_pointer_config",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::DegeneratePostselection { .. } => "degenerate_postselection",
            Error::ZeroCoupling => "zero_coupling",
        }
    }
}

fn fmt_pair(pair: &Option<(usize, usize)>) -> String {
    match pair {
        Some((a, b)) => format!(" for (a={a}, b={b})"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}
