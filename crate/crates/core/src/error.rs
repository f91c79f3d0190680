use thiserror::Error;

/// Errors raised by the Toda lattice routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix size {n} is too small (need n >= 2)")]
    InvalidSize { n: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("subdiagonal entry b_{index} is zero; matrix is outside the phase space")]
    ZeroSubdiagonal { index: usize },
    #[error("eigenvalues are not strictly increasing at position {index}")]
    NotIncreasing { index: usize },
    #[error("spectrum is not real (imaginary part {imag:e})")]
    NonRealSpectrum { imag: f64 },
    #[error("spectrum is not simple (gap {gap:e} below separation tolerance)")]
    NonSimpleSpectrum { gap: f64 },
    #[error("bad index set: {0}")]
    BadIndex(String),
    #[error("component {k} of the cofactor vector is identically zero")]
    DegenerateComponent { k: usize },
    #[error("matrix of size {n} exceeds the exhaustive limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("matrix is not tridiagonal: entry ({row}, {col}) is nonzero")]
    NotTridiagonal { row: usize, col: usize },
    #[error("matrix is not totally nonnegative")]
    NotTnn,
    #[error("theta argument Z_{index} is not positive")]
    NonPositiveZ { index: usize },
    #[error("Jacobi point component {index} is zero")]
    ZeroComponent { index: usize },
    #[error("chop integral vanishes at eigenvalue {index}")]
    ZeroCofactorValue { index: usize },
    #[error("divisor is not general: tau_{k} vanishes")]
    NonGeneralDivisor { k: usize },
    #[error("leading principal minor {k} is singular")]
    SingularLeadingMinor { k: usize },
    #[error("flow blows up at t = {t} (tau_{k} vanishes)")]
    Blowup { t: f64, k: usize },
    #[error("tridiagonal structure lost (superdiagonal deviation {deviation:e})")]
    StructureLost { deviation: f64 },
    #[error("numerical blowup at t = {t}: |b| exceeded threshold")]
    Overflow { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
