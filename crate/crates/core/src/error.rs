use thiserror::Error;

/// Errors raised by tensor algebra, decompositions, solvers and I/O.
///
/// Fourier indices are zero-based: index 0 is the DC slice.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Fourier slice {index} is singular ({detail})")]
    SingularSlice { index: usize, detail: String },

    #[error("input is not orthonormal: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotOrthonormal { residual: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("conjugate symmetry violated: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    ConjugateSymmetry { defect: f64, tol: f64 },

    #[error("imaginary residue {residue:.3e} exceeds tolerance {tol:.3e}")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("filter tube {tube} is not invertible at Fourier slice {index}")]
    FilterNotInvertible { tube: usize, index: usize },

    #[error("T-GSVD structure is not uniform: {0}")]
    NonUniformStructure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed T3B data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
