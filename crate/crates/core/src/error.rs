use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("incompatible fields: {0}")]
    Mismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shift {shift} lies within {distance:e} of eigenvalue {eigenvalue}")]
    NearSingular {
        shift: Complex64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("fractional power |D_P|^{s} is undefined: the spectrum contains a zero mode")]
    SingularPower { s: f64 },

    #[error("positive/negative splitting is undefined: eigenvalue {eigenvalue:e} is zero")]
    UndefinedSplitting { eigenvalue: f64 },

    #[error("degenerate quadratic form: {0}")]
    DegenerateForm(String),

    #[error("degenerate pairing: |Re (D phi, phi)| = {0:e}")]
    DegeneratePairing(f64),

    #[error("eigensolver failure: {0}")]
    Numerical(String),

    #[error("iteration diverged at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    #[error("problem scaling is undefined for p = 2")]
    UndefinedScaling,

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
