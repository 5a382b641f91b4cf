use thiserror::Error;

/// Errors raised by the laboratory. Tolerance breaches carry the measured value.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision warning: {what} ({value:.3e} exceeds {tol:.3e})")]
    Precision { what: String, value: f64, tol: f64 },
    #[error("aliasing risk: coefficient of modulus {modulus:.3e} retained at the bandwidth edge {bandwidth}")]
    Aliasing { bandwidth: usize, modulus: f64 },
    #[error("box mismatch: {0}")]
    BoxMismatch(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("Jacobi sweeps did not converge: off-diagonal mass {off:.3e} after {sweeps} sweeps")]
    NoConvergence { off: f64, sweeps: usize },
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("wrap horizon exceeded: requested {requested}, horizon {horizon}")]
    Horizon { requested: usize, horizon: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
