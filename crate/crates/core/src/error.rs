use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not a density matrix: {0}")]
    NotDensityMatrix(&'static str),

    #[error("outcome has zero probability")]
    ImpossibleOutcome,

    #[error("record has zero likelihood under every prior state")]
    DegenerateRecord,

    #[error("outcome index {index} outside alphabet of size {alphabet}")]
    InvalidOutcome { index: usize, alphabet: usize },

    #[error("enumerating {outcomes}^{steps} records exceeds the enumeration guard")]
    Capacity { outcomes: usize, steps: usize },

    #[error("integrator left the Bloch ball at step {step} (norm {norm})")]
    IntegratorBlowup { step: usize, norm: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
