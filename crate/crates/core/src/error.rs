use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bit strings must have at least one symbol")]
    Empty,

    #[error("length {len} exceeds the supported maximum of {max} bits")]
    TooLong { len: u32, max: u32 },

    #[error("invalid bit string {0:?}: expected one or more of [01]")]
    Parse(String),

    #[error("value {value} does not fit in {len} bits")]
    ValueOutOfRange { value: u128, len: u32 },

    #[error("requested {requested} symbols from a {len}-bit string")]
    LengthExceeded { requested: u32, len: u32 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: u32, right: u32 },

    #[error("offset {offset} out of range for {len}-bit strings (|c| must be < 2^{len})")]
    OffsetOutOfRange { offset: i128, len: u32 },

    #[error("no correction in {{-2..2}} maps overlap {suffix} onto {prefix} (window {index})")]
    OverlapMismatch {
        /// 1-based index of the window being corrected.
        index: usize,
        suffix: String,
        prefix: String,
    },

    #[error("string of length {got} does not match plan length {expected}")]
    PlanMismatch { expected: u32, got: u32 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("register of {t} qubits exceeds the {max}-qubit limit of this backend")]
    RegisterTooLarge { t: u32, max: u32 },

    #[error("invalid phase: {0}")]
    InvalidPhase(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
