use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid source model: {0}")]
    InvalidModel(String),

    #[error("index {index} out of range for a class of size {size}")]
    IndexOutOfRange { index: String, size: String },

    #[error("payload length {0} is not a set bit of the class size expansion")]
    InvalidDelta(u32),

    #[error("payload value does not fit in {0} bits")]
    PayloadOutOfRange(u32),

    #[error("class size must be positive")]
    NonPositive,

    #[error("block length {0} is invalid, need at least 2")]
    InvalidBlockLength(usize),

    #[error("unknown scheme {0:?}, expected st2 or stn")]
    UnknownScheme(String),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("outcome space of {size} blocks exceeds the enumeration limit of {limit}")]
    SpaceTooLarge { size: String, limit: u64 },

    #[error("fewer than two cells remain after pooling")]
    DegenerateCells,

    #[error("malformed payload frame: {0}")]
    BadFrame(String),
}

impl Error {
    pub(crate) fn unknown_token(token: &[u8]) -> Self {
        Error::UnknownSymbol(String::from_utf8_lossy(token).into_owned())
    }
}
