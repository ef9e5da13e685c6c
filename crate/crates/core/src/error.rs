use thiserror::Error;

/// Errors raised by protocol misuse, malformed input, or honest-prover guards.
///
/// Verification failures are not errors: verifiers report a verdict instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("commitments were formed over different base pairs")]
    BaseMismatch,

    #[error("vector length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty vector where at least one entry is required")]
    EmptyVector,

    #[error("feature value {value} at index {index} does not fit in {bits} bits")]
    FeatureOutOfRange { index: usize, value: u64, bits: u32 },

    #[error("unsupported feature width {0} bits")]
    InvalidFeatureWidth(u32),

    #[error("range bit-length {bits} is not supported by this group (max {max})")]
    RangeBitsUnsupported { bits: u32, max: u32 },

    #[error("threshold {epsilon} outside the proving domain [1, 2^{bits}]")]
    ThresholdOutOfDomain { epsilon: u64, bits: u32 },

    #[error("value {value} is not below threshold {epsilon}; refusing to prove")]
    NotBelowThreshold { value: u64, epsilon: u64 },

    #[error("opening does not match the commitment")]
    OpeningMismatch,

    #[error("nonce {nonce} is not greater than the last used nonce {last}")]
    StaleNonce { nonce: u64, last: u64 },

    #[error("identity is already registered")]
    DuplicateIdentity,

    #[error("group profile mismatch: expected {expected}, found {found}")]
    ProfileMismatch { expected: String, found: String },

    #[error("unknown group profile {0:?}")]
    UnknownProfile(String),

    #[error("target distance {target} is not achievable with {len} features of {bits} bits")]
    UnachievableDistance { target: u64, len: usize, bits: u32 },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
