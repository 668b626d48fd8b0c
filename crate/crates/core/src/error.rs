use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no NTT-friendly prime below 2^{bits} for degree {n}")]
    NoPrimeFound { n: usize, bits: u32 },

    #[error("invalid degree {0}: must be a power of two in the supported range")]
    InvalidDegree(usize),

    #[error("invalid modulus {q}: {reason}")]
    InvalidModulus { q: u64, reason: &'static str },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("invalid NTT plan: {0}")]
    InvalidPlan(String),

    #[error("sponge already finalized; absorb is not allowed after squeezing")]
    SpongeFinalized,

    #[error("bank configuration does not match plan: {0}")]
    ConfigMismatch(String),

    #[error("schedule violation at step {step}: {reason}")]
    ScheduleViolation { step: usize, reason: String },

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("domain mismatch: expected {expected} domain")]
    DomainMismatch { expected: &'static str },

    #[error("value {value} overflows the fixed-point range at scale 2^{scale_bits}")]
    ScaleOverflow { value: f64, scale_bits: u32 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
