use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Two pairs with the same sum; `modulus` 0 means the sums are plain integers.
#[derive(Debug, Clone, PartialEq)]
pub struct SumCollision {
    pub modulus: u64,
    pub a1: BigInt,
    pub b1: BigInt,
    pub a2: BigInt,
    pub b2: BigInt,
}

impl std::fmt::Display for SumCollision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let SumCollision {
            modulus,
            a1,
            b1,
            a2,
            b2,
        } = self;
        if *modulus == 0 {
            write!(f, ": {a1}+{b1} = {a2}+{b2}")
        } else {
            write!(f, "modulo {modulus}: {a1}+{b1} and {a2}+{b2}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(u64),
    #[error("duplicate digit {0}")]
    DuplicateDigit(BigInt),
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("sums collide {0}")]
    DistinctnessFailure(Box<SumCollision>),
    #[error("duplicate residue {residue} modulo {modulus}")]
    DuplicateResidue { modulus: u64, residue: u64 },
    #[error("negative exponent {0} in mask polynomial")]
    NegativeExponent(BigInt),
    #[error("exponent {0} does not fit in 64 bits")]
    ExponentOverflow(BigInt),
    #[error("modulus overflow: {0}")]
    ModulusOverflow(String),
    #[error("empty digit set")]
    EmptyDigitSet,
    #[error("digit set {0} does not contain 0")]
    MissingZero(String),
    #[error("cyclotomic coverage failure: {0}")]
    CoverageFailure(String),
    #[error("overlap at stage {stage}: digit {digit} produced twice")]
    OverlapError { stage: usize, digit: BigInt },
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("no layer set at stage {stage} for parent {parent}")]
    MissingLayer { stage: usize, parent: BigInt },
    #[error("validation failed: {0}")]
    ValidationFailure(String),
    #[error("t = {t} is divisible by beta = {beta}")]
    TDivisibleByBeta { t: u64, beta: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid variant parameters: {0}")]
    InvalidVariantParams(String),
    #[error("kernel polynomial does not divide the mask: {0}")]
    KernelDivisibilityFailure(String),
    #[error("no spectrum available for factor {0}")]
    SpectrumUnavailable(usize),
    #[error("parts do not form a complete residue system modulo {0}")]
    NotCompleteResidues(u64),
    #[error("CM condition failure on {subject}: {condition}")]
    CMConditionFailure { subject: String, condition: String },
    #[error("tail bound unavailable: linearization parameter {0} too large, raise the depth")]
    TailBoundUnavailable(f64),
    #[error("no shift in window {window} met the ratio threshold for gamma = {gamma}")]
    ShiftSearchFailure { gamma: i128, window: i64 },
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
