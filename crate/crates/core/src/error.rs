use thiserror::Error;

use crate::symbolic::Symbol;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("symbol {symbol} is out of range for an alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },
    #[error("alphabet mismatch: expected size {expected}, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },
    #[error("malformed transition matrix: {0}")]
    MalformedMatrix(String),
    #[error("system not mixing; weak specification unavailable")]
    NotMixing,
    #[error("no admissible filler of length {gap} joins {from} to {to}")]
    NoFiller { from: Symbol, to: Symbol, gap: usize },
    #[error("word is not admissible in the shift space")]
    Inadmissible,
    #[error("requested depth {requested} exceeds available depth {available}")]
    DepthShortfall { requested: usize, available: usize },
    #[error("depth {depth} over an alphabet of size {alphabet} is too large for a dense cylinder table")]
    DepthTooLarge { depth: usize, alphabet: usize },
    #[error("invalid probability data: {0}")]
    InvalidProbability(String),
    #[error("conditioning on null block")]
    NullConditioningBlock,
    #[error("invalid specification: {0}")]
    InvalidSpecification(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("stage {stage} admits no μ-typical segment")]
    NoGoodSegment { stage: usize },
    #[error("input is not quasi-generic at checkpoint {checkpoint}: distance {distance} exceeds {tolerance}")]
    NotQuasiGeneric {
        checkpoint: usize,
        distance: f64,
        tolerance: f64,
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("integer overflow: {0}")]
    Overflow(&'static str),
    #[error("measures not separated at supported depth")]
    NotSeparated,
    #[error("block support of size {0} exceeds the enumeration limit")]
    SupportTooLarge(usize),
    #[error("{0}")]
    InvalidArgument(String),
}
