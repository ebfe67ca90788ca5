use thiserror::Error;

/// Errors raised by the library. Report states (a failed typicality check,
/// an inconclusive domination test) are not errors; they live in the
/// corresponding report types.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transition matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },

    #[error("transition matrix entry ({row}, {col}) = {value} is not 0 or 1")]
    InvalidEntry { row: usize, col: usize, value: i64 },

    #[error("symbol {symbol} has an empty {which}")]
    StrandedSymbol { symbol: usize, which: &'static str },

    #[error("transition matrix is not primitive: entry ({row}, {col}) of Q^{power} is zero")]
    NotPrimitive { row: usize, col: usize, power: usize },

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("symbol {symbol} is outside the alphabet 1..={k}")]
    SymbolOutOfRange { symbol: usize, k: usize },

    #[error("word {word} is not admissible")]
    Inadmissible { word: String },

    #[error("word length must be at least 1")]
    ZeroLength,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix {index} is not invertible (|det| = {det:e})")]
    Singular { index: usize, det: f64 },

    #[error("exterior degree {t} outside 1..={d}")]
    DegreeOutOfRange { t: usize, d: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration budget exceeded: {required} words needed, budget is {budget}; {hint}")]
    BudgetExceeded { required: f64, budget: u64, hint: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search exhausted: {detail}; worst word {worst_word}")]
    SearchExhausted { worst_word: String, detail: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
