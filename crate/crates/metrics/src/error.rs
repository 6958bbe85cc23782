use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("need at least two categories, found {0}")]
    TooFewCategories(usize),

    #[error("chance agreement equals 1; coefficient undefined")]
    DegenerateChance,

    #[error("design matrix is rank deficient: column {column} is collinear with {with:?}")]
    RankDeficient { column: String, with: Vec<String> },

    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("score {value} outside declared scale [{min}, {max}]")]
    OutOfScale { value: f64, min: f64, max: f64 },
}
