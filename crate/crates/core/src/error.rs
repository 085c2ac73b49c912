use thiserror::Error;

use crate::compiler::CompilationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: String },

    #[error("matrix `{label}` is not unitary (|U^†U - I|_F = {deviation:e})")]
    NotUnitary { label: String, deviation: f64 },

    #[error("matrix `{label}` does not have unit determinant (|det - 1| = {deviation:e})")]
    NotSpecial { label: String, deviation: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),

    #[error("generator index {index} out of range for a set of {size}")]
    BadGenerator { index: usize, size: usize },

    #[error("net budget exceeded: reached {reached} entries (limit {limit})")]
    NetBudgetExceeded { reached: usize, limit: usize },

    #[error("search budget exceeded after {} candidates", .partial.searched)]
    SearchBudgetExceeded { partial: Box<CompilationResult> },

    #[error("empty net")]
    EmptyNet,

    #[error("empty grid")]
    EmptyGrid,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: impl ToString) -> Self {
        Error::OutOfRange {
            name,
            value: value.to_string(),
        }
    }

    /// True for errors that come from exceeding a size or time budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::NetBudgetExceeded { .. } | Error::SearchBudgetExceeded { .. }
        )
    }
}
