use crate::numeric::Rational;
use crate::space::Cell;

/// Library-wide error type.
///
/// Errors are data here: definedness failures and monotonicity violations are
/// expected outcomes that callers inspect, not panics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sum of opposite infinities is undefined")]
    UndefinedSum,

    #[error("cell {cell} does not belong to a {space} space")]
    ForeignCell { cell: String, space: String },

    #[error("monotone limits admit only nonnegative scaling, got {0}")]
    NegativeScale(Rational),

    #[error("stream is not non-decreasing at index {index}: decreases on {witness}")]
    NotMonotone { index: usize, witness: Cell },

    #[error("outer stream not termwise non-decreasing at outer index {outer}, term {term}")]
    OuterNotMonotone { outer: usize, term: usize },

    #[error("neither side of the difference carries a certified finite integral")]
    Definedness,

    #[error("term {index} is provably negative on {witness}")]
    NegativityWitness { index: usize, witness: Cell },

    #[error("term {index} escapes the dominating bound on {witness}")]
    DominationViolation { index: usize, witness: Cell },

    #[error("declared limit {declared} is inconsistent with computed partial {partial}")]
    BadDeclaration { declared: String, partial: String },

    #[error("every term integrates to -inf; a monotone limit needs one finite start")]
    AllTermsMinusInfinite,

    #[error("{0}")]
    Precondition(String),

    #[error("integral did not resolve to a value within the evaluation budget")]
    Unresolved,

    #[error("iterated and double integrals disagree: {0}")]
    FubiniMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
