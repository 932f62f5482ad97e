use thiserror::Error;

/// Errors raised by the arithmetic, linear algebra and cohomology engines.
///
/// Every variant that stems from finite precision names the precision that
/// was insufficient, so callers can retry at a higher cap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HkError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be at least 1, got {0}")]
    BadPrecision(i64),
    #[error("not an Eisenstein polynomial: {0}")]
    NotEisenstein(String),
    #[error("division by a value indistinguishable from zero (known to O(p^{prec}))")]
    DivisionByIndistinguishableZero { prec: i64 },
    #[error("valuation is ambiguous: value is zero to the known precision, ord >= {bound}")]
    AmbiguousValuation { bound: String },
    #[error("elements live over different fields")]
    FieldMismatch,
    #[error("not a one-unit: ord_pi(1 - v) = {0} < 1")]
    NotAOneUnit(String),
    #[error("not a unit: ord_pi = {0}")]
    NotAUnit(i64),
    #[error("branch element must have positive finite valuation, got ord_pi = {0}")]
    BadBranch(String),
    #[error("ambiguous pivot at row `{row}`, column `{col}`: entry is zero only to O(p^{prec})")]
    AmbiguousPivot { row: String, col: String, prec: String },
    #[error("cannot decide consistency at row `{row}`: residual known only to O(p^{prec})")]
    AmbiguousSolve { row: String, prec: String },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("window overflow: an input left the truncation window, refusing to certify")]
    TaintedWindow,
    #[error("target classes are not independent modulo coboundaries")]
    DependentBasis,
    #[error("image of `{class}` is not in the span of the target classes (row `{row}`)")]
    NotInSpan { class: String, row: String },
    #[error("`{0}` is not a cocycle")]
    NotACocycle(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, HkError>;
