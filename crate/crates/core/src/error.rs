use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order window is empty (order {order} < valuation {valuation})")]
    EmptyWindow { valuation: i64, order: i64 },
    #[error("leading coefficient vanishes; series is not a unit")]
    NotAUnit,
    #[error("exponent denominators {0} and {1} are incompatible for this operation")]
    DenomMismatch(u32, u32),
    #[error("coefficient precision contexts differ")]
    ContextMismatch,
    #[error("index {m} is not coprime to level {level}")]
    NotCoprime { m: i64, level: u64 },
    #[error("bad eta quotient: {0}")]
    BadEtaIndex(String),
    #[error("finite-difference step {h} outside the admissible range")]
    StepTooSmall { h: f64 },
    #[error("series does not converge at this point (|q| = {abs_q})")]
    NonConvergent { abs_q: f64 },
    #[error("point is a pole of the function")]
    PoleOnSupport,
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("need coefficients up to n = {needed}, have {have}")]
    InsufficientCoefficients { needed: i64, have: i64 },
    #[error("tau is numerically degenerate: {0}")]
    DegenerateTau(String),
    #[error("residue {value} is not within tolerance of an integer")]
    ResidueNotIntegral { value: String },
    #[error("Gram matrix of the basis is singular")]
    BasisDegenerate,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("lattice basis is rank deficient")]
    RankDeficient,
    #[error("precision insufficient; retry with at least {recommended} digits")]
    PrecisionInsufficient { recommended: u32 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("basis is not usable: {0}")]
    BadBasis(String),
    #[error("eigen decomposition failed: {0}")]
    EigenFailure(String),
    #[error("form is not in the span of the basis (residual {residual:e})")]
    NotInSpan { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
