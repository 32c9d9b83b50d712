use thiserror::Error;

/// Errors raised by the library. `kind()` gives the stable machine-readable
/// tag used in CLI error payloads.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("atom {atom} has a mass that is not the square of a rational")]
    NonSquareAtom { atom: String },
    #[error("value prime {0} is not supported by the default Rademacher construction; supply custom factors")]
    UnsupportedPrime(u64),
    #[error("integrand is finer than the stochastic measure: {0}")]
    RefineRequired(String),
    #[error("division by zero on atom {atom}")]
    DivisionByZero { atom: String },
    #[error("character matrix for the chosen times is singular")]
    TimesDegenerate,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("identity violated: {0}")]
    IdentityViolation(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Domain(_) => "domain",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::NonSquareAtom { .. } => "non-square-atom",
            Error::UnsupportedPrime(_) => "unsupported-prime",
            Error::RefineRequired(_) => "refine-xi-required",
            Error::DivisionByZero { .. } => "division-by-zero",
            Error::TimesDegenerate => "times-degenerate",
            Error::Parse(_) => "parse",
            Error::IdentityViolation(_) => "identity-violation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
