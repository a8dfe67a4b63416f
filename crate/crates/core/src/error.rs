use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("zero vector does not generate a cyclic summand")]
    ZeroVector,
    #[error("the class group J is infinite for this backend")]
    InfiniteJ,
    #[error("profile has an infinite entry")]
    InfiniteProfile,
    #[error("profiles are over different primes")]
    MixedP,
    #[error("precision exhausted at {0} digits")]
    PrecisionExhausted(u32),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("a is a p-th power in the base field; the extension is not of degree p")]
    APthPower,
    #[error("class is not in the span of the presentation basis")]
    NotInSpan,
    #[error("element is not in F^x intersected with K^x^p")]
    NotInIntersection,
    #[error("element does not have norm one")]
    NormNotOne,
    #[error("Hilbert 90 resolvent vanished on every basis element")]
    ResolventVanished,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("decomposition assembly failed: {0}")]
    AssemblyFailed(String),
    #[error("invalid place: {0}")]
    InvalidPlace(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("backend failure: {0}")]
    BackendFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
