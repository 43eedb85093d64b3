use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("requested {requested} bits exceeds the precision cap of {cap} bits")]
    CapExceeded { requested: u32, cap: u32 },

    #[error("decimal literal {literal} cannot be refined to {requested} bits")]
    LiteralPrecision { literal: String, requested: u32 },

    #[error("could not decide {what} at the precision cap")]
    Undecided { what: String },

    #[error("{0} is rational; the quantity is not well defined")]
    RationalInput(String),

    #[error("{0} is a decimal literal; pass the literal override to use it here")]
    LiteralRejected(String),

    #[error("linear dependence detected: ‖{k1}·γ + {k2}·β‖ = 0")]
    Dependence { k1: i64, k2: i64 },

    #[error("ψ value {0} is outside (0, 1/2)")]
    PsiOutOfRange(String),

    #[error("{q} is below the domain start {q0}")]
    Domain { q: u64, q0: u64 },

    #[error("{r} does not divide {q}")]
    NotADivisor { q: u64, r: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("denominator is zero: {0}")]
    ZeroDenominator(String),
}
