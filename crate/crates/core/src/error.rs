//! One error type for the whole library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {order} exceeds the configured bound {bound}")]
    OrderBound { order: u128, bound: u64 },
    #[error("no embedding F_{p}^{k} -> F_{p2}^{m}")]
    NoEmbedding { p: u64, k: usize, p2: u64, m: usize },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("constant polynomial not allowed here")]
    ConstantPolynomial,
    #[error("zero form not allowed here")]
    ZeroForm,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("degree {degree} exceeds the configured bound {bound}")]
    DegreeBound { degree: usize, bound: usize },
    #[error("degree must be positive in the elimination variable")]
    DegreeZeroInVariable,
    #[error("enumeration of {size} points exceeds the configured bound {bound}")]
    EnumerationBound { size: u128, bound: u64 },
    #[error("sweep over {classes} classes exceeds the configured bound {bound}")]
    SweepBound { classes: u128, bound: u64 },
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("statistic {stat} cannot be evaluated against {variety}")]
    StatisticMismatch { stat: String, variety: String },
    #[error("section form vanishes on a component of the variety")]
    VanishesOnVariety,
    #[error("input is not irreducible over its base field: {0}")]
    NotIrreducible(String),
    #[error("input is not squarefree over its base field: {0}")]
    NotSquarefree(String),
    #[error("no stable answer after {tries} attempts: {what}")]
    Indeterminate { what: String, tries: usize },
    #[error("no nonzero solution space for any degree <= {d_max}")]
    NoKernel { d_max: usize },
    #[error("search exhausted its budget: {0}")]
    NotFound(String),
    #[error("point {point} does not lie on the variety")]
    PointNotOnVariety { point: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// One-line machine-parsable reason, used verbatim in failure records.
    pub fn reason(&self) -> String {
        let code = match self {
            Error::NotPrime(_) => "not-prime",
            Error::OrderBound { .. } => "order-bound",
            Error::NoEmbedding { .. } => "no-embedding",
            Error::FieldMismatch => "field-mismatch",
            Error::ZeroPolynomial => "zero-polynomial",
            Error::ConstantPolynomial => "constant-polynomial",
            Error::ZeroForm => "zero-form",
            Error::Parse(_) => "parse",
            Error::NotHomogeneous(_) => "not-homogeneous",
            Error::DegreeBound { .. } => "degree-bound",
            Error::DegreeZeroInVariable => "degree-zero-in-variable",
            Error::EnumerationBound { .. } => "enumeration-bound",
            Error::SweepBound { .. } => "sweep-bound",
            Error::ZeroTrials => "zero-trials",
            Error::StatisticMismatch { .. } => "statistic-mismatch",
            Error::VanishesOnVariety => "vanishes-on-variety",
            Error::NotIrreducible(_) => "not-irreducible",
            Error::NotSquarefree(_) => "not-squarefree",
            Error::Indeterminate { .. } => "indeterminate",
            Error::NoKernel { .. } => "no-kernel",
            Error::NotFound(_) => "not-found",
            Error::PointNotOnVariety { .. } => "point-not-on-variety",
            Error::Invalid(_) => "invalid",
        };
        format!("code={} msg={}", code, self)
    }

    /// Failed searches and unstable votes are outcomes, not usage errors.
    pub fn is_outcome(&self) -> bool {
        matches!(
            self,
            Error::Indeterminate { .. } | Error::NoKernel { .. } | Error::NotFound(_)
        )
    }
}
