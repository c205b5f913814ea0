use thiserror::Error;

use crate::variety::Variety;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variety mismatch: expected {expected}, found {found}")]
    VarietyMismatch { expected: Variety, found: Variety },

    #[error("no builtin distributive law for {variety} over {shape}")]
    UnsupportedLaw { variety: Variety, shape: String },

    #[error("output labels do not form a join-semilattice: {0}")]
    NotSemilattice(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("the carrier of a free {0} algebra is infinite; a counter bound is required")]
    InfiniteCarrier(Variety),

    #[error("carrier too large: {size} generators (limit {limit})")]
    CarrierTooLarge { size: usize, limit: usize },

    #[error("invalid node: {0}")]
    InvalidNode(String),

    #[error("shape or law mismatch: {0}")]
    LawMismatch(String),

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("maps do not form a split quotient: {0}")]
    NotSplit(String),

    #[error("parameters of the first equation are not the free algebra on the variables of the second")]
    ParamsNotFree,

    #[error("structure map is not monotone: {0}")]
    NonMonotone(String),

    #[error("structure does not split as [a, h]: {0}")]
    StructureNotSplit(String),

    #[error("parameter has no coalgebra representative: {0}")]
    NoRepresentative(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
