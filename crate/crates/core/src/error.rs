use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("classes belong to different algebras")]
    AlgebraMismatch,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("malformed algebra: {0}")]
    Malformed(String),
    #[error("series has non-unit leading term")]
    NonUnitSeries,
    #[error("element is not nilpotent of order {0}")]
    NotNilpotent(usize),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("morphism is not proper")]
    NotProper,
    #[error("rank/codimension mismatch: bundle rank {rank}, codimension {codim}")]
    RankCodim { rank: usize, codim: usize },
    #[error("not a ring homomorphism: {0}")]
    NotRingMap(String),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("recipe is not relative to the given base: {0}")]
    NotBaseRelative(String),
    #[error("no coefficient solution: {0}")]
    NoSolution(String),
    #[error("ambiguous coefficient solution: {0}")]
    Ambiguous(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
