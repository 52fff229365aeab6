use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid decoration space: {0}")]
    InvalidSpace(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("slice ({i}, {j}) is not a vertex of the simplex")]
    NonOneHotRow { i: usize, j: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("layer {layer} is not symmetric with a zero diagonal at ({i}, {j})")]
    AsymmetricLayer { layer: usize, i: usize, j: usize },
    #[error("decoration space of size {0} is not a binary multiplex coding")]
    NotAPowerOfTwoSpace(usize),
    #[error("not a point of the probability simplex: {0:?}")]
    NotASimplexPoint(Vec<f64>),
    #[error("coordinate ({x}, {y}) outside the unit square")]
    OutOfDomain { x: f64, y: f64 },
    #[error("shape {0} has no off-diagonal pairs")]
    EmptyShape(usize),
    #[error("k = {k} is too large for n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("no admissible group count for n = {0}")]
    GridEmpty(usize),
    #[error("array shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("latent vector has length {got}, expected {expected}")]
    XiMismatch { expected: usize, got: usize },
    #[error("fit does not use a two-layer binary decoration space")]
    NotBivariateCoding,
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no nodes left after degree filtering")]
    EmptyAfterFilter,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
