use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: vertex {unreached} is not reachable from vertex 0")]
    DisconnectedGraph { unreached: usize },

    #[error("negative weight {weight} on edge ({x}, {y})")]
    NegativeWeight { x: usize, y: usize, weight: f64 },

    #[error("edge ({x}, {y}) given with conflicting weights {first} and {second}")]
    AsymmetricWeight { x: usize, y: usize, first: f64, second: f64 },

    #[error("vertex {0} has zero measure")]
    ZeroMeasureVertex(usize),

    #[error("empty graph")]
    EmptyGraph,

    #[error("function has a component on ker(Δ) (relative mean {relative_mean:.3e})")]
    KernelComponent { relative_mean: f64 },

    #[error("{what}: tolerance {tol:.3e} not reached (best {achieved:.3e})")]
    NonConvergent { what: &'static str, achieved: f64, tol: f64 },

    #[error("tuple entry {value} outside [{lo}, {hi}]")]
    BadTuple { value: usize, lo: usize, hi: usize },

    #[error("sets E and F overlap")]
    OverlappingSets,

    #[error("molecule factorization mismatch (relative error {0:.3e})")]
    FactorizationMismatch(f64),

    #[error("size bound violated on annulus C_{j}: {measured:.6e} > {bound:.6e}")]
    SizeBoundViolated { j: usize, measured: f64, bound: f64 },

    #[error("form is not exact (projection residual {0:.3e})")]
    NotExactForm(f64),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
