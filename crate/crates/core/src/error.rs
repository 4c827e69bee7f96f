use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({0}, {1}) has a non-positive or non-finite weight")]
    NonPositiveWeight(usize, usize),

    #[error("generator {s} out of range (0 < s <= {half}) for n = {n}")]
    GeneratorOutOfRange { s: usize, n: usize, half: usize },

    #[error("duplicate generator {0}")]
    DuplicateGenerator(usize),

    #[error("bandwidth {bandwidth} must be below n/2 for n = {n}")]
    BandwidthTooLarge { bandwidth: usize, n: usize },

    #[error("generating set must contain the unit hop 1")]
    MissingUnitGenerator,

    #[error("representer polynomial with {len} coefficients does not fit n = {n}")]
    RepresenterTooLong { len: usize, n: usize },

    #[error("ambient sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e}, allowed {allowed:e})")]
    NotSymmetric { max_asymmetry: f64, allowed: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("cosupport covers every vertex; the nullspace is span{{1}}")]
    FullCosupport,

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("cycle needs at least 3 vertices, got {0}")]
    CycleTooSmall(usize),

    #[error("need at least {needed} support indices, got {found}")]
    SupportTooSmall { needed: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
