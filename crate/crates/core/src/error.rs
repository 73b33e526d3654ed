use thiserror::Error;

/// Errors raised by order-theoretic operations.
#[derive(Debug, Error)]
pub enum OrderError {
    #[error("element {element} does not belong to poset {poset}")]
    KindMismatch { poset: String, element: String },
    #[error("posets differ: {left} vs {right}")]
    PosetMismatch { left: String, right: String },
    #[error("no join exists for {left} and {right} in {poset}")]
    NoJoin {
        poset: String,
        left: String,
        right: String,
    },
    #[error("unknown label {label:?} in finite poset")]
    UnknownLabel { label: String },
}

/// Errors raised when composing or querying design problems.
#[derive(Debug, Error)]
pub enum DpError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("series composition: middle posets differ ({left} vs {right})")]
    MiddleMismatch { left: String, right: String },
    #[error("feedback wiring: resource factor {res} and functionality factor {fun} have different posets")]
    FeedbackMismatch { res: String, fun: String },
    #[error("feedback factor index out of range: {0}")]
    FeedbackIndex(usize),
    #[error("fixed-point iteration did not converge after {iters} iterations; last antichains had {prev} and {curr} elements")]
    NonConvergence {
        iters: usize,
        prev: usize,
        curr: usize,
    },
    #[error("sum node: merge {merge} is not applicable to poset {poset}")]
    BadMerge { merge: String, poset: String },
    #[error("sum node: negative weight {0}")]
    NegativeWeight(f64),
    #[error("empty implementation grid")]
    EmptyGrid,
    #[error("query not supported for this design problem structure: {0}")]
    Unsupported(&'static str),
}

/// Errors from the analytical lateral-control model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("configuration is not detectable (infinite observation noise)")]
    Undetectable,
    #[error("Riccati iteration did not converge; residual {residual:e}")]
    RiccatiDiverged { residual: f64 },
    #[error("covariance iteration did not converge; residual {residual:e}")]
    LyapunovDiverged { residual: f64 },
}

/// Errors from catalogue and table files.
#[derive(Debug, Error)]
pub enum CatalogueError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: checksum mismatch (file corrupted?)")]
    Checksum { path: String },
    #[error("{path}: row {row}: missing value for port {port:?}")]
    MissingColumn {
        path: String,
        row: usize,
        port: String,
    },
    #[error("{path}: unit mismatch for port {port:?}: declared {declared:?}, found {found:?}")]
    UnitMismatch {
        path: String,
        port: String,
        declared: String,
        found: String,
    },
}

/// Errors from parsing, validating or compiling diagram files.
#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("{0}")]
    Parse(crate::diagram::Diagnostic),
    #[error("diagram has {} validation error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<crate::diagram::Diagnostic>),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{loc}: {source}")]
    Compose {
        loc: String,
        #[source]
        source: DpError,
    },
}

/// Errors from the simulation layer.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("cannot aggregate an empty outcome list")]
    EmptyOutcomes,
}
