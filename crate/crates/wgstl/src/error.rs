//! Error and result types shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of graph construction, dataset handling, formula
/// parsing/evaluation, differentiation, training, and (de)serialization.
#[derive(Debug, Error)]
pub enum Error {
    // ---- graphs -----------------------------------------------------------
    /// A node identifier was declared more than once.
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    /// An operation referenced a node that is not part of the graph.
    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    /// An edge connected a node to itself.
    #[error("self-loop on node `{0}` is not allowed")]
    SelfLoop(String),

    /// An edge referenced an undeclared endpoint.
    #[error("edge endpoint `{0}` is not a declared node")]
    UnknownEndpoint(String),

    /// A coordinate used for the radius graph was NaN or infinite.
    #[error("non-finite coordinate for node `{0}`")]
    NonFiniteCoordinate(String),

    /// The radius passed to the radius-graph builder was not a positive real.
    #[error("radius must be a positive finite number of kilometres, got {0}")]
    BadRadius(f64),

    // ---- datasets ---------------------------------------------------------
    /// The operation requires at least one sample.
    #[error("dataset is empty")]
    EmptyDataset,

    /// A sample label was outside {-1, +1}.
    #[error("label must be -1 or +1, got {0}")]
    BadLabel(i64),

    /// Dimension counts disagreed (e.g. model d vs dataset d).
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// Trajectory lengths disagreed across nodes or samples.
    #[error("horizon mismatch: expected {expected} steps, got {got}")]
    HorizonMismatch { expected: usize, got: usize },

    /// Structural problem in a dataset or trajectory (shape, missing node, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A value consumed by evaluation was NaN or infinite. Missing entries
    /// must be imputed before formulas are evaluated.
    #[error("non-finite value at node `{node}`, time step {step} (impute missing values first)")]
    NonFiniteValue { node: String, step: usize },

    /// The requested window length does not fit in the trajectory.
    #[error("window length {window} exceeds available length {available}")]
    WindowTooLong { window: usize, available: usize },

    /// The train fraction passed to `split` was outside (0, 1).
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),

    // ---- formulas ---------------------------------------------------------
    /// Text that does not conform to the structure grammar.
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    /// A structurally invalid formula template (e.g. no temporal or no graph
    /// operator anywhere in the tree).
    #[error("invalid formula template: {0}")]
    InvalidTemplate(String),

    /// A temporal interval with k1 > k2.
    #[error("malformed interval [{k1}, {k2}]: lower bound exceeds upper bound")]
    BadInterval { k1: usize, k2: usize },

    /// A formula referenced a predicate with no declaration/values.
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    /// An operator assignment did not cover exactly the flexible slots of the
    /// template it was applied to.
    #[error("operator assignment mismatch: {0}")]
    AssignmentMismatch(String),

    /// A graph quantifier was evaluated at a node without neighbors; the
    /// aggregation over an empty neighbor set is undefined.
    #[error("graph quantifier at node `{0}` which has no neighbors")]
    NoNeighbors(String),

    /// Evaluation would index time steps beyond the trajectory horizon.
    #[error("formula needs time step {need} but the trajectory horizon is {have}")]
    HorizonExceeded { need: usize, have: usize },

    // ---- differentiation --------------------------------------------------
    /// Aggregation over an empty group.
    #[error("soft aggregation over an empty group")]
    EmptyAggregation,

    /// σ must be a positive finite real.
    #[error("smoothness parameter sigma must be positive and finite, got {0}")]
    BadSigma(f64),

    /// Importance weights fed to the aggregation must be strictly positive.
    #[error("importance weights must be strictly positive, got {0}")]
    BadWeight(f64),

    /// Two paired vectors had different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A parameter slot lookup failed.
    #[error("unknown parameter slot `{0}`")]
    UnknownSlot(String),

    // ---- training ---------------------------------------------------------
    /// Training requires both positive and negative samples.
    #[error("dataset contains a single class; training needs both labels")]
    SingleClass,

    /// The loss became NaN or infinite during training.
    #[error("non-finite loss in {stage} at epoch {epoch}: {detail}")]
    NonFiniteLoss {
        stage: &'static str,
        epoch: usize,
        detail: String,
    },

    /// An invalid hyperparameter combination.
    #[error("invalid training configuration: {0}")]
    BadConfig(String),

    /// A sample, dataset, or graph is not compatible with the model.
    #[error("incompatible input: {0}")]
    Incompatible(String),

    // ---- synthesis --------------------------------------------------------
    /// Rejection sampling failed to produce the requested samples, which
    /// usually signals an unsatisfiable margin/formula combination.
    #[error(
        "synthesis gave up after {attempts} attempts \
         ({missing_pos} positive and {missing_neg} negative samples missing)"
    )]
    SynthExhausted {
        attempts: usize,
        missing_pos: usize,
        missing_neg: usize,
    },

    // ---- files ------------------------------------------------------------
    /// A model file with an unsupported format version.
    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    /// Structured-file schema violation, with the path to the offending field.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wrap a `serde_path_to_error` failure into [`Error::Schema`].
    pub(crate) fn schema<E: std::fmt::Display>(err: serde_path_to_error::Error<E>) -> Self {
        Error::Schema {
            path: err.path().to_string(),
            message: err.inner().to_string(),
        }
    }
}
