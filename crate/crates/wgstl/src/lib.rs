//! Learning and monitoring weighted graph-based signal temporal logic
//! (w-GSTL) formulas over networked time series.
//!
//! A *graph-based trajectory* assigns a `d`-dimensional value to every
//! (node, time step) pair of a fixed undirected graph. w-GSTL describes such
//! trajectories with linear predicates over node values, Boolean
//! connectives, temporal windows (`always`/`eventually` over a discrete
//! interval), and neighbor quantifiers (`forall`/`exists` over a node's
//! neighbors) — every operator carrying positive importance weights that
//! express how much each subformula, time step, or neighbor matters.
//!
//! The crate has two evaluation engines and a learner:
//!
//! - **Crisp semantics** ([`logic::crisp`]): exact Boolean satisfaction and
//!   min/max robustness, the reference monitor.
//! - **Smooth semantics** ([`diff`]): every min/max replaced by a weighted
//!   soft aggregation with temperature σ, differentiable end to end, with
//!   exact reverse-mode gradients.
//! - **Learning** ([`train`]): given a formula *template* whose temporal and
//!   graph operator kinds may be left undetermined (`tempX`/`graphX` in the
//!   structure text), a two-step procedure first learns each undetermined
//!   operator from the sign of a continuous relaxation coefficient, then
//!   retrains predicates and importance weights with the operators fixed.
//!   The result is an interpretable classifier: a formula whose learned
//!   weights rank the influence of time steps, neighbors, and subformulas.
//!
//! # Example
//!
//! ```
//! use wgstl::data::{Dataset, Sample, Trajectory};
//! use wgstl::graph::Graph;
//! use wgstl::logic::parse_structure;
//! use wgstl::train::{train, TrainConfig};
//!
//! // Two nodes; classify by the neighbor's value staying positive.
//! let graph = Graph::new(["a", "b"], [("a", "b")])?;
//! let mut samples = Vec::new();
//! for i in 0..6 {
//!     let up = 1.0 + 0.1 * i as f64;
//!     for sign in [1.0_f64, -1.0] {
//!         let values = vec![
//!             vec![vec![0.0], vec![0.0], vec![0.0]], // node a (root)
//!             vec![vec![sign * up], vec![sign * (up + 0.2)], vec![sign * up]],
//!         ];
//!         samples.push(Sample::new(
//!             Trajectory::new(values)?,
//!             if sign > 0.0 { 1 } else { -1 },
//!         )?);
//!     }
//! }
//! let dataset = Dataset::new(graph, vec!["x".into()], samples)?;
//!
//! // `tempX`/`graphX` are operator slots to be learned.
//! let template = parse_structure("(tempX [0 2] (graphX (pred p)))")?;
//! let config = TrainConfig { epochs: 40, batch_size: 4, ..TrainConfig::default() };
//! let model = train(&dataset, &template, "a", &config)?;
//! assert_eq!(model.evaluate(&dataset)?, 100.0);
//! println!("{}", model.formula_text()?);
//! # Ok::<(), wgstl::Error>(())
//! ```
//!
//! # Structure text
//!
//! Formulas and templates are written as S-expressions:
//!
//! ```text
//! (or (tempX [0 6] (graphX (pred p1)))
//!     (not (tempX [7 14] (graphX (pred p2)))))
//! ```
//!
//! with operators `pred`, `not`, `and`, `or`, `always`/`eventually`/`tempX`
//! (followed by `[k1 k2]`), and `forall`/`exists`/`graphX`. `;` starts a
//! line comment. A valid template contains at least one temporal and one
//! graph operator.

pub mod data;
pub mod diff;
pub mod error;
pub mod generate;
pub mod graph;
pub mod logic;
pub mod synth;
pub mod train;

pub use data::{impute_zeros, split, window, Dataset, LabelRule, Sample, Trajectory};
pub use diff::{backward, forward, soft_aggregate, EvalMode, EvalTrace, Gradients, ParamStore, SlotKey};
pub use error::{Error, Result};
pub use graph::{haversine_km, radius_graph, Graph, EARTH_RADIUS_KM};
pub use logic::{
    boolean_sat, crisp_robustness, parse_structure, print_formula, print_hardened,
    print_structure, Expr, FormulaTemplate, GraphKind, HardExpr, OperatorAssignment, Predicate,
    TemporalKind,
};
pub use synth::{operator_recovery_dataset, synth_dataset, OperatorCombo};
pub use train::{
    classify, evaluate, loss, step1_learn_operators, step2_learn_parameters, train, TrainConfig,
    TrainedModel, TrainingLog,
};
