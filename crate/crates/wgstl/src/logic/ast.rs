//! Formula and formula-template ASTs.
//!
//! A [`FormulaTemplate`] is a weighted formula skeleton: its numeric slots
//! (predicate coefficients, importance weights) live in a separate parameter
//! store, and its temporal/graph operator kinds may be *flexible*
//! (undetermined), to be picked by training. Boolean connectives are always
//! fixed. Every template must contain at least one temporal and one graph
//! operator.
//!
//! Template nodes are addressed by their pre-order index, which is the stable
//! id used by parameter slots, operator assignments, and traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear predicate `f(x) = a · x − c` over a node's `d`-dimensional value
/// vector; satisfied iff `f(x) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub a: Vec<f64>,
    pub c: f64,
}

impl Predicate {
    /// Build a predicate, rejecting empty or non-finite coefficients.
    pub fn new(name: impl Into<String>, a: Vec<f64>, c: f64) -> Result<Self> {
        let name = name.into();
        if a.is_empty() {
            return Err(Error::InvalidData(format!(
                "predicate `{name}` has no coefficients"
            )));
        }
        if a.iter().any(|x| !x.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidData(format!(
                "predicate `{name}` has non-finite parameters"
            )));
        }
        Ok(Predicate { name, a, c })
    }

    /// Evaluate `a · x − c`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.a.len() {
            return Err(Error::DimMismatch {
                expected: self.a.len(),
                got: x.len(),
            });
        }
        Ok(self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - self.c)
    }
}

/// Temporal operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemporalKind {
    Always,
    Eventually,
}

/// Graph (neighbor-quantifier) operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Forall,
    Exists,
}

/// A template expression. Operator `kind: None` marks a flexible slot whose
/// concrete operator is learned; Boolean connectives are never flexible.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Reference to a named predicate; its coefficients are parameters.
    Pred(String),
    Not(Box<Expr>),
    /// Weighted conjunction. The text grammar is binary; the AST accepts any
    /// arity of at least two.
    And(Vec<Expr>),
    /// Weighted disjunction (same arity rules as [`Expr::And`]).
    Or(Vec<Expr>),
    /// `always`/`eventually` over the discrete interval `k + [k1, k2]`,
    /// with one importance weight per step.
    Temporal {
        kind: Option<TemporalKind>,
        k1: usize,
        k2: usize,
        child: Box<Expr>,
    },
    /// `forall`/`exists` over the neighbors of the evaluation node, with one
    /// importance weight per neighbor.
    Graph {
        kind: Option<GraphKind>,
        child: Box<Expr>,
    },
}

impl Expr {
    /// Convenience constructor for a temporal node.
    pub fn temporal(kind: Option<TemporalKind>, k1: usize, k2: usize, child: Expr) -> Expr {
        Expr::Temporal {
            kind,
            k1,
            k2,
            child: Box::new(child),
        }
    }

    /// Convenience constructor for a graph-quantifier node.
    pub fn graph(kind: Option<GraphKind>, child: Expr) -> Expr {
        Expr::Graph {
            kind,
            child: Box::new(child),
        }
    }
}

/// Flattened template node (children refer to pre-order ids).
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NodeKind {
    Pred(String),
    Not,
    And,
    Or,
    Temporal {
        kind: Option<TemporalKind>,
        k1: usize,
        k2: usize,
    },
    Graph {
        kind: Option<GraphKind>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// A validated formula template.
///
/// Holds the expression tree plus a flattened arena indexed by pre-order id,
/// the distinct predicate names in first-occurrence order, the ids of the
/// flexible operator slots, and the horizon the template needs when evaluated
/// at time step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaTemplate {
    root: Expr,
    arena: Vec<Node>,
    pred_names: Vec<String>,
    flexible_temporal: Vec<usize>,
    flexible_graph: Vec<usize>,
    required_horizon: usize,
}

impl FormulaTemplate {
    /// Validate an expression into a template.
    ///
    /// Errors when an interval has `k1 > k2`, when a connective has fewer
    /// than two children, or when the tree lacks a temporal or a graph
    /// operator.
    pub fn new(root: Expr) -> Result<Self> {
        let mut arena = Vec::new();
        flatten(&root, &mut arena)?;

        let mut pred_names: Vec<String> = Vec::new();
        let mut flexible_temporal = Vec::new();
        let mut flexible_graph = Vec::new();
        let mut n_temporal = 0usize;
        let mut n_graph = 0usize;
        for (id, node) in arena.iter().enumerate() {
            match &node.kind {
                NodeKind::Pred(name) => {
                    if !pred_names.iter().any(|n| n == name) {
                        pred_names.push(name.clone());
                    }
                }
                NodeKind::Temporal { kind, .. } => {
                    n_temporal += 1;
                    if kind.is_none() {
                        flexible_temporal.push(id);
                    }
                }
                NodeKind::Graph { kind } => {
                    n_graph += 1;
                    if kind.is_none() {
                        flexible_graph.push(id);
                    }
                }
                _ => {}
            }
        }
        if n_temporal == 0 {
            return Err(Error::InvalidTemplate(
                "template must contain at least one temporal operator".into(),
            ));
        }
        if n_graph == 0 {
            return Err(Error::InvalidTemplate(
                "template must contain at least one graph operator".into(),
            ));
        }

        let required_horizon = horizon_need(&arena, 0);
        Ok(FormulaTemplate {
            root,
            arena,
            pred_names,
            flexible_temporal,
            flexible_graph,
            required_horizon,
        })
    }

    /// The underlying expression tree.
    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub(crate) fn arena(&self) -> &[Node] {
        &self.arena
    }

    /// Number of template nodes.
    pub fn node_count(&self) -> usize {
        self.arena.len()
    }

    /// Distinct predicate names in first-occurrence order.
    pub fn pred_names(&self) -> &[String] {
        &self.pred_names
    }

    /// Pre-order ids of the flexible temporal slots.
    pub fn flexible_temporal(&self) -> &[usize] {
        &self.flexible_temporal
    }

    /// Pre-order ids of the flexible graph slots.
    pub fn flexible_graph(&self) -> &[usize] {
        &self.flexible_graph
    }

    /// Whether the template has any flexible operator slot.
    pub fn has_flexible_slots(&self) -> bool {
        !(self.flexible_temporal.is_empty() && self.flexible_graph.is_empty())
    }

    /// Smallest trajectory horizon that supports evaluation at time step 0.
    pub fn required_horizon(&self) -> usize {
        self.required_horizon
    }

    /// Check that `assignment` covers exactly this template's flexible slots.
    pub fn check_assignment(&self, assignment: &OperatorAssignment) -> Result<()> {
        for id in &self.flexible_temporal {
            if !assignment.temporal.contains_key(id) {
                return Err(Error::AssignmentMismatch(format!(
                    "flexible temporal slot {id} is unassigned"
                )));
            }
        }
        for id in &self.flexible_graph {
            if !assignment.graph.contains_key(id) {
                return Err(Error::AssignmentMismatch(format!(
                    "flexible graph slot {id} is unassigned"
                )));
            }
        }
        for id in assignment.temporal.keys() {
            if !self.flexible_temporal.contains(id) {
                return Err(Error::AssignmentMismatch(format!(
                    "assignment names temporal slot {id} which is not flexible"
                )));
            }
        }
        for id in assignment.graph.keys() {
            if !self.flexible_graph.contains(id) {
                return Err(Error::AssignmentMismatch(format!(
                    "assignment names graph slot {id} which is not flexible"
                )));
            }
        }
        Ok(())
    }
}

fn flatten(expr: &Expr, arena: &mut Vec<Node>) -> Result<usize> {
    let id = arena.len();
    arena.push(Node {
        kind: NodeKind::Not, // placeholder, overwritten below
        children: Vec::new(),
    });
    let (kind, children) = match expr {
        Expr::Pred(name) => (NodeKind::Pred(name.clone()), Vec::new()),
        Expr::Not(child) => (NodeKind::Not, vec![flatten(child, arena)?]),
        Expr::And(children) | Expr::Or(children) => {
            if children.len() < 2 {
                return Err(Error::InvalidTemplate(
                    "boolean connectives need at least two operands".into(),
                ));
            }
            let ids = children
                .iter()
                .map(|c| flatten(c, arena))
                .collect::<Result<Vec<_>>>()?;
            let kind = if matches!(expr, Expr::And(_)) {
                NodeKind::And
            } else {
                NodeKind::Or
            };
            (kind, ids)
        }
        Expr::Temporal { kind, k1, k2, child } => {
            if k1 > k2 {
                return Err(Error::BadInterval { k1: *k1, k2: *k2 });
            }
            (
                NodeKind::Temporal {
                    kind: *kind,
                    k1: *k1,
                    k2: *k2,
                },
                vec![flatten(child, arena)?],
            )
        }
        Expr::Graph { kind, child } => {
            (NodeKind::Graph { kind: *kind }, vec![flatten(child, arena)?])
        }
    };
    arena[id] = Node { kind, children };
    Ok(id)
}

fn horizon_need(arena: &[Node], id: usize) -> usize {
    let node = &arena[id];
    let child_max = node
        .children
        .iter()
        .map(|&c| horizon_need(arena, c))
        .max()
        .unwrap_or(0);
    match &node.kind {
        NodeKind::Temporal { k2, .. } => k2 + child_max,
        _ => child_max,
    }
}

/// Concrete operator choices for the flexible slots of one template, keyed by
/// pre-order node id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorAssignment {
    pub temporal: BTreeMap<usize, TemporalKind>,
    pub graph: BTreeMap<usize, GraphKind>,
}

impl OperatorAssignment {
    /// An assignment with no entries (for fully determined templates).
    pub fn empty() -> Self {
        Self::default()
    }

    /// Whether the assignment carries no choices.
    pub fn is_empty(&self) -> bool {
        self.temporal.is_empty() && self.graph.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(name: &str) -> Expr {
        Expr::Pred(name.into())
    }

    #[test]
    fn template_requires_temporal_and_graph_operators() {
        let err = FormulaTemplate::new(pred("p")).unwrap_err();
        assert!(matches!(err, Error::InvalidTemplate(_)));

        let only_temporal = Expr::temporal(Some(TemporalKind::Always), 0, 1, pred("p"));
        assert!(FormulaTemplate::new(only_temporal).is_err());

        let only_graph = Expr::graph(Some(GraphKind::Forall), pred("p"));
        assert!(FormulaTemplate::new(only_graph).is_err());

        let ok = Expr::temporal(
            Some(TemporalKind::Always),
            0,
            1,
            Expr::graph(Some(GraphKind::Forall), pred("p")),
        );
        assert!(FormulaTemplate::new(ok).is_ok());
    }

    #[test]
    fn template_rejects_malformed_intervals() {
        let bad = Expr::temporal(
            None,
            3,
            1,
            Expr::graph(Some(GraphKind::Forall), pred("p")),
        );
        assert!(matches!(
            FormulaTemplate::new(bad),
            Err(Error::BadInterval { k1: 3, k2: 1 })
        ));
    }

    #[test]
    fn flexible_slots_and_horizon() {
        // (or (tempX [0 6] (graphX (pred p1))) (not (tempX [7 14] (graphX (pred p2)))))
        let t = FormulaTemplate::new(Expr::Or(vec![
            Expr::temporal(None, 0, 6, Expr::graph(None, pred("p1"))),
            Expr::Not(Box::new(Expr::temporal(
                None,
                7,
                14,
                Expr::graph(None, pred("p2")),
            ))),
        ]))
        .unwrap();
        assert_eq!(t.flexible_temporal().len(), 2);
        assert_eq!(t.flexible_graph().len(), 2);
        assert_eq!(t.pred_names(), ["p1", "p2"]);
        assert_eq!(t.required_horizon(), 14);
        assert!(t.has_flexible_slots());

        // Nested temporal operators accumulate their upper bounds.
        let nested = FormulaTemplate::new(Expr::temporal(
            Some(TemporalKind::Always),
            0,
            3,
            Expr::temporal(
                Some(TemporalKind::Eventually),
                1,
                2,
                Expr::graph(Some(GraphKind::Exists), pred("p")),
            ),
        ))
        .unwrap();
        assert_eq!(nested.required_horizon(), 5);
        assert!(!nested.has_flexible_slots());
    }

    #[test]
    fn shared_predicate_names_collapse() {
        let t = FormulaTemplate::new(Expr::And(vec![
            Expr::temporal(None, 0, 1, Expr::graph(None, pred("pi"))),
            Expr::temporal(None, 0, 1, Expr::graph(None, pred("pi"))),
        ]))
        .unwrap();
        assert_eq!(t.pred_names(), ["pi"]);
    }

    #[test]
    fn assignment_cover_check() {
        let t = FormulaTemplate::new(Expr::temporal(None, 0, 1, Expr::graph(None, pred("p"))))
            .unwrap();
        let mut a = OperatorAssignment::empty();
        assert!(t.check_assignment(&a).is_err());
        a.temporal.insert(0, TemporalKind::Always);
        a.graph.insert(1, GraphKind::Exists);
        assert!(t.check_assignment(&a).is_ok());
        a.graph.insert(9, GraphKind::Forall);
        assert!(t.check_assignment(&a).is_err());
    }

    #[test]
    fn predicate_eval() {
        let p = Predicate::new("p", vec![2.0, -1.0], 0.5).unwrap();
        assert_eq!(p.eval(&[1.0, 1.0]).unwrap(), 0.5);
        assert!(p.eval(&[1.0]).is_err());
        assert!(Predicate::new("p", vec![], 0.0).is_err());
        assert!(Predicate::new("p", vec![f64::NAN], 0.0).is_err());
    }
}
