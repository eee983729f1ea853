//! Crisp (non-smooth) semantics: Boolean satisfaction and min/max robustness.
//!
//! Crisp semantics ignore importance weights entirely; they are the reference
//! monitor the smooth engine converges to as σ → 0. Satisfaction of a
//! predicate is strict (`f > 0`). Disjunction takes `max` (the dual of
//! conjunction's `min`), `forall`/`exists` take `min`/`max` over neighbors,
//! and `always`/`eventually` take `min`/`max` over the shifted interval.
//!
//! A graph quantifier applied at a node without neighbors is an error, not a
//! vacuous truth: the weighted counterpart would divide by an empty sum, so
//! the crisp layer fails loudly in the same situation.

use indexmap::IndexMap;

use crate::data::Trajectory;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::logic::ast::{
    FormulaTemplate, GraphKind, NodeKind, OperatorAssignment, Predicate, TemporalKind,
};

/// A fully determined formula: operator kinds resolved, predicate values
/// embedded. This is what the crisp monitor and the synthesizer consume.
#[derive(Debug, Clone, PartialEq)]
pub enum HardExpr {
    Pred(Predicate),
    Not(Box<HardExpr>),
    And(Vec<HardExpr>),
    Or(Vec<HardExpr>),
    Temporal {
        kind: TemporalKind,
        k1: usize,
        k2: usize,
        child: Box<HardExpr>,
    },
    Graph {
        kind: GraphKind,
        child: Box<HardExpr>,
    },
}

impl HardExpr {
    /// Smallest horizon that supports evaluation at time step 0.
    pub fn required_horizon(&self) -> usize {
        match self {
            HardExpr::Pred(_) => 0,
            HardExpr::Not(c) => c.required_horizon(),
            HardExpr::And(cs) | HardExpr::Or(cs) => {
                cs.iter().map(HardExpr::required_horizon).max().unwrap_or(0)
            }
            HardExpr::Temporal { k2, child, .. } => k2 + child.required_horizon(),
            HardExpr::Graph { child, .. } => child.required_horizon(),
        }
    }

    /// Dimension required of trajectories, from the first predicate.
    pub fn dim(&self) -> usize {
        match self {
            HardExpr::Pred(p) => p.a.len(),
            HardExpr::Not(c) => c.dim(),
            HardExpr::And(cs) | HardExpr::Or(cs) => cs.first().map_or(0, HardExpr::dim),
            HardExpr::Temporal { child, .. } | HardExpr::Graph { child, .. } => child.dim(),
        }
    }
}

impl FormulaTemplate {
    /// Resolve this template into a [`HardExpr`] using concrete operator
    /// choices (for the flexible slots) and concrete predicate values.
    pub fn harden(
        &self,
        assignment: &OperatorAssignment,
        predicates: &IndexMap<String, Predicate>,
    ) -> Result<HardExpr> {
        self.check_assignment(assignment)?;
        harden_node(self, 0, assignment, predicates)
    }
}

fn harden_node(
    template: &FormulaTemplate,
    id: usize,
    assignment: &OperatorAssignment,
    predicates: &IndexMap<String, Predicate>,
) -> Result<HardExpr> {
    let arena = template.arena();
    let node = &arena[id];
    let child = |i: usize| harden_node(template, node.children[i], assignment, predicates);
    Ok(match &node.kind {
        NodeKind::Pred(name) => HardExpr::Pred(
            predicates
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnknownPredicate(name.clone()))?,
        ),
        NodeKind::Not => HardExpr::Not(Box::new(child(0)?)),
        NodeKind::And | NodeKind::Or => {
            let cs = (0..node.children.len())
                .map(child)
                .collect::<Result<Vec<_>>>()?;
            if matches!(node.kind, NodeKind::And) {
                HardExpr::And(cs)
            } else {
                HardExpr::Or(cs)
            }
        }
        NodeKind::Temporal { kind, k1, k2 } => HardExpr::Temporal {
            kind: kind.unwrap_or_else(|| assignment.temporal[&id]),
            k1: *k1,
            k2: *k2,
            child: Box::new(child(0)?),
        },
        NodeKind::Graph { kind } => HardExpr::Graph {
            kind: kind.unwrap_or_else(|| assignment.graph[&id]),
            child: Box::new(child(0)?),
        },
    })
}

/// Boolean satisfaction of `formula` by `traj` at node `v` and time step `k`.
pub fn boolean_sat(
    formula: &HardExpr,
    traj: &Trajectory,
    graph: &Graph,
    v: &str,
    k: usize,
) -> Result<bool> {
    check_inputs(traj, graph)?;
    let idx = graph.node_index(v)?;
    sat_rec(formula, traj, graph, idx, k)
}

fn sat_rec(
    formula: &HardExpr,
    traj: &Trajectory,
    graph: &Graph,
    v: usize,
    k: usize,
) -> Result<bool> {
    match formula {
        HardExpr::Pred(p) => Ok(pred_value(p, traj, graph, v, k)? > 0.0),
        HardExpr::Not(c) => Ok(!sat_rec(c, traj, graph, v, k)?),
        HardExpr::And(cs) => {
            for c in cs {
                if !sat_rec(c, traj, graph, v, k)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        HardExpr::Or(cs) => {
            for c in cs {
                if sat_rec(c, traj, graph, v, k)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        HardExpr::Temporal { kind, k1, k2, child } => {
            let steps = interval_steps(traj, k, *k1, *k2)?;
            match kind {
                TemporalKind::Always => {
                    for kk in steps {
                        if !sat_rec(child, traj, graph, v, kk)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                TemporalKind::Eventually => {
                    for kk in steps {
                        if sat_rec(child, traj, graph, v, kk)? {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                }
            }
        }
        HardExpr::Graph { kind, child } => {
            let neighbors = nonempty_neighbors(graph, v)?;
            match kind {
                GraphKind::Forall => {
                    for &u in neighbors {
                        if !sat_rec(child, traj, graph, u, k)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                GraphKind::Exists => {
                    for &u in neighbors {
                        if sat_rec(child, traj, graph, u, k)? {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                }
            }
        }
    }
}

/// Crisp quantitative satisfaction (robustness) of `formula` at `(v, k)`.
///
/// Wherever the value is nonzero its sign agrees with [`boolean_sat`].
pub fn crisp_robustness(
    formula: &HardExpr,
    traj: &Trajectory,
    graph: &Graph,
    v: &str,
    k: usize,
) -> Result<f64> {
    check_inputs(traj, graph)?;
    let idx = graph.node_index(v)?;
    rob_rec(formula, traj, graph, idx, k)
}

fn rob_rec(
    formula: &HardExpr,
    traj: &Trajectory,
    graph: &Graph,
    v: usize,
    k: usize,
) -> Result<f64> {
    match formula {
        HardExpr::Pred(p) => pred_value(p, traj, graph, v, k),
        HardExpr::Not(c) => Ok(-rob_rec(c, traj, graph, v, k)?),
        HardExpr::And(cs) => fold(cs.iter().map(|c| rob_rec(c, traj, graph, v, k)), f64::min),
        HardExpr::Or(cs) => fold(cs.iter().map(|c| rob_rec(c, traj, graph, v, k)), f64::max),
        HardExpr::Temporal { kind, k1, k2, child } => {
            let steps = interval_steps(traj, k, *k1, *k2)?;
            let values = steps.map(|kk| rob_rec(child, traj, graph, v, kk));
            match kind {
                TemporalKind::Always => fold(values, f64::min),
                TemporalKind::Eventually => fold(values, f64::max),
            }
        }
        HardExpr::Graph { kind, child } => {
            let neighbors = nonempty_neighbors(graph, v)?;
            let values = neighbors.iter().map(|&u| rob_rec(child, traj, graph, u, k));
            match kind {
                GraphKind::Forall => fold(values, f64::min),
                GraphKind::Exists => fold(values, f64::max),
            }
        }
    }
}

fn fold(values: impl Iterator<Item = Result<f64>>, op: fn(f64, f64) -> f64) -> Result<f64> {
    let mut acc: Option<f64> = None;
    for value in values {
        let value = value?;
        acc = Some(match acc {
            None => value,
            Some(a) => op(a, value),
        });
    }
    acc.ok_or(Error::EmptyAggregation)
}

fn pred_value(p: &Predicate, traj: &Trajectory, graph: &Graph, v: usize, k: usize) -> Result<f64> {
    let x = traj.values_at(v, k);
    if x.iter().any(|xi| !xi.is_finite()) {
        return Err(Error::NonFiniteValue {
            node: graph.node_name(v).to_string(),
            step: k,
        });
    }
    p.eval(x)
}

fn interval_steps(
    traj: &Trajectory,
    k: usize,
    k1: usize,
    k2: usize,
) -> Result<std::ops::RangeInclusive<usize>> {
    let need = k + k2;
    if need > traj.horizon() {
        return Err(Error::HorizonExceeded {
            need,
            have: traj.horizon(),
        });
    }
    Ok((k + k1)..=(k + k2))
}

fn nonempty_neighbors(graph: &Graph, v: usize) -> Result<&[usize]> {
    let neighbors = graph.neighbor_indices(v);
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors(graph.node_name(v).to_string()));
    }
    Ok(neighbors)
}

fn check_inputs(traj: &Trajectory, graph: &Graph) -> Result<()> {
    if traj.node_count() != graph.node_count() {
        return Err(Error::Incompatible(format!(
            "trajectory covers {} nodes but the graph has {}",
            traj.node_count(),
            graph.node_count()
        )));
    }
    Ok(())
}
