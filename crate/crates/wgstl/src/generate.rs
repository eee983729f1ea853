//! Seeded random generators for graphs, templates, parameters, and
//! trajectories — the raw material for property tests, gradient checks, and
//! round-trip suites.
//!
//! Generated templates are wrapped in one temporal and one graph operator at
//! the root so every output is structurally valid by construction (the
//! validator requires at least one of each); inner structure is free.
//! Generated parameters keep importance weights at magnitude ≥ 0.2 so
//! numeric differentiation never straddles the `|raw|` kink at zero.

use indexmap::IndexMap;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::data::Trajectory;
use crate::diff::params::{ParamStore, SlotKey};
use crate::error::Result;
use crate::graph::Graph;
use crate::logic::ast::{
    Expr, FormulaTemplate, GraphKind, OperatorAssignment, Predicate, TemporalKind,
};

/// Tuning knobs for [`random_template`].
#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Maximum nesting depth, counting the two wrapper operators.
    pub max_depth: usize,
    /// Cap on the template's required horizon.
    pub max_horizon: usize,
    /// Maximum arity of generated connectives.
    pub max_fanout: usize,
    /// Probability that a temporal/graph operator is a flexible slot.
    pub flexible_prob: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_depth: 4,
            max_horizon: 6,
            max_fanout: 3,
            flexible_prob: 0.5,
        }
    }
}

/// A connected-enough random graph: `2..=max_nodes` nodes named `v1…`,
/// every node with at least one neighbor.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize) -> Result<Graph> {
    let n = rng.random_range(2..=max_nodes.max(2));
    let nodes: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(String, String)> = Vec::new();
    // Random attachment chain guarantees no isolated nodes…
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((nodes[i].clone(), nodes[j].clone()));
    }
    // …plus some extra edges for variety.
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.25) {
                edges.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    Graph::new(nodes, edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))
}

/// A random structurally valid template.
pub fn random_template<R: Rng + ?Sized>(rng: &mut R, opts: &GenOptions) -> FormulaTemplate {
    let outer_k2 = rng.random_range(0..=opts.max_horizon.min(3));
    let outer_k1 = rng.random_range(0..=outer_k2);
    let mut counter = 0usize;
    let core = gen_expr(
        rng,
        opts.max_depth.saturating_sub(2),
        opts.max_horizon - outer_k2,
        opts,
        &mut counter,
    );
    let expr = Expr::temporal(
        maybe_temporal(rng, opts),
        outer_k1,
        outer_k2,
        Expr::graph(maybe_graph(rng, opts), core),
    );
    FormulaTemplate::new(expr).expect("wrapped template is always valid")
}

fn maybe_temporal<R: Rng + ?Sized>(rng: &mut R, opts: &GenOptions) -> Option<TemporalKind> {
    if rng.random_bool(opts.flexible_prob) {
        None
    } else if rng.random_bool(0.5) {
        Some(TemporalKind::Always)
    } else {
        Some(TemporalKind::Eventually)
    }
}

fn maybe_graph<R: Rng + ?Sized>(rng: &mut R, opts: &GenOptions) -> Option<GraphKind> {
    if rng.random_bool(opts.flexible_prob) {
        None
    } else if rng.random_bool(0.5) {
        Some(GraphKind::Forall)
    } else {
        Some(GraphKind::Exists)
    }
}

fn fresh_pred(counter: &mut usize) -> Expr {
    *counter += 1;
    Expr::Pred(format!("p{counter}"))
}

fn gen_expr<R: Rng + ?Sized>(
    rng: &mut R,
    depth: usize,
    horizon: usize,
    opts: &GenOptions,
    counter: &mut usize,
) -> Expr {
    if depth == 0 {
        return fresh_pred(counter);
    }
    match rng.random_range(0..6) {
        0 => fresh_pred(counter),
        1 => Expr::Not(Box::new(gen_expr(rng, depth - 1, horizon, opts, counter))),
        2 | 3 => {
            let arity = rng.random_range(2..=opts.max_fanout.max(2));
            let children: Vec<Expr> = (0..arity)
                .map(|_| gen_expr(rng, depth - 1, horizon, opts, counter))
                .collect();
            if rng.random_bool(0.5) {
                Expr::And(children)
            } else {
                Expr::Or(children)
            }
        }
        4 => {
            let k2 = rng.random_range(0..=horizon.min(3));
            let k1 = rng.random_range(0..=k2);
            Expr::temporal(
                maybe_temporal(rng, opts),
                k1,
                k2,
                gen_expr(rng, depth - 1, horizon - k2, opts, counter),
            )
        }
        _ => Expr::graph(
            maybe_graph(rng, opts),
            gen_expr(rng, depth - 1, horizon, opts, counter),
        ),
    }
}

/// A uniformly random choice for every flexible slot of `template`.
pub fn random_assignment<R: Rng + ?Sized>(
    rng: &mut R,
    template: &FormulaTemplate,
) -> OperatorAssignment {
    let mut assignment = OperatorAssignment::empty();
    for &id in template.flexible_temporal() {
        let kind = if rng.random_bool(0.5) {
            TemporalKind::Always
        } else {
            TemporalKind::Eventually
        };
        assignment.temporal.insert(id, kind);
    }
    for &id in template.flexible_graph() {
        let kind = if rng.random_bool(0.5) {
            GraphKind::Forall
        } else {
            GraphKind::Exists
        };
        assignment.graph.insert(id, kind);
    }
    assignment
}

/// Standard-normal predicates (coefficients and offset) for every predicate
/// name in `template`.
pub fn random_predicates<R: Rng + ?Sized>(
    rng: &mut R,
    template: &FormulaTemplate,
    dim: usize,
) -> IndexMap<String, Predicate> {
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    template
        .pred_names()
        .iter()
        .map(|name| {
            let a: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
            let p = Predicate::new(name.clone(), a, normal.sample(rng)).expect("finite values");
            (name.clone(), p)
        })
        .collect()
}

/// A parameter store at a generic position: predicate entries ~ N(0, 1),
/// importance weights uniform in `±[0.2, 1.5]`, selection coefficients
/// uniform in `[−1, 1]`.
pub fn random_params<R: Rng + ?Sized>(
    rng: &mut R,
    template: &FormulaTemplate,
    graph: &Graph,
    root: &str,
    dim: usize,
    sigma: f64,
) -> Result<ParamStore> {
    let mut params = ParamStore::init(template, graph, root, dim, sigma)?;
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let weight = Uniform::new(0.2, 1.5).expect("valid uniform");
    let select = Uniform::new(-1.0, 1.0).expect("valid uniform");
    for entry in params.layout().entries().to_vec() {
        let values: Vec<f64> = match &entry.key {
            SlotKey::PredCoeff(_) | SlotKey::PredOffset(_) => {
                (0..entry.len).map(|_| normal.sample(rng)).collect()
            }
            SlotKey::TemporalSelect(_) | SlotKey::GraphSelect(_) => {
                (0..entry.len).map(|_| select.sample(rng)).collect()
            }
            _ => (0..entry.len)
                .map(|_| weight.sample(rng) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect(),
        };
        params.set_slot(&entry.key, &values)?;
    }
    Ok(params)
}

/// A trajectory of i.i.d. standard-normal values.
pub fn random_trajectory<R: Rng + ?Sized>(
    rng: &mut R,
    node_count: usize,
    horizon: usize,
    dim: usize,
) -> Trajectory {
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let values = (0..node_count)
        .map(|_| {
            (0..=horizon)
                .map(|_| (0..dim).map(|_| normal.sample(rng)).collect())
                .collect()
        })
        .collect();
    Trajectory::new(values).expect("generated values are finite")
}
