//! Smooth (differentiable) semantics: weighted robustness via soft
//! aggregation.
//!
//! Every operator — Boolean connective, temporal window, graph quantifier —
//! reduces to one exponentially weighted mean
//!
//! ```text
//! out = Σ_m u_m · e^(−b·r_m/σ) · r_m   /   Σ_m u_m · e^(−b·r_m/σ)
//! ```
//!
//! over its operands' robustness values `r_m`, with strictly positive
//! importance weights `u_m` and coefficient `b` selecting the flavor:
//! `b = +1` biases toward the minimum (conjunction, `always`, `forall`),
//! `b = −1` toward the maximum (disjunction, `eventually`, `exists`), and a
//! trainable real `b` relaxes an undetermined operator slot so that its kind
//! can be learned by gradient descent. As σ → 0 the mean sharpens to the
//! exact min/max, recovering crisp robustness.
//!
//! [`forward`] evaluates a template bottom-up and records an [`EvalTrace`]
//! — operand values, weights, and softmax coefficients per aggregation —
//! from which the backward pass replays exact gradients.

use crate::data::Trajectory;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::logic::ast::{
    FormulaTemplate, GraphKind, NodeKind, OperatorAssignment, TemporalKind,
};

use super::params::{ParamStore, SlotKey};

/// Weighted soft aggregation of robustness values `r` with positive weights
/// `w`, coefficient `b`, and smoothness `sigma`.
///
/// The implementation subtracts `max_m(−b·r_m/σ)` from every exponent before
/// exponentiating, which cancels in the ratio and keeps the computation
/// finite for arbitrarily large `|b·r/σ|`.
pub fn soft_aggregate(r: &[f64], w: &[f64], b: f64, sigma: f64) -> Result<f64> {
    if r.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    if r.len() != w.len() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: w.len(),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::BadSigma(sigma));
    }
    if !b.is_finite() {
        return Err(Error::InvalidData(format!(
            "non-finite aggregation coefficient b = {b}"
        )));
    }
    for &wm in w {
        if !(wm.is_finite() && wm > 0.0) {
            return Err(Error::BadWeight(wm));
        }
    }
    for &rm in r {
        if !rm.is_finite() {
            return Err(Error::InvalidData(format!(
                "non-finite robustness operand {rm}"
            )));
        }
    }
    Ok(aggregate_parts(r, w, b, sigma).1)
}

/// Shared kernel: returns the softmax coefficients `p_m = u_m e_m / D`
/// (which sum to 1) and the aggregate `out = Σ p_m r_m`.
fn aggregate_parts(r: &[f64], w: &[f64], b: f64, sigma: f64) -> (Vec<f64>, f64) {
    let shift = r
        .iter()
        .map(|&rm| -b * rm / sigma)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = r
        .iter()
        .zip(w)
        .map(|(&rm, &wm)| wm * (-b * rm / sigma - shift).exp())
        .collect();
    let denom: f64 = p.iter().sum();
    for pm in &mut p {
        *pm /= denom;
    }
    let out = p.iter().zip(r).map(|(&pm, &rm)| pm * rm).sum();
    (p, out)
}

/// How flexible operator slots are resolved during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum EvalMode<'a> {
    /// Use the trainable relaxation coefficient `b` stored in the parameter
    /// store for each flexible slot (step one of training).
    Relaxed,
    /// Use `b = ±1` according to a complete operator assignment (step two of
    /// training, and all post-training evaluation).
    Hardened(&'a OperatorAssignment),
}

/// One evaluated template node; children precede parents in the trace.
#[derive(Debug, Clone)]
pub(crate) enum TraceNode {
    Pred {
        name: String,
        x: Vec<f64>,
        value: f64,
    },
    Not {
        child: usize,
        value: f64,
    },
    Agg {
        /// Importance-weight slot feeding this aggregation.
        weight_key: SlotKey,
        /// Selection-coefficient slot, present only when `b` is trainable
        /// here (flexible slot evaluated in relaxed mode).
        select_key: Option<SlotKey>,
        b: f64,
        /// Raw importance weights (their signs drive `∂u/∂raw`).
        raw: Vec<f64>,
        /// Effective weights `|raw| + EPS_W`.
        u: Vec<f64>,
        /// Operand robustness values.
        r: Vec<f64>,
        /// Softmax coefficients; `value = Σ p_m r_m`.
        p: Vec<f64>,
        children: Vec<usize>,
        value: f64,
    },
}

impl TraceNode {
    pub(crate) fn value(&self) -> f64 {
        match self {
            TraceNode::Pred { value, .. }
            | TraceNode::Not { value, .. }
            | TraceNode::Agg { value, .. } => *value,
        }
    }
}

/// Record of one forward evaluation, in post-order (root last).
#[derive(Debug, Clone)]
pub struct EvalTrace {
    pub(crate) nodes: Vec<TraceNode>,
}

impl EvalTrace {
    /// The weighted robustness at the root.
    pub fn value(&self) -> f64 {
        self.nodes
            .last()
            .map(TraceNode::value)
            .unwrap_or(f64::NAN)
    }

    /// Number of evaluated template-node instances.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Whether the trace is empty (never true for a successful evaluation).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Evaluate `template` on one trajectory at `root` (time step 0), returning
/// the weighted robustness and the trace needed for gradient computation.
///
/// In [`EvalMode::Hardened`] the assignment must cover exactly the
/// template's flexible slots.
pub fn forward(
    template: &FormulaTemplate,
    mode: EvalMode<'_>,
    params: &ParamStore,
    traj: &Trajectory,
    graph: &Graph,
    root: &str,
) -> Result<(f64, EvalTrace)> {
    if traj.node_count() != graph.node_count() {
        return Err(Error::Incompatible(format!(
            "trajectory covers {} nodes but the graph has {}",
            traj.node_count(),
            graph.node_count()
        )));
    }
    if let EvalMode::Hardened(assignment) = mode {
        template.check_assignment(assignment)?;
    }
    if traj.horizon() < template.required_horizon() {
        return Err(Error::HorizonExceeded {
            need: template.required_horizon(),
            have: traj.horizon(),
        });
    }
    let root_idx = graph.node_index(root)?;
    let mut trace = EvalTrace { nodes: Vec::new() };
    let top = eval(template, mode, params, traj, graph, 0, root_idx, 0, &mut trace)?;
    Ok((trace.nodes[top].value(), trace))
}

/// Recursive evaluation of template node `id` at graph node `v`, time `k`.
/// Returns the trace index of the produced node.
#[allow(clippy::too_many_arguments)]
fn eval(
    template: &FormulaTemplate,
    mode: EvalMode<'_>,
    params: &ParamStore,
    traj: &Trajectory,
    graph: &Graph,
    id: usize,
    v: usize,
    k: usize,
    trace: &mut EvalTrace,
) -> Result<usize> {
    let node = &template.arena()[id];
    let produced = match &node.kind {
        NodeKind::Pred(name) => {
            let a = params.slot(&SlotKey::PredCoeff(name.clone()))?;
            let c = params.slot(&SlotKey::PredOffset(name.clone()))?[0];
            let x = traj.values_at(v, k);
            if x.iter().any(|xi| !xi.is_finite()) {
                return Err(Error::NonFiniteValue {
                    node: graph.node_name(v).to_string(),
                    step: k,
                });
            }
            if x.len() != a.len() {
                return Err(Error::DimMismatch {
                    expected: a.len(),
                    got: x.len(),
                });
            }
            let value = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - c;
            TraceNode::Pred {
                name: name.clone(),
                x: x.to_vec(),
                value,
            }
        }
        NodeKind::Not => {
            let child = eval(template, mode, params, traj, graph, node.children[0], v, k, trace)?;
            TraceNode::Not {
                child,
                value: -trace.nodes[child].value(),
            }
        }
        NodeKind::And | NodeKind::Or => {
            let b = if matches!(node.kind, NodeKind::And) { 1.0 } else { -1.0 };
            let children: Vec<usize> = node
                .children
                .iter()
                .map(|&c| eval(template, mode, params, traj, graph, c, v, k, trace))
                .collect::<Result<_>>()?;
            aggregate_node(SlotKey::ConnWeights(id), None, b, children, params, trace)?
        }
        NodeKind::Temporal { kind, k1, k2 } => {
            let (b, select_key) = resolve_b(*kind, SlotKey::TemporalSelect(id), mode, params, id)?;
            let children: Vec<usize> = (k + k1..=k + k2)
                .map(|kk| eval(template, mode, params, traj, graph, node.children[0], v, kk, trace))
                .collect::<Result<_>>()?;
            aggregate_node(SlotKey::TemporalWeights(id), select_key, b, children, params, trace)?
        }
        NodeKind::Graph { kind } => {
            let select = kind.map(|g| match g {
                GraphKind::Forall => TemporalKind::Always,
                GraphKind::Exists => TemporalKind::Eventually,
            });
            let (b, select_key) = resolve_b(select, SlotKey::GraphSelect(id), mode, params, id)?;
            let neighbors = graph.neighbor_indices(v);
            if neighbors.is_empty() {
                return Err(Error::NoNeighbors(graph.node_name(v).to_string()));
            }
            let children: Vec<usize> = neighbors
                .iter()
                .map(|&u| eval(template, mode, params, traj, graph, node.children[0], u, k, trace))
                .collect::<Result<_>>()?;
            aggregate_node(
                SlotKey::NeighborWeights(id, graph.node_name(v).to_string()),
                select_key,
                b,
                children,
                params,
                trace,
            )?
        }
    };
    trace.nodes.push(produced);
    Ok(trace.nodes.len() - 1)
}

/// Resolve the aggregation coefficient of a (possibly flexible) min-flavored
/// (`Always`/`Forall` ↦ +1) vs max-flavored (`Eventually`/`Exists` ↦ −1)
/// operator. Returns the slot key too when `b` is trainable in this mode.
fn resolve_b(
    fixed: Option<TemporalKind>,
    slot: SlotKey,
    mode: EvalMode<'_>,
    params: &ParamStore,
    id: usize,
) -> Result<(f64, Option<SlotKey>)> {
    match fixed {
        Some(TemporalKind::Always) => Ok((1.0, None)),
        Some(TemporalKind::Eventually) => Ok((-1.0, None)),
        None => match mode {
            EvalMode::Relaxed => {
                let b = params.slot(&slot)?[0];
                Ok((b, Some(slot)))
            }
            EvalMode::Hardened(assignment) => {
                let min_flavored = match slot {
                    SlotKey::TemporalSelect(_) => {
                        matches!(assignment.temporal.get(&id), Some(TemporalKind::Always))
                    }
                    _ => matches!(assignment.graph.get(&id), Some(GraphKind::Forall)),
                };
                Ok((if min_flavored { 1.0 } else { -1.0 }, None))
            }
        },
    }
}

/// Build one aggregation trace node from already-evaluated children.
fn aggregate_node(
    weight_key: SlotKey,
    select_key: Option<SlotKey>,
    b: f64,
    children: Vec<usize>,
    params: &ParamStore,
    trace: &mut EvalTrace,
) -> Result<TraceNode> {
    let raw = params.slot(&weight_key)?.to_vec();
    let u = params.effective_weights(&weight_key)?;
    if u.len() != children.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: children.len(),
        });
    }
    let r: Vec<f64> = children.iter().map(|&c| trace.nodes[c].value()).collect();
    let (p, value) = aggregate_parts(&r, &u, b, params.sigma());
    Ok(TraceNode::Agg {
        weight_key,
        select_key,
        b,
        raw,
        u,
        r,
        p,
        children,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Trajectory;
    use crate::graph::Graph;
    use crate::logic::ast::OperatorAssignment;
    use crate::logic::parse::parse_structure;
    use approx::assert_relative_eq;

    #[test]
    fn aggregation_matches_frozen_oracle() {
        // (1·e⁻¹·1 + 1·e⁻²·2) / (e⁻¹ + e⁻²) computed independently.
        let out = soft_aggregate(&[1.0, 2.0], &[1.0, 1.0], 1.0, 1.0).unwrap();
        assert_relative_eq!(out, 1.268_941_421_369_995, max_relative = 1e-12);
        // Dual flavor leans toward the maximum instead.
        let out = soft_aggregate(&[1.0, 2.0], &[1.0, 1.0], -1.0, 1.0).unwrap();
        assert_relative_eq!(out, 1.731_058_578_630_005, max_relative = 1e-12);
    }

    #[test]
    fn aggregation_is_bounded_by_operands() {
        let r = [-3.0, 0.5, 2.0, -1.0];
        let w = [0.2, 1.0, 0.7, 0.4];
        for b in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let out = soft_aggregate(&r, &w, b, 0.7).unwrap();
            assert!((-3.0..=2.0).contains(&out), "b={b} gave {out}");
        }
    }

    #[test]
    fn aggregation_survives_huge_magnitudes() {
        let out = soft_aggregate(&[1000.0, 2000.0], &[1.0, 1.0], 1.0, 1.0).unwrap();
        assert!(out.is_finite());
        assert_relative_eq!(out, 1000.0, max_relative = 1e-9);
        let out = soft_aggregate(&[-5000.0, 4000.0], &[2.0, 3.0], -1.0, 0.1).unwrap();
        assert_relative_eq!(out, 4000.0, max_relative = 1e-9);
    }

    #[test]
    fn aggregation_weight_scale_invariance() {
        let r = [0.3, -0.8, 1.4];
        let a = soft_aggregate(&r, &[0.2, 0.5, 0.3], 1.0, 1.0).unwrap();
        let b = soft_aggregate(&r, &[2.0, 5.0, 3.0], 1.0, 1.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn aggregation_sharpens_to_min_as_sigma_shrinks() {
        let r = [0.9, -0.4, 0.2];
        let w = [1.0, 1.0, 1.0];
        let mut prev_gap = f64::INFINITY;
        for sigma in [1.0, 0.1, 0.01] {
            let out = soft_aggregate(&r, &w, 1.0, sigma).unwrap();
            let gap = (out - (-0.4)).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn aggregation_input_validation() {
        assert!(matches!(
            soft_aggregate(&[], &[], 1.0, 1.0),
            Err(Error::EmptyAggregation)
        ));
        assert!(matches!(
            soft_aggregate(&[1.0], &[1.0, 2.0], 1.0, 1.0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            soft_aggregate(&[1.0], &[1.0], 1.0, 0.0),
            Err(Error::BadSigma(_))
        ));
        assert!(matches!(
            soft_aggregate(&[1.0], &[0.0], 1.0, 1.0),
            Err(Error::BadWeight(_))
        ));
        assert!(matches!(
            soft_aggregate(&[f64::NAN], &[1.0], 1.0, 1.0),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            soft_aggregate(&[1.0], &[1.0], f64::NAN, 1.0),
            Err(Error::InvalidData(_))
        ));
    }

    fn star() -> Graph {
        Graph::new(
            ["hub", "s1", "s2", "s3"],
            [("hub", "s1"), ("hub", "s2"), ("hub", "s3")],
        )
        .unwrap()
    }

    /// One-step trajectory that puts `x = [0, 1, 2]` on the three spokes.
    fn star_traj() -> Trajectory {
        Trajectory::new(vec![
            vec![vec![9.0]], // hub (never read by the formulas below)
            vec![vec![0.0]],
            vec![vec![1.0]],
            vec![vec![2.0]],
        ])
        .unwrap()
    }

    #[test]
    fn forward_single_step_window_is_identity_over_neighbors() {
        let t = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        let mut params = ParamStore::init(&t, &star(), "hub", 1, 1.0).unwrap();
        params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.0]).unwrap();
        // c stays 0, so each spoke contributes exactly its x value; a
        // single-step window aggregates one operand, which is an identity.
        let (value, trace) = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &star_traj(),
            &star(),
            "hub",
        )
        .unwrap();
        let expected = soft_aggregate(
            &[0.0, 1.0, 2.0],
            &params
                .effective_weights(&SlotKey::NeighborWeights(1, "hub".into()))
                .unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(value, expected, max_relative = 1e-14);
        assert_eq!(trace.len(), 5); // 3 preds + graph agg + temporal agg
        assert_relative_eq!(trace.value(), value, max_relative = 1e-15);
    }

    #[test]
    fn forward_relaxed_reads_b_from_params() {
        let t = parse_structure("(tempX [0 0] (graphX (pred p)))").unwrap();
        let mut params = ParamStore::init(&t, &star(), "hub", 1, 1.0).unwrap();
        params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.0]).unwrap();
        params.set_slot(&SlotKey::GraphSelect(1), &[-3.0]).unwrap();
        let (value, _) = forward(
            &t,
            EvalMode::Relaxed,
            &params,
            &star_traj(),
            &star(),
            "hub",
        )
        .unwrap();
        let expected = soft_aggregate(
            &[0.0, 1.0, 2.0],
            &params
                .effective_weights(&SlotKey::NeighborWeights(1, "hub".into()))
                .unwrap(),
            -3.0,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(value, expected, max_relative = 1e-14);
    }

    #[test]
    fn forward_hardened_uses_assignment_signs() {
        let t = parse_structure("(tempX [0 0] (graphX (pred p)))").unwrap();
        let mut params = ParamStore::init(&t, &star(), "hub", 1, 1.0).unwrap();
        params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.0]).unwrap();

        let mut forall = OperatorAssignment::empty();
        forall.temporal.insert(0, TemporalKind::Always);
        forall.graph.insert(1, GraphKind::Forall);
        let mut exists = OperatorAssignment::empty();
        exists.temporal.insert(0, TemporalKind::Always);
        exists.graph.insert(1, GraphKind::Exists);

        let traj = star_traj();
        let g = star();
        let lo = forward(&t, EvalMode::Hardened(&forall), &params, &traj, &g, "hub")
            .unwrap()
            .0;
        let hi = forward(&t, EvalMode::Hardened(&exists), &params, &traj, &g, "hub")
            .unwrap()
            .0;
        assert!(lo < hi, "forall ({lo}) should lean low, exists ({hi}) high");
    }

    #[test]
    fn forward_rejects_incomplete_assignment_and_short_horizon() {
        let t = parse_structure("(tempX [0 3] (graphX (pred p)))").unwrap();
        let params = ParamStore::init(&t, &star(), "hub", 1, 1.0).unwrap();
        let err = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &star_traj(),
            &star(),
            "hub",
        );
        assert!(matches!(err, Err(Error::AssignmentMismatch(_))));

        let mut full = OperatorAssignment::empty();
        full.temporal.insert(0, TemporalKind::Always);
        full.graph.insert(1, GraphKind::Forall);
        let err = forward(
            &t,
            EvalMode::Hardened(&full),
            &params,
            &star_traj(),
            &star(),
            "hub",
        );
        assert!(matches!(err, Err(Error::HorizonExceeded { need: 3, have: 0 })));
    }

    #[test]
    fn forward_rejects_missing_values() {
        let t = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        let params = ParamStore::init(&t, &star(), "hub", 1, 1.0).unwrap();
        let traj = Trajectory::new(vec![
            vec![vec![0.0]],
            vec![vec![f64::NAN]],
            vec![vec![1.0]],
            vec![vec![2.0]],
        ])
        .unwrap();
        let err = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &traj,
            &star(),
            "hub",
        );
        assert!(matches!(err, Err(Error::NonFiniteValue { .. })));
    }
}
