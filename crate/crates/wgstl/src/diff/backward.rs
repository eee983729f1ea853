//! Exact gradients of the weighted robustness with respect to every
//! trainable parameter, replayed from an [`EvalTrace`].
//!
//! For one aggregation `out = Σ_j p_j r_j` with softmax coefficients
//! `p_j = u_j e^(−b·r_j/σ) / D` the local derivatives are closed-form:
//!
//! ```text
//! ∂out/∂r_j = p_j · (1 − (b/σ)(r_j − out))
//! ∂out/∂u_j = p_j · (r_j − out) / u_j
//! ∂out/∂b   = −(1/σ) · (Σ_j p_j r_j² − out²)
//! ```
//!
//! and `∂u/∂raw = sign(raw)` maps effective-weight gradients back onto the
//! unconstrained raw weights. Predicates contribute `∂r/∂a_i = x_i` and
//! `∂r/∂c = −1`; negation flips the adjoint. The trace is walked once in
//! reverse, accumulating adjoints, so the cost matches the forward pass.

use crate::error::{Error, Result};

use super::forward::{EvalTrace, TraceNode};
use super::params::{ParamStore, SlotKey};

/// Gradient of a scalar output with respect to the flat parameter vector,
/// aligned with [`ParamStore::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    values: Vec<f64>,
}

impl Gradients {
    /// The flat gradient vector.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The gradient entries of one slot, resolved through the store whose
    /// layout produced this gradient.
    pub fn slot<'g>(&'g self, params: &ParamStore, key: &SlotKey) -> Result<&'g [f64]> {
        let entry = params.layout().entry(key)?;
        Ok(&self.values[entry.offset..entry.offset + entry.len])
    }
}

/// Differentiate the traced evaluation: returns `∂value/∂θ` for every
/// parameter `θ` in `params`.
pub fn backward(trace: &EvalTrace, params: &ParamStore) -> Result<Gradients> {
    let mut values = vec![0.0; params.values().len()];
    backward_into(trace, params, 1.0, &mut values)?;
    Ok(Gradients { values })
}

/// Accumulate `seed · ∂value/∂θ` into `out` (used by the training loop to
/// chain the loss derivative through many samples without reallocating).
pub fn backward_into(
    trace: &EvalTrace,
    params: &ParamStore,
    seed: f64,
    out: &mut [f64],
) -> Result<()> {
    if out.len() != params.values().len() {
        return Err(Error::LengthMismatch {
            left: params.values().len(),
            right: out.len(),
        });
    }
    if trace.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    // Adjoint of each trace node's value; the root (last node) is seeded.
    let mut adjoint = vec![0.0; trace.nodes.len()];
    adjoint[trace.nodes.len() - 1] = seed;

    for (i, node) in trace.nodes.iter().enumerate().rev() {
        let g = adjoint[i];
        if g == 0.0 {
            continue;
        }
        match node {
            TraceNode::Pred { name, x, .. } => {
                let a_entry = params.layout().entry(&SlotKey::PredCoeff(name.clone()))?;
                let c_entry = params.layout().entry(&SlotKey::PredOffset(name.clone()))?;
                for (slot, xi) in out[a_entry.offset..a_entry.offset + a_entry.len]
                    .iter_mut()
                    .zip(x)
                {
                    *slot += g * xi;
                }
                out[c_entry.offset] -= g;
            }
            TraceNode::Not { child, .. } => {
                adjoint[*child] -= g;
            }
            TraceNode::Agg {
                weight_key,
                select_key,
                b,
                raw,
                u,
                r,
                p,
                children,
                value,
            } => {
                let sigma = params.sigma();
                let w_entry = params.layout().entry(weight_key)?;
                for j in 0..children.len() {
                    adjoint[children[j]] += g * p[j] * (1.0 - (b / sigma) * (r[j] - value));
                    let du = p[j] * (r[j] - value) / u[j];
                    out[w_entry.offset + j] += g * du * raw[j].signum();
                }
                if let Some(key) = select_key {
                    let b_entry = params.layout().entry(key)?;
                    let second_moment: f64 = p.iter().zip(r).map(|(pj, rj)| pj * rj * rj).sum();
                    out[b_entry.offset] += g * (-(second_moment - value * value) / sigma);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Trajectory;
    use crate::diff::forward::{forward, EvalMode};
    use crate::graph::Graph;
    use crate::logic::ast::OperatorAssignment;
    use crate::logic::parse::parse_structure;
    use approx::assert_relative_eq;

    fn pair() -> Graph {
        Graph::new(["a", "b"], [("a", "b")]).unwrap()
    }

    #[test]
    fn predicate_gradients_are_exact_through_identity_aggregations() {
        // One neighbor and a one-step window make every aggregation an
        // identity, so value = a·x_b − c with x_b = [2, −3].
        let t = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        let mut params = ParamStore::init(&t, &pair(), "a", 2, 1.0).unwrap();
        params
            .set_slot(&SlotKey::PredCoeff("p".into()), &[0.4, -1.1])
            .unwrap();
        params.set_slot(&SlotKey::PredOffset("p".into()), &[0.7]).unwrap();
        let traj =
            Trajectory::new(vec![vec![vec![5.0, 5.0]], vec![vec![2.0, -3.0]]]).unwrap();
        let (value, trace) = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &traj,
            &pair(),
            "a",
        )
        .unwrap();
        assert_relative_eq!(value, 0.4 * 2.0 + 1.1 * 3.0 - 0.7, max_relative = 1e-14);

        let grads = backward(&trace, &params).unwrap();
        assert_eq!(
            grads.slot(&params, &SlotKey::PredCoeff("p".into())).unwrap(),
            [2.0, -3.0]
        );
        assert_eq!(
            grads.slot(&params, &SlotKey::PredOffset("p".into())).unwrap(),
            [-1.0]
        );
    }

    #[test]
    fn negation_flips_every_gradient() {
        let plain = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        let negated = parse_structure("(not (always [0 0] (forall (pred p))))").unwrap();
        let traj = Trajectory::new(vec![vec![vec![1.0]], vec![vec![3.0]]]).unwrap();
        for (t, sign) in [(&plain, 1.0), (&negated, -1.0)] {
            let mut params = ParamStore::init(t, &pair(), "a", 1, 1.0).unwrap();
            params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.0]).unwrap();
            let (_, trace) = forward(
                t,
                EvalMode::Hardened(&OperatorAssignment::empty()),
                &params,
                &traj,
                &pair(),
                "a",
            )
            .unwrap();
            let grads = backward(&trace, &params).unwrap();
            assert_relative_eq!(
                grads.slot(&params, &SlotKey::PredCoeff("p".into())).unwrap()[0],
                sign * 3.0,
                max_relative = 1e-14
            );
        }
    }

    /// Central finite difference of the forward value in one coordinate.
    #[allow(clippy::too_many_arguments)]
    fn fd(
        t: &crate::logic::ast::FormulaTemplate,
        mode_relaxed: bool,
        params: &ParamStore,
        traj: &Trajectory,
        graph: &Graph,
        root: &str,
        i: usize,
        h: f64,
    ) -> f64 {
        let assignment = OperatorAssignment::empty();
        let eval_at = |delta: f64| {
            let mut p = params.clone();
            p.values_mut()[i] += delta;
            let mode = if mode_relaxed {
                EvalMode::Relaxed
            } else {
                EvalMode::Hardened(&assignment)
            };
            forward(t, mode, &p, traj, graph, root).unwrap().0
        };
        (eval_at(h) - eval_at(-h)) / (2.0 * h)
    }

    #[test]
    fn gradients_match_finite_differences_on_a_mixed_template() {
        let t = parse_structure(
            "(and (always [0 2] (exists (pred p))) (not (eventually [1 3] (forall (pred q)))))",
        )
        .unwrap();
        let graph = Graph::new(
            ["a", "b", "c"],
            [("a", "b"), ("b", "c"), ("a", "c")],
        )
        .unwrap();
        let traj = Trajectory::new(vec![
            vec![vec![0.3, -0.2], vec![1.1, 0.4], vec![-0.5, 0.9], vec![0.2, 0.2]],
            vec![vec![-0.7, 0.5], vec![0.6, -1.2], vec![0.8, 0.1], vec![-0.3, 0.7]],
            vec![vec![1.4, 0.0], vec![-0.2, 0.3], vec![0.5, -0.6], vec![0.9, -0.1]],
        ])
        .unwrap();
        let mut params = ParamStore::init(&t, &graph, "a", 2, 0.8).unwrap();
        // Move every parameter off its init value (and away from the |raw|
        // kink at zero) so the check exercises generic positions.
        for (i, v) in params.values_mut().iter_mut().enumerate() {
            *v += 0.3 + 0.07 * (i as f64 % 5.0) * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let (_, trace) = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &traj,
            &graph,
            "a",
        )
        .unwrap();
        let grads = backward(&trace, &params).unwrap();
        for i in 0..params.values().len() {
            let numeric = fd(&t, false, &params, &traj, &graph, "a", i, 1e-5);
            let analytic = grads.values()[i];
            assert_relative_eq!(analytic, numeric, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn selection_coefficient_gradient_matches_finite_differences() {
        let t = parse_structure("(tempX [0 2] (graphX (pred p)))").unwrap();
        let graph = Graph::new(["a", "b", "c"], [("a", "b"), ("a", "c")]).unwrap();
        let traj = Trajectory::new(vec![
            vec![vec![0.0], vec![0.0], vec![0.0]],
            vec![vec![0.9], vec![-0.4], vec![0.6]],
            vec![vec![-1.2], vec![0.7], vec![0.3]],
        ])
        .unwrap();
        let mut params = ParamStore::init(&t, &graph, "a", 1, 1.0).unwrap();
        params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.3]).unwrap();
        params.set_slot(&SlotKey::TemporalSelect(0), &[0.8]).unwrap();
        params.set_slot(&SlotKey::GraphSelect(1), &[-0.6]).unwrap();
        let (_, trace) =
            forward(&t, EvalMode::Relaxed, &params, &traj, &graph, "a").unwrap();
        let grads = backward(&trace, &params).unwrap();
        for key in [SlotKey::TemporalSelect(0), SlotKey::GraphSelect(1)] {
            let entry = params.layout().entry(&key).unwrap().clone();
            let numeric = fd(&t, true, &params, &traj, &graph, "a", entry.offset, 1e-5);
            let analytic = grads.values()[entry.offset];
            assert_relative_eq!(analytic, numeric, max_relative = 1e-6, epsilon = 1e-9);
            assert!(analytic.abs() > 1e-6, "{key:?} gradient should be active");
        }
    }

    #[test]
    fn negative_raw_weights_differentiate_through_the_absolute_value() {
        let t = parse_structure("(always [0 1] (forall (pred p)))").unwrap();
        let graph = Graph::new(["a", "b", "c"], [("a", "b"), ("a", "c")]).unwrap();
        let traj = Trajectory::new(vec![
            vec![vec![0.0], vec![0.0]],
            vec![vec![1.0], vec![-0.5]],
            vec![vec![0.2], vec![0.8]],
        ])
        .unwrap();
        let mut params = ParamStore::init(&t, &graph, "a", 1, 1.0).unwrap();
        params.set_slot(&SlotKey::PredCoeff("p".into()), &[1.0]).unwrap();
        params
            .set_slot(&SlotKey::TemporalWeights(0), &[-0.6, 0.9])
            .unwrap();
        let (_, trace) = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &traj,
            &graph,
            "a",
        )
        .unwrap();
        let grads = backward(&trace, &params).unwrap();
        let entry = params
            .layout()
            .entry(&SlotKey::TemporalWeights(0))
            .unwrap()
            .clone();
        for j in 0..entry.len {
            let numeric = fd(&t, false, &params, &traj, &graph, "a", entry.offset + j, 1e-5);
            assert_relative_eq!(
                grads.values()[entry.offset + j],
                numeric,
                max_relative = 1e-6,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn backward_into_accumulates_with_seed() {
        let t = parse_structure("(always [0 0] (forall (pred p)))").unwrap();
        let traj = Trajectory::new(vec![vec![vec![1.0]], vec![vec![4.0]]]).unwrap();
        let params = ParamStore::init(&t, &pair(), "a", 1, 1.0).unwrap();
        let (_, trace) = forward(
            &t,
            EvalMode::Hardened(&OperatorAssignment::empty()),
            &params,
            &traj,
            &pair(),
            "a",
        )
        .unwrap();
        let mut acc = vec![0.0; params.values().len()];
        backward_into(&trace, &params, 2.0, &mut acc).unwrap();
        backward_into(&trace, &params, -0.5, &mut acc).unwrap();
        let single = backward(&trace, &params).unwrap();
        for (a, s) in acc.iter().zip(single.values()) {
            assert_relative_eq!(*a, 1.5 * s, max_relative = 1e-12, epsilon = 1e-15);
        }
        let mut wrong = vec![0.0; 1];
        assert!(backward_into(&trace, &params, 1.0, &mut wrong).is_err());
    }
}
