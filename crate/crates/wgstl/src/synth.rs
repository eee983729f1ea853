//! Labeled-dataset synthesis from known ground-truth formulas.
//!
//! [`synth_dataset`] rejection-samples random trajectories and labels them
//! with the crisp monitor, keeping only samples whose robustness clears a
//! margin on either side — a generator whose datasets are separable by
//! construction and traceable to an explicit formula.
//!
//! [`operator_recovery_dataset`] builds datasets that are separable *only*
//! by one specific temporal × graph operator combination. Each sample is a
//! high/low sign pattern over (window step, root neighbor) cells plus a
//! per-sample baseline shift, so no single-cell statistic or sample mean
//! separates the classes — recovering the labels requires aggregating with
//! the generating combination's min/max structure, which is exactly what
//! operator learning must discover.

use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::data::{Dataset, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::logic::ast::{GraphKind, Predicate, TemporalKind};
use crate::logic::crisp::{boolean_sat, crisp_robustness, HardExpr};

/// How many rejected candidates per requested sample are tolerated before
/// giving up (plus a flat allowance for tiny requests).
const ATTEMPTS_PER_SAMPLE: usize = 1000;

/// Generate `n_pos + n_neg` trajectories whose crisp robustness at `root`
/// clears `±margin`, labeled accordingly and verified by the crisp monitor.
///
/// Candidate values are drawn i.i.d. per `(node, step, dimension)` cell from
/// a wide normal plus `noise`-scaled jitter; candidates inside the margin
/// band (or of a class already filled) are discarded. Fails with
/// [`Error::SynthExhausted`] when the retry budget runs out, which signals
/// an unsatisfiable formula/margin combination.
#[allow(clippy::too_many_arguments)]
pub fn synth_dataset(
    graph: &Graph,
    formula: &HardExpr,
    root: &str,
    horizon: usize,
    n_pos: usize,
    n_neg: usize,
    margin: f64,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    graph.node_index(root)?;
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(Error::BadConfig(format!(
            "margin must be nonnegative and finite, got {margin}"
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::BadConfig(format!(
            "noise must be nonnegative and finite, got {noise}"
        )));
    }
    if horizon < formula.required_horizon() {
        return Err(Error::HorizonExceeded {
            need: formula.required_horizon(),
            have: horizon,
        });
    }
    let dim = formula.dim();
    if dim == 0 {
        return Err(Error::InvalidTemplate(
            "formula contains no predicate to derive a dimension from".into(),
        ));
    }
    let dim_names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wide = Normal::new(0.0, 2.0).expect("valid normal");
    let jitter = if noise > 0.0 {
        Some(Normal::new(0.0, noise).expect("valid normal"))
    } else {
        None
    };
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    let mut need_pos = n_pos;
    let mut need_neg = n_neg;
    let budget = ATTEMPTS_PER_SAMPLE * (n_pos + n_neg) + ATTEMPTS_PER_SAMPLE;
    let mut attempts = 0usize;
    while need_pos + need_neg > 0 {
        if attempts >= budget {
            return Err(Error::SynthExhausted {
                attempts,
                missing_pos: need_pos,
                missing_neg: need_neg,
            });
        }
        attempts += 1;
        let values: Vec<Vec<Vec<f64>>> = (0..graph.node_count())
            .map(|_| {
                (0..=horizon)
                    .map(|_| {
                        (0..dim)
                            .map(|_| {
                                wide.sample(&mut rng)
                                    + jitter.map_or(0.0, |j| j.sample(&mut rng))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let traj = Trajectory::new(values)?;
        let r = crisp_robustness(formula, &traj, graph, root, 0)?;
        if r > margin && need_pos > 0 {
            need_pos -= 1;
            samples.push(Sample::new(traj, 1)?);
        } else if r < -margin && need_neg > 0 {
            need_neg -= 1;
            samples.push(Sample::new(traj, -1)?);
        }
    }
    let dataset = Dataset::new(graph.clone(), dim_names, samples)?;
    verify_labels(&dataset, formula, root)?;
    Ok(dataset)
}

/// One temporal × graph operator combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorCombo {
    AlwaysForall,
    AlwaysExists,
    EventuallyForall,
    EventuallyExists,
}

impl OperatorCombo {
    /// All four combinations.
    pub const ALL: [OperatorCombo; 4] = [
        OperatorCombo::AlwaysForall,
        OperatorCombo::AlwaysExists,
        OperatorCombo::EventuallyForall,
        OperatorCombo::EventuallyExists,
    ];

    /// The operator pair.
    pub fn kinds(self) -> (TemporalKind, GraphKind) {
        match self {
            OperatorCombo::AlwaysForall => (TemporalKind::Always, GraphKind::Forall),
            OperatorCombo::AlwaysExists => (TemporalKind::Always, GraphKind::Exists),
            OperatorCombo::EventuallyForall => (TemporalKind::Eventually, GraphKind::Forall),
            OperatorCombo::EventuallyExists => (TemporalKind::Eventually, GraphKind::Exists),
        }
    }

    /// The ground-truth formula these datasets are built around:
    /// `<temporal> [k1 k2] (<graph> (x > 0))`.
    pub fn formula(self, k1: usize, k2: usize) -> HardExpr {
        let (temporal, graph) = self.kinds();
        HardExpr::Temporal {
            kind: temporal,
            k1,
            k2,
            child: Box::new(HardExpr::Graph {
                kind: graph,
                child: Box::new(HardExpr::Pred(
                    Predicate::new("p", vec![1.0], 0.0).expect("valid predicate"),
                )),
            }),
        }
    }
}

/// Magnitude of the high/low cells in recovery patterns.
const PATTERN_LEVEL: f64 = 3.0;
/// Per-cell jitter half-width.
const CELL_JITTER: f64 = 0.4;
/// Per-sample baseline half-width (defeats sample-mean separability).
const BASELINE_JITTER: f64 = 1.0;

/// Build a 1-dimensional dataset separable only by `combo`'s operator pair
/// applied over window `[k1, k2]` to the neighbors of `root`.
///
/// Every emitted sample is re-checked against the ground-truth formula with
/// the crisp monitor. Needs at least 2 root neighbors and a window of at
/// least 2 steps — with fewer, some other combination also separates the
/// classes and recovery would be ill-posed.
#[allow(clippy::too_many_arguments)]
pub fn operator_recovery_dataset(
    combo: OperatorCombo,
    graph: &Graph,
    root: &str,
    k1: usize,
    k2: usize,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Dataset> {
    let root_idx = graph.node_index(root)?;
    let neighbors = graph.neighbor_indices(root_idx).to_vec();
    if neighbors.len() < 2 {
        return Err(Error::BadConfig(format!(
            "operator recovery needs a root with at least 2 neighbors, {root} has {}",
            neighbors.len()
        )));
    }
    if k2 < k1 {
        return Err(Error::BadInterval { k1, k2 });
    }
    if k2 - k1 + 1 < 2 {
        return Err(Error::BadConfig(
            "operator recovery needs a window of at least 2 steps".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps: Vec<usize> = (k1..=k2).collect();
    let mut samples = Vec::with_capacity(n_pos + n_neg);
    for i in 0..n_pos + n_neg {
        let positive = i < n_pos;
        samples.push(pattern_sample(
            combo, graph, &neighbors, &steps, k2, positive, &mut rng,
        )?);
    }
    let dataset = Dataset::new(graph.clone(), vec!["x1".into()], samples)?;
    verify_labels(&dataset, &combo.formula(k1, k2), root)?;
    Ok(dataset)
}

/// Draw one patterned sample. Cells are `(window step, neighbor)` pairs;
/// each is set high (`+PATTERN_LEVEL`) or low (`−PATTERN_LEVEL`) according
/// to the combination-specific pattern, then jittered per cell and shifted
/// by a per-sample baseline. All other `(node, step)` values are standard
/// normal noise.
fn pattern_sample(
    combo: OperatorCombo,
    graph: &Graph,
    neighbors: &[usize],
    steps: &[usize],
    horizon: usize,
    positive: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Sample> {
    let n_steps = steps.len();
    let n_nb = neighbors.len();
    // high[s][m] for window step index s and neighbor index m.
    let mut high = vec![vec![false; n_nb]; n_steps];
    let star_step = *steps.choose(rng).expect("window nonempty") - steps[0];
    let star_nb = rng.random_range(0..n_nb);
    match (combo, positive) {
        (OperatorCombo::AlwaysForall, true) => {
            // Satisfied everywhere.
            high.iter_mut().for_each(|row| row.fill(true));
        }
        (OperatorCombo::AlwaysForall, false) => {
            // One single violated cell breaks min-min.
            high.iter_mut().for_each(|row| row.fill(true));
            high[star_step][star_nb] = false;
        }
        (OperatorCombo::EventuallyExists, true) => {
            // One single satisfied cell suffices for max-max.
            high[star_step][star_nb] = true;
        }
        (OperatorCombo::EventuallyExists, false) => {
            // Violated everywhere.
        }
        (OperatorCombo::AlwaysExists, true) => {
            // Every step has exactly one witness neighbor.
            for row in high.iter_mut() {
                row[rng.random_range(0..n_nb)] = true;
            }
        }
        (OperatorCombo::AlwaysExists, false) => {
            // One step loses all witnesses; the others keep one.
            for (s, row) in high.iter_mut().enumerate() {
                if s != star_step {
                    row[rng.random_range(0..n_nb)] = true;
                }
            }
        }
        (OperatorCombo::EventuallyForall, true) => {
            // One step satisfied at every neighbor; others only partially.
            for (s, row) in high.iter_mut().enumerate() {
                if s == star_step {
                    row.fill(true);
                } else {
                    row[rng.random_range(0..n_nb)] = true;
                }
            }
        }
        (OperatorCombo::EventuallyForall, false) => {
            // No step is satisfied at every neighbor.
            for row in high.iter_mut() {
                row[rng.random_range(0..n_nb)] = true;
            }
        }
    }

    let baseline = Uniform::new(-BASELINE_JITTER, BASELINE_JITTER)
        .expect("valid uniform")
        .sample(rng);
    let cell = Uniform::new(-CELL_JITTER, CELL_JITTER).expect("valid uniform");
    let background = Normal::new(0.0, 1.0).expect("valid normal");
    let values: Vec<Vec<Vec<f64>>> = (0..graph.node_count())
        .map(|node| {
            (0..=horizon)
                .map(|k| {
                    let in_window = steps.first().is_some_and(|&f| k >= f) && k <= steps[n_steps - 1];
                    let nb_pos = neighbors.iter().position(|&m| m == node);
                    let value = match (in_window, nb_pos) {
                        (true, Some(m)) => {
                            let level = if high[k - steps[0]][m] {
                                PATTERN_LEVEL
                            } else {
                                -PATTERN_LEVEL
                            };
                            level + cell.sample(rng) + baseline
                        }
                        _ => background.sample(rng),
                    };
                    vec![value]
                })
                .collect()
        })
        .collect();
    Sample::new(Trajectory::new(values)?, if positive { 1 } else { -1 })
}

/// Check every sample's label against the crisp monitor; an internal error
/// here means the generator itself is broken.
fn verify_labels(dataset: &Dataset, formula: &HardExpr, root: &str) -> Result<()> {
    for (i, sample) in dataset.samples().iter().enumerate() {
        let sat = boolean_sat(formula, &sample.trajectory, &dataset.graph, root, 0)?;
        let expected = sample.label() == 1;
        if sat != expected {
            return Err(Error::InvalidData(format!(
                "synthesized sample {i} disagrees with the crisp monitor (label {}, satisfied {sat})",
                sample.label()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::crisp::crisp_robustness;

    fn star() -> Graph {
        Graph::new(
            ["hub", "s1", "s2", "s3"],
            [("hub", "s1"), ("hub", "s2"), ("hub", "s3")],
        )
        .unwrap()
    }

    fn simple_formula() -> HardExpr {
        OperatorCombo::AlwaysForall.formula(0, 2)
    }

    #[test]
    fn empty_request_yields_empty_dataset() {
        let ds = synth_dataset(&star(), &simple_formula(), "hub", 2, 0, 0, 0.5, 0.0, 7).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.dim(), 1);
    }

    #[test]
    fn labels_respect_the_margin_and_monitor() {
        let formula = simple_formula();
        let ds = synth_dataset(&star(), &formula, "hub", 2, 12, 12, 0.3, 0.1, 42).unwrap();
        assert_eq!(ds.class_counts(), (12, 12));
        for sample in ds.samples() {
            let r = crisp_robustness(&formula, &sample.trajectory, &ds.graph, "hub", 0).unwrap();
            if sample.label() == 1 {
                assert!(r > 0.3);
            } else {
                assert!(r < -0.3);
            }
            assert_eq!(
                boolean_sat(&formula, &sample.trajectory, &ds.graph, "hub", 0).unwrap(),
                sample.label() == 1
            );
        }
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let formula = simple_formula();
        let a = synth_dataset(&star(), &formula, "hub", 2, 5, 5, 0.2, 0.1, 9).unwrap();
        let b = synth_dataset(&star(), &formula, "hub", 2, 5, 5, 0.2, 0.1, 9).unwrap();
        let c = synth_dataset(&star(), &formula, "hub", 2, 5, 5, 0.2, 0.1, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn impossible_margin_exhausts_the_budget() {
        // A contradiction (x > 0 and ¬(x > 0)) has robustness ≤ 0 everywhere,
        // so positive samples can never be generated.
        let pred = HardExpr::Pred(Predicate::new("p", vec![1.0], 0.0).unwrap());
        let contradiction = HardExpr::Temporal {
            kind: TemporalKind::Always,
            k1: 0,
            k2: 0,
            child: Box::new(HardExpr::Graph {
                kind: GraphKind::Forall,
                child: Box::new(HardExpr::And(vec![
                    pred.clone(),
                    HardExpr::Not(Box::new(pred)),
                ])),
            }),
        };
        let err = synth_dataset(&star(), &contradiction, "hub", 0, 1, 0, 0.1, 0.0, 3).unwrap_err();
        match err {
            Error::SynthExhausted { missing_pos, .. } => assert_eq!(missing_pos, 1),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn recovery_patterns_match_their_generating_combo_only() {
        let g = star();
        for combo in OperatorCombo::ALL {
            let ds = operator_recovery_dataset(combo, &g, "hub", 1, 4, 20, 20, 11).unwrap();
            assert_eq!(ds.class_counts(), (20, 20));
            // The generating combination separates perfectly…
            let own = combo.formula(1, 4);
            for s in ds.samples() {
                assert_eq!(
                    boolean_sat(&own, &s.trajectory, &ds.graph, "hub", 0).unwrap(),
                    s.label() == 1,
                    "{combo:?} must separate its own dataset"
                );
            }
            // …and each other combination misclassifies some sample.
            for other in OperatorCombo::ALL {
                if other == combo {
                    continue;
                }
                let formula = other.formula(1, 4);
                let clash = ds.samples().iter().any(|s| {
                    boolean_sat(&formula, &s.trajectory, &ds.graph, "hub", 0).unwrap()
                        != (s.label() == 1)
                });
                assert!(clash, "{other:?} should fail on the {combo:?} dataset");
            }
        }
    }

    #[test]
    fn recovery_rejects_degenerate_setups() {
        let g = star();
        // Spoke s1 has only one neighbor (the hub).
        assert!(matches!(
            operator_recovery_dataset(OperatorCombo::AlwaysForall, &g, "s1", 0, 3, 4, 4, 1),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(
            operator_recovery_dataset(OperatorCombo::AlwaysForall, &g, "hub", 2, 2, 4, 4, 1),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(
            operator_recovery_dataset(OperatorCombo::AlwaysForall, &g, "hub", 3, 2, 4, 4, 1),
            Err(Error::BadInterval { .. })
        ));
    }
}
