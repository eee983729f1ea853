//! Randomized cross-cutting properties of the logic, the smooth semantics,
//! the parser, and the data pipeline. Each case is driven by a seed so that
//! proptest shrinks to a single reproducible instance.

use indexmap::IndexMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgstl::generate::{
    random_assignment, random_graph, random_params, random_predicates, random_template,
    random_trajectory, GenOptions,
};
use wgstl::{
    boolean_sat, crisp_robustness, parse_structure, print_formula, print_hardened,
    print_structure, soft_aggregate, split, window, Dataset, FormulaTemplate, Graph, GraphKind,
    HardExpr, LabelRule, OperatorAssignment, Predicate, Sample, TemporalKind, Trajectory,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn opts() -> GenOptions {
    GenOptions {
        max_depth: 4,
        max_horizon: 5,
        max_fanout: 3,
        flexible_prob: 0.5,
    }
}

/// A random graph, template, assignment, predicates, and a trajectory long
/// enough to evaluate the hardened formula at time 0.
struct Instance {
    graph: Graph,
    template: FormulaTemplate,
    assignment: OperatorAssignment,
    hard: HardExpr,
    traj: Trajectory,
    root: String,
    dim: usize,
}

fn random_instance(seed: u64) -> Instance {
    let mut rng = rng(seed);
    let graph = random_graph(&mut rng, 5).expect("generated graph is valid");
    let template = random_template(&mut rng, &opts());
    let assignment = random_assignment(&mut rng, &template);
    let dim = rng.random_range(1..=3);
    let predicates = random_predicates(&mut rng, &template, dim);
    let hard = template
        .harden(&assignment, &predicates)
        .expect("assignment covers every slot");
    let traj = random_trajectory(
        &mut rng,
        graph.node_count(),
        template.required_horizon(),
        dim,
    );
    let root = {
        let i = rng.random_range(0..graph.node_count());
        graph.nodes()[i].clone()
    };
    Instance {
        graph,
        template,
        assignment,
        hard,
        traj,
        root,
        dim,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    /// The canonical structure text parses back to the identical template.
    #[test]
    fn structure_print_parse_roundtrip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let template = random_template(&mut rng, &opts());
        let text = print_structure(&template);
        let back = parse_structure(&text).expect("canonical text parses");
        prop_assert_eq!(&back, &template);
        prop_assert_eq!(print_structure(&back), text);
    }

    /// Both the hardened rendering and the annotated rendering (whose
    /// annotations live in comments) parse back to the hardened template.
    #[test]
    fn hardened_and_annotated_renderings_reparse(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let hardened_text = print_hardened(&inst.template, &inst.assignment).expect("hardened");
        let hardened = parse_structure(&hardened_text).expect("hardened text parses");

        let mut rng = rng(seed ^ 0x5eed_0001);
        let params = random_params(
            &mut rng,
            &inst.template,
            &inst.graph,
            &inst.root,
            inst.dim,
            0.5,
        )
        .expect("params for generated instance");
        let annotated = print_formula(&inst.template, &inst.assignment, &params).expect("formula");
        let from_annotated = parse_structure(&annotated).expect("annotated text parses");
        prop_assert_eq!(&from_annotated, &hardened);
    }

    /// Wherever crisp robustness is nonzero its sign decides satisfaction.
    #[test]
    fn crisp_sign_matches_boolean_semantics(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let r = crisp_robustness(&inst.hard, &inst.traj, &inst.graph, &inst.root, 0)
            .expect("robustness");
        let sat = boolean_sat(&inst.hard, &inst.traj, &inst.graph, &inst.root, 0)
            .expect("satisfaction");
        if r != 0.0 {
            prop_assert_eq!(r > 0.0, sat, "robustness {} vs satisfaction {}", r, sat);
        }
    }

    /// Double negation changes neither robustness (bitwise) nor satisfaction.
    #[test]
    fn negation_involution_is_exact(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let twice = HardExpr::Not(Box::new(HardExpr::Not(Box::new(inst.hard.clone()))));
        let plain = crisp_robustness(&inst.hard, &inst.traj, &inst.graph, &inst.root, 0).unwrap();
        let wrapped = crisp_robustness(&twice, &inst.traj, &inst.graph, &inst.root, 0).unwrap();
        prop_assert_eq!(plain, wrapped);
        prop_assert_eq!(
            boolean_sat(&inst.hard, &inst.traj, &inst.graph, &inst.root, 0).unwrap(),
            boolean_sat(&twice, &inst.traj, &inst.graph, &inst.root, 0).unwrap()
        );
    }

    /// ¬□φ ≡ ◊¬φ, ¬∀φ ≡ ∃¬φ, and ¬(φ∧ψ) ≡ ¬φ∨¬ψ, all bitwise under the
    /// crisp semantics.
    #[test]
    fn dualities_hold_exactly(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let mut rng = rng(seed ^ 0x5eed_0002);
        let k2 = rng.random_range(0..=2usize);
        let k1 = rng.random_range(0..=k2);
        let traj = random_trajectory(
            &mut rng,
            inst.graph.node_count(),
            inst.hard.required_horizon() + k2,
            inst.dim,
        );
        let child = inst.hard.clone();
        let eval = |f: &HardExpr| crisp_robustness(f, &traj, &inst.graph, &inst.root, 0).unwrap();

        let not_always = HardExpr::Not(Box::new(HardExpr::Temporal {
            kind: TemporalKind::Always,
            k1,
            k2,
            child: Box::new(child.clone()),
        }));
        let eventually_not = HardExpr::Temporal {
            kind: TemporalKind::Eventually,
            k1,
            k2,
            child: Box::new(HardExpr::Not(Box::new(child.clone()))),
        };
        prop_assert_eq!(eval(&not_always), eval(&eventually_not));

        let not_forall = HardExpr::Not(Box::new(HardExpr::Graph {
            kind: GraphKind::Forall,
            child: Box::new(child.clone()),
        }));
        let exists_not = HardExpr::Graph {
            kind: GraphKind::Exists,
            child: Box::new(HardExpr::Not(Box::new(child.clone()))),
        };
        prop_assert_eq!(eval(&not_forall), eval(&exists_not));

        let other = HardExpr::Not(Box::new(child.clone()));
        let not_and = HardExpr::Not(Box::new(HardExpr::And(vec![child.clone(), other.clone()])));
        let or_nots = HardExpr::Or(vec![
            HardExpr::Not(Box::new(child.clone())),
            HardExpr::Not(Box::new(other)),
        ]);
        prop_assert_eq!(eval(&not_and), eval(&or_nots));
    }

    /// Soft aggregation is a weighted average: it never leaves the input
    /// range, for either flavor and any smoothness.
    #[test]
    fn soft_aggregate_stays_within_input_range(
        seed in any::<u64>(),
        n in 1usize..=8,
        b in -2.0f64..2.0,
    ) {
        let mut rng = rng(seed);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();
        let sigma = rng.random_range(0.001..2.0);
        let out = soft_aggregate(&r, &w, b, sigma).expect("valid inputs");
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
        prop_assert!(out >= lo - slack && out <= hi + slack, "{} outside [{}, {}]", out, lo, hi);
    }

    /// With equal weights the aggregation error against the crisp extreme
    /// shrinks monotonically as sigma decreases.
    #[test]
    fn soft_aggregate_error_is_monotone_in_sigma(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng(seed);
        // Entries spaced at least 0.05 apart so the extreme is unique.
        let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        r.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        for i in 1..n {
            if r[i] - r[i - 1] < 0.05 {
                r[i] = r[i - 1] + 0.05;
            }
        }
        let w = vec![1.0; n];
        let range = r[n - 1] - r[0];
        for (b, target) in [(1.0, r[0]), (-1.0, r[n - 1])] {
            let errors: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
                .iter()
                .map(|&sigma| (soft_aggregate(&r, &w, b, sigma).expect("valid") - target).abs())
                .collect();
            for pair in errors.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-12, "errors {:?} not monotone", errors);
            }
            prop_assert!(
                errors[3] <= 1e-3 * range,
                "sigma=0.001 error {} exceeds 1e-3 * range {}",
                errors[3],
                range
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Splitting is a partition: sizes obey the fraction and the union of
    /// both halves is a permutation of the input samples.
    #[test]
    fn split_partitions_the_dataset(
        seed in any::<u64>(),
        n in 4usize..=24,
        fraction in 0.15f64..0.85,
    ) {
        let mut rng = rng(seed);
        let graph = Graph::new(["a", "b"], [("a", "b")]).unwrap();
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let traj = random_trajectory(&mut rng, 2, 3, 2);
                Sample::new(traj, if i % 2 == 0 { 1 } else { -1 }).unwrap()
            })
            .collect();
        let dataset = Dataset::new(graph, vec!["x1".into(), "x2".into()], samples).unwrap();
        let (train, test) = split(&dataset, fraction, seed).expect("valid fraction");

        let expected_train = ((fraction * n as f64).round() as usize).min(n);
        prop_assert_eq!(train.len(), expected_train);
        prop_assert_eq!(train.len() + test.len(), n);

        let fingerprint = |s: &Sample| format!("{}|{:?}", s.label(), s.trajectory.raw());
        let mut before: Vec<String> = dataset.samples().iter().map(&fingerprint).collect();
        let mut after: Vec<String> = train
            .samples()
            .iter()
            .chain(test.samples())
            .map(&fingerprint)
            .collect();
        before.sort();
        after.sort();
        prop_assert_eq!(before, after);
    }

    /// Windowing with the label-copying rule yields the arithmetic number of
    /// windows, each with the window horizon and the source label.
    #[test]
    fn window_counts_and_shapes(
        seed in any::<u64>(),
        len in 1usize..=6,
        stride in 1usize..=4,
        extra in 0usize..=10,
    ) {
        let mut rng = rng(seed);
        let steps = len + extra; // total steps per sample, >= window length
        let graph = Graph::new(["a", "b"], [("a", "b")]).unwrap();
        let traj = random_trajectory(&mut rng, 2, steps - 1, 1);
        let dataset = Dataset::new(
            graph,
            vec!["x1".into()],
            vec![Sample::new(traj, -1).unwrap()],
        )
        .unwrap();
        let windowed = window(&dataset, len, stride, &LabelRule::FromSample).expect("fits");
        let expected = 1 + (steps - len) / stride;
        prop_assert_eq!(windowed.len(), expected);
        for sample in windowed.samples() {
            prop_assert_eq!(sample.trajectory.horizon(), len - 1);
            prop_assert_eq!(sample.label(), -1);
        }
    }
}

/// The in-range property such aggregates inherit transitively: a hardened
/// evaluation with pinned operators equals crisp robustness in the
/// small-sigma limit on a formula with comfortably separated branch values.
#[test]
fn full_forward_approaches_crisp_robustness() {
    use wgstl::{forward, EvalMode, ParamStore};

    let graph = Graph::new(
        ["v1", "v2", "v3"],
        [("v1", "v2"), ("v1", "v3"), ("v2", "v3")],
    )
    .unwrap();
    let template = parse_structure("(always [0 2] (exists (pred hot)))").unwrap();
    let assignment = OperatorAssignment::empty();
    let predicates = IndexMap::from([(
        "hot".to_string(),
        Predicate::new("hot", vec![1.0], 0.0).unwrap(),
    )]);
    let hard = template.harden(&assignment, &predicates).unwrap();

    // Values chosen so every min/max along the evaluation tree is unique.
    let traj = Trajectory::new(vec![
        vec![vec![0.3], vec![4.1], vec![-2.2]],
        vec![vec![1.7], vec![-0.9], vec![3.3]],
        vec![vec![-1.1], vec![2.6], vec![0.8]],
    ])
    .unwrap();
    let crisp = crisp_robustness(&hard, &traj, &graph, "v1", 0).unwrap();

    let mut previous = f64::INFINITY;
    for sigma in [1.0, 0.1, 0.01, 0.001] {
        let mut params = ParamStore::init(&template, &graph, "v1", 1, sigma).unwrap();
        params.set_slot_by_label("pred:hot.a", &[1.0]).unwrap();
        params.set_slot_by_label("pred:hot.c", &[0.0]).unwrap();
        let (soft, _) = forward(
            &template,
            EvalMode::Hardened(&assignment),
            &params,
            &traj,
            &graph,
            "v1",
        )
        .unwrap();
        let error = (soft - crisp).abs();
        assert!(
            error <= previous + 1e-12,
            "error {error} regressed from {previous} at sigma={sigma}"
        );
        previous = error;
    }
    assert!(
        previous < 1e-2,
        "smallest-sigma error {previous} still too large"
    );
}
