//! `wgstl synth`: labeled synthetic datasets separated by a known formula.

use wgstl::{synth_dataset, Error, Result};

use crate::formula::FormulaFile;
use crate::SynthArgs;

pub fn run(args: SynthArgs) -> Result<()> {
    let (graph, hard, root) = match (&args.model, &args.formula) {
        (Some(path), None) => {
            let model = super::load_model(path)?;
            (model.graph().clone(), model.hardened()?, model.root().to_string())
        }
        (None, Some(path)) => {
            let file = FormulaFile::load(path)?;
            let graph_path = args.graph.as_ref().expect("clap enforces --graph with --formula");
            let graph = super::load_graph(graph_path)?;
            let hard = file.hardened()?;
            (graph, hard, file.root)
        }
        (None, None) => {
            return Err(Error::BadConfig(
                "one of --model or --formula is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --model with --formula"),
    };
    let root = args.node.clone().unwrap_or(root);
    let horizon = args.horizon.unwrap_or_else(|| hard.required_horizon());

    let dataset = synth_dataset(
        &graph,
        &hard,
        &root,
        horizon,
        args.pos,
        args.neg,
        args.margin,
        args.noise,
        args.seed,
    )?;
    dataset.save_json(&args.out)?;
    let (pos, neg) = dataset.class_counts();
    println!(
        "wrote {} samples ({pos} positive / {neg} negative, horizon {horizon}) to {}",
        dataset.len(),
        args.out.display()
    );
    Ok(())
}
