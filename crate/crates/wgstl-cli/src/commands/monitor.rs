//! `wgstl monitor`: per-sample robustness and satisfaction of a formula —
//! the learned one from a model, or a standalone formula file — under
//! crisp or smooth weighted semantics.

use std::path::Path;

use wgstl::{
    boolean_sat, crisp_robustness, forward, Dataset, Error, EvalMode, Result,
};

use crate::formula::FormulaFile;
use crate::output::{map_samples, render_table};
use crate::MonitorArgs;

pub fn run(args: MonitorArgs) -> Result<()> {
    let data = super::load_dataset(&args.data)?;

    // (robustness, satisfied) per sample, plus the semantics label.
    let (results, semantics): (Vec<(f64, bool)>, &str) = match (&args.model, &args.formula) {
        (Some(path), None) => {
            let model = super::load_model(path)?;
            model.check_compatible(&data)?;
            let node = args.node.clone().unwrap_or_else(|| model.root().to_string());
            if args.crisp {
                let hard = model.hardened()?;
                let rows = map_samples(args.jobs, data.samples(), |_, sample| {
                    let r = crisp_robustness(&hard, &sample.trajectory, &data.graph, &node, 0)?;
                    let sat = boolean_sat(&hard, &sample.trajectory, &data.graph, &node, 0)?;
                    Ok((r, sat))
                })?;
                (rows, "crisp")
            } else {
                let rows = map_samples(args.jobs, data.samples(), |_, sample| {
                    let (r, _) = forward(
                        model.template(),
                        EvalMode::Hardened(model.assignment()),
                        model.params(),
                        &sample.trajectory,
                        model.graph(),
                        &node,
                    )?;
                    Ok((r, r > 0.0))
                })?;
                (rows, "soft")
            }
        }
        (None, Some(path)) => {
            if !args.crisp {
                return Err(Error::BadConfig(
                    "soft monitoring needs the weights of a trained model; \
                     pass --model, or --crisp to monitor a formula file"
                        .into(),
                ));
            }
            let file = FormulaFile::load(path)?;
            let hard = file.hardened()?;
            if hard.dim() != data.dim() {
                return Err(Error::DimMismatch {
                    expected: hard.dim(),
                    got: data.dim(),
                });
            }
            let node = args.node.clone().unwrap_or_else(|| file.root.clone());
            let rows = map_samples(args.jobs, data.samples(), |_, sample| {
                let r = crisp_robustness(&hard, &sample.trajectory, &data.graph, &node, 0)?;
                let sat = boolean_sat(&hard, &sample.trajectory, &data.graph, &node, 0)?;
                Ok((r, sat))
            })?;
            (rows, "crisp")
        }
        (None, None) => {
            return Err(Error::BadConfig(
                "one of --model or --formula is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --model with --formula"),
    };

    let rows: Vec<Vec<String>> = results
        .iter()
        .zip(data.samples())
        .enumerate()
        .map(|(i, (&(robustness, satisfied), sample))| {
            vec![
                i.to_string(),
                format!("{:+}", sample.label()),
                format!("{robustness:.6}"),
                satisfied.to_string(),
            ]
        })
        .collect();
    println!("semantics: {semantics}");
    print!(
        "{}",
        render_table(&["sample", "label", "robustness", "satisfied"], &rows)
    );
    let satisfied = results.iter().filter(|(_, sat)| *sat).count();
    println!("satisfied: {satisfied}/{}", results.len());

    if let Some(path) = &args.csv {
        write_csv(path, &results, &data)?;
        println!("robustness written to {}", path.display());
    }
    Ok(())
}

fn write_csv(path: &Path, results: &[(f64, bool)], data: &Dataset) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["sample", "label", "robustness", "satisfied"])?;
    for (i, ((robustness, satisfied), sample)) in results.iter().zip(data.samples()).enumerate() {
        writer.write_record([
            i.to_string(),
            sample.label().to_string(),
            format!("{robustness:e}"),
            satisfied.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
