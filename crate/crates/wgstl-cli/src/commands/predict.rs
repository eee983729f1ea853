//! `wgstl predict`: per-sample class labels from a trained model.

use std::path::Path;

use wgstl::Result;

use crate::output::{map_samples, render_table};
use crate::PredictArgs;

pub fn run(args: PredictArgs) -> Result<()> {
    let model = super::load_model(&args.model)?;
    let data = super::load_dataset(&args.data)?;
    model.check_compatible(&data)?;

    let results = map_samples(args.jobs, data.samples(), |_, sample| {
        let robustness = model.robustness(&sample.trajectory)?;
        let predicted = if robustness >= 0.0 { 1 } else { -1 };
        Ok((predicted, robustness))
    })?;

    let rows: Vec<Vec<String>> = results
        .iter()
        .zip(data.samples())
        .enumerate()
        .map(|(i, (&(predicted, robustness), sample))| {
            vec![
                i.to_string(),
                format!("{:+}", sample.label()),
                format!("{predicted:+}"),
                format!("{robustness:.6}"),
            ]
        })
        .collect();
    print!(
        "{}",
        render_table(&["sample", "label", "predicted", "robustness"], &rows)
    );
    let positives = results.iter().filter(|(p, _)| *p == 1).count();
    println!(
        "predicted: {positives} positive / {} negative",
        results.len() - positives
    );

    if let Some(path) = &args.csv {
        write_csv(path, &results, &data)?;
        println!("predictions written to {}", path.display());
    }
    Ok(())
}

fn write_csv(path: &Path, results: &[(i32, f64)], data: &wgstl::Dataset) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["sample", "label", "predicted", "robustness"])?;
    for (i, ((predicted, robustness), sample)) in results.iter().zip(data.samples()).enumerate() {
        writer.write_record([
            i.to_string(),
            sample.label().to_string(),
            predicted.to_string(),
            format!("{robustness:e}"),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
