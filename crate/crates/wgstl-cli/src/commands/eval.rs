//! `wgstl eval`: accuracy of a trained model on a labeled dataset.

use wgstl::Result;

use crate::output::{map_samples, write_text};
use crate::EvalArgs;

pub fn run(args: EvalArgs) -> Result<()> {
    let model = super::load_model(&args.model)?;
    let data = super::load_dataset(&args.data)?;
    model.check_compatible(&data)?;

    let predicted = map_samples(args.jobs, data.samples(), |_, sample| {
        model.classify(&sample.trajectory)
    })?;
    let correct = predicted
        .iter()
        .zip(data.samples())
        .filter(|(&p, s)| p == s.label())
        .count();
    let accuracy = 100.0 * correct as f64 / data.len() as f64;
    let (pos, neg) = data.class_counts();

    println!("samples:  {} ({pos} positive / {neg} negative)", data.len());
    println!("correct:  {correct}");
    println!("accuracy: {accuracy:.2}%");

    if let Some(path) = &args.out {
        let sidecar = serde_json::json!({
            "samples": data.len(),
            "positive": pos,
            "negative": neg,
            "correct": correct,
            "accuracy_percent": accuracy,
        });
        let text = serde_json::to_string_pretty(&sidecar).expect("report serializes");
        write_text(path, &format!("{text}\n"))?;
        println!("scores written to {}", path.display());
    }
    Ok(())
}
