//! `wgstl train`: data preparation, the two-step learning pipeline, and a
//! report with the full per-epoch curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use wgstl::train::{StepLog, TrainingLog};
use wgstl::{
    impute_zeros, parse_structure, split, window, Dataset, Error, LabelRule, OperatorAssignment,
    Result, TrainConfig, TrainedModel,
};

use crate::output::{render_table, write_text};
use crate::{ConfigOverrides, TrainArgs};

pub fn run(args: TrainArgs) -> Result<()> {
    let config = resolve_config(args.config.as_deref(), &args.overrides)?;
    let mut data = if args.manifest {
        Dataset::from_tabular_manifest(&args.data).map_err(|e| super::annotate(&args.data, e))?
    } else {
        super::load_dataset(&args.data)?
    };
    if args.impute {
        data = impute_zeros(&data);
    }
    if let Some(len) = args.window_len {
        let rule = match &args.label_rule {
            None => LabelRule::FromSample,
            Some(text) => serde_json::from_str(text)
                .map_err(|e| Error::BadConfig(format!("bad --label-rule: {e}")))?,
        };
        data = window(&data, len, args.window_stride, &rule)?;
    }
    let (train_set, test_set) = match (args.test_data.as_deref(), args.train_fraction) {
        (Some(path), _) => (data, Some(super::load_dataset(path)?)),
        (None, Some(fraction)) => {
            let (train, test) = split(&data, fraction, args.split_seed)?;
            (train, Some(test))
        }
        (None, None) => (data, None),
    };
    let template = parse_structure(&super::read_text(&args.structure)?)?;

    let model = wgstl::train(&train_set, &template, &args.root, &config)?;
    let train_acc = model.evaluate(&train_set)?;
    let test_acc = match &test_set {
        Some(test) => Some(model.evaluate(test)?),
        None => None,
    };

    model.save(&args.out)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "report.txt"));
    write_text(
        &report_path,
        &build_report(&model, &train_set, test_set.as_ref(), train_acc, test_acc)?,
    )?;
    let csv_path = args
        .log_csv
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "log.csv"));
    write_log_csv(&csv_path, model.log())?;

    println!("model written to {}", args.out.display());
    println!("report written to {}", report_path.display());
    println!("epoch log written to {}", csv_path.display());
    println!();
    println!("structure: {}", model.structure_text());
    println!("operators: {}", describe_assignment(model.assignment()));
    println!("formula:");
    print!("{}", model.formula_text()?);
    println!();
    println!("train accuracy: {train_acc:.2}%");
    if let Some(acc) = test_acc {
        println!("test accuracy:  {acc:.2}%");
    }
    Ok(())
}

/// `model.json` becomes `model.report.txt` / `model.log.csv`.
fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn resolve_config(path: Option<&Path>, over: &ConfigOverrides) -> Result<TrainConfig> {
    let mut config = match path {
        None => TrainConfig::default(),
        Some(p) => {
            let text = super::read_text(p)?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
                path: format!("{}: {}", p.display(), e.path()),
                message: e.inner().to_string(),
            })?
        }
    };
    if let Some(v) = over.eta {
        config.eta = v;
    }
    if let Some(v) = over.sigma {
        config.sigma = v;
    }
    if let Some(v) = over.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = over.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = over.epochs {
        config.epochs = v;
    }
    if let Some(v) = over.seed {
        config.seed = v;
    }
    if let Some(v) = over.adam_beta1 {
        config.adam_beta1 = v;
    }
    if let Some(v) = over.adam_beta2 {
        config.adam_beta2 = v;
    }
    if let Some(v) = over.adam_eps {
        config.adam_eps = v;
    }
    Ok(config)
}

/// Human-readable list of the learned operator choices.
pub(crate) fn describe_assignment(assignment: &OperatorAssignment) -> String {
    if assignment.is_empty() {
        return "(fully determined structure)".to_string();
    }
    let mut parts = Vec::new();
    for (id, kind) in &assignment.temporal {
        parts.push(format!("n{id} = {kind:?}").to_lowercase());
    }
    for (id, kind) in &assignment.graph {
        parts.push(format!("n{id} = {kind:?}").to_lowercase());
    }
    parts.join(", ")
}

fn epoch_table(log: &StepLog) -> String {
    let rows: Vec<Vec<String>> = log
        .records
        .iter()
        .map(|r| {
            vec![
                r.epoch.to_string(),
                format!("{:.6e}", r.loss),
                format!("{:.2}", r.accuracy),
                r.saturated.to_string(),
            ]
        })
        .collect();
    render_table(&["epoch", "loss", "accuracy%", "saturated"], &rows)
}

fn build_report(
    model: &TrainedModel,
    train_set: &Dataset,
    test_set: Option<&Dataset>,
    train_acc: f64,
    test_acc: Option<f64>,
) -> Result<String> {
    let mut out = String::new();
    let c = model.config();
    let (pos, neg) = train_set.class_counts();
    out.push_str("w-GSTL training report\n======================\n\n");
    let _ = writeln!(out, "structure:   {}", model.structure_text());
    let _ = writeln!(out, "root:        {}", model.root());
    let _ = writeln!(
        out,
        "graph:       {} nodes, {} edges",
        model.graph().node_count(),
        model.graph().edges().count()
    );
    let _ = writeln!(out, "dimensions:  {}", model.dim_names().join(", "));
    let _ = write!(
        out,
        "samples:     {} train ({pos} positive / {neg} negative)",
        train_set.len()
    );
    match test_set {
        Some(test) => {
            let _ = writeln!(out, ", {} test", test.len());
        }
        None => out.push('\n'),
    }
    let _ = writeln!(
        out,
        "config:      eta={} sigma={} learning_rate={} batch_size={} epochs={} seed={} \
         adam=({}, {}, {})",
        c.eta, c.sigma, c.learning_rate, c.batch_size, c.epochs, c.seed, c.adam_beta1,
        c.adam_beta2, c.adam_eps
    );
    out.push('\n');

    out.push_str("step 1: operator selection\n--------------------------\n");
    match &model.log().step1 {
        None => out.push_str("skipped: the structure has no flexible operator slots\n"),
        Some(log) => {
            let _ = writeln!(
                out,
                "chosen operators: {}",
                describe_assignment(model.assignment())
            );
            let _ = writeln!(out, "best epoch {} (loss {:.6e})", log.best_epoch, log.best_loss);
            out.push('\n');
            out.push_str(&epoch_table(log));
        }
    }
    out.push('\n');

    out.push_str("step 2: parameter learning\n--------------------------\n");
    let log = &model.log().step2;
    let _ = writeln!(out, "best epoch {} (loss {:.6e})", log.best_epoch, log.best_loss);
    out.push('\n');
    out.push_str(&epoch_table(log));
    out.push('\n');

    out.push_str("learned formula\n---------------\n");
    out.push_str(&model.formula_text()?);
    out.push('\n');
    let _ = writeln!(out, "train accuracy: {train_acc:.2}%");
    if let Some(acc) = test_acc {
        let _ = writeln!(out, "test accuracy:  {acc:.2}%");
    }
    Ok(out)
}

fn write_log_csv(path: &Path, log: &TrainingLog) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["step", "epoch", "loss", "accuracy", "saturated"])?;
    let mut dump = |step: &str, log: &StepLog| -> Result<()> {
        for r in &log.records {
            writer.write_record([
                step.to_string(),
                r.epoch.to_string(),
                format!("{:e}", r.loss),
                format!("{}", r.accuracy),
                r.saturated.to_string(),
            ])?;
        }
        Ok(())
    };
    if let Some(step1) = &log.step1 {
        dump("1", step1)?;
    }
    dump("2", &log.step2)?;
    writer.flush()?;
    Ok(())
}
