//! `wgstl inspect`: human-readable dump of a model file.

use wgstl::{print_hardened, Result};

use super::train::describe_assignment;
use crate::output::{fmt_vec4, render_table};
use crate::InspectArgs;

pub fn run(args: InspectArgs) -> Result<()> {
    let model = super::load_model(&args.model)?;
    let params = model.params();
    let config = model.config();

    println!("model:       {}", args.model.display());
    println!("structure:   {}", model.structure_text());
    println!(
        "hardened:    {}",
        print_hardened(model.template(), model.assignment())?
    );
    println!("root:        {}", model.root());
    println!(
        "graph:       {} nodes, {} edges",
        model.graph().node_count(),
        model.graph().edges().count()
    );
    println!("dimensions:  {}", model.dim_names().join(", "));
    println!("operators:   {}", describe_assignment(model.assignment()));
    println!(
        "config:      eta={} sigma={} learning_rate={} batch_size={} epochs={} seed={} \
         adam=({}, {}, {})",
        config.eta,
        config.sigma,
        config.learning_rate,
        config.batch_size,
        config.epochs,
        config.seed,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_eps
    );
    match &model.log().step1 {
        None => println!("step 1:      skipped (fully determined structure)"),
        Some(log) => println!(
            "step 1:      best epoch {} (loss {:.6e})",
            log.best_epoch, log.best_loss
        ),
    }
    let step2 = &model.log().step2;
    println!(
        "step 2:      best epoch {} (loss {:.6e})",
        step2.best_epoch, step2.best_loss
    );

    println!();
    println!("parameters");
    let mut rows = Vec::new();
    for entry in params.layout().entries() {
        let raw = params.slot(&entry.key)?;
        let normalized = if entry.key.is_weight() {
            fmt_vec4(&params.normalized(&entry.key)?)
        } else {
            "-".to_string()
        };
        rows.push(vec![entry.label.clone(), fmt_vec4(raw), normalized]);
    }
    print!("{}", render_table(&["slot", "raw", "normalized"], &rows));

    println!();
    println!("formula");
    print!("{}", model.formula_text()?);
    Ok(())
}
