//! The two-step learning procedure.
//!
//! Step one relaxes every undetermined operator slot to a continuous
//! coefficient `b` (initialized at 0, the indifference point) and trains it
//! jointly with provisional predicate/weight parameters; only the signs of
//! the learned `b` values are kept, fixing each slot to `always`/`forall`
//! (`b ≥ 0`) or `eventually`/`exists` (`b < 0`). Step two re-initializes all
//! parameters and retrains with the operators hardened to exactly `±1`.
//!
//! Both steps run the same loop: per-epoch reshuffle (seeded), mini-batch
//! gradient accumulation in a fixed sample order, one Adam update per batch,
//! then a full-dataset loss/accuracy measurement. The parameters reported by
//! a step are the ones with the lowest measured full-dataset loss across
//! epochs (the exponential loss can spike transiently, so last-epoch
//! parameters are not necessarily the best-performing ones).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Trajectory};
use crate::diff::backward::backward_into;
use crate::diff::forward::{forward, EvalMode};
use crate::diff::params::{ParamStore, SlotKey};
use crate::error::{Error, Result};
use crate::logic::ast::{FormulaTemplate, GraphKind, OperatorAssignment, TemporalKind};

use super::adam::AdamState;
use super::loss::loss_term;
use super::model::TrainedModel;

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Loss temperature η.
    pub eta: f64,
    /// Aggregation smoothness σ.
    pub sigma: f64,
    /// Adam learning rate.
    pub learning_rate: f64,
    /// Mini-batch size (the final short batch of an epoch is kept).
    pub batch_size: usize,
    /// Epochs per step; 0 skips training and keeps initialized parameters.
    pub epochs: usize,
    /// Seed for shuffling; step two uses `seed + 1` for its own stream.
    pub seed: u64,
    /// Adam first-moment decay β₁.
    pub adam_beta1: f64,
    /// Adam second-moment decay β₂.
    pub adam_beta2: f64,
    /// Adam denominator offset ε.
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 1.0,
            sigma: 1.0,
            learning_rate: 0.05,
            batch_size: 32,
            epochs: 500,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    /// Check every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("learning_rate", self.learning_rate),
            ("adam_eps", self.adam_eps),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::BadConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        for (name, value) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(value.is_finite() && value > 0.0 && value < 1.0) {
                return Err(Error::BadConfig(format!(
                    "{name} must lie strictly between 0 and 1, got {value}"
                )));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::BadConfig("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Full-dataset measurements taken after one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Epoch number; 0 is the pre-training baseline.
    pub epoch: usize,
    /// Total exponential loss over the dataset.
    pub loss: f64,
    /// Training accuracy in percent.
    pub accuracy: f64,
    /// Loss terms that hit the exponent cap.
    pub saturated: usize,
}

/// Per-epoch curve of one training step plus its selected checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (lowest full-dataset loss).
    pub best_epoch: usize,
    pub best_loss: f64,
}

/// Logs of both steps; step one is absent for fully determined templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub step1: Option<StepLog>,
    pub step2: StepLog,
}

/// Loss and accuracy of `params` over the whole dataset, in sample order.
fn measure(
    dataset: &Dataset,
    template: &FormulaTemplate,
    mode: EvalMode<'_>,
    params: &ParamStore,
    root: &str,
    eta: f64,
) -> Result<(f64, f64, usize)> {
    let mut total = 0.0;
    let mut correct = 0usize;
    let mut saturated = 0usize;
    for sample in dataset.samples() {
        let (value, _) = forward(template, mode, params, &sample.trajectory, &dataset.graph, root)?;
        let term = loss_term(value, sample.label(), eta);
        total += term.value;
        saturated += usize::from(term.saturated);
        let predicted = if value >= 0.0 { 1 } else { -1 };
        correct += usize::from(predicted == sample.label());
    }
    let accuracy = 100.0 * correct as f64 / dataset.len() as f64;
    Ok((total, accuracy, saturated))
}

/// One gradient-descent pass (either step), checkpointing the best epoch.
#[allow(clippy::too_many_arguments)]
fn run_step(
    dataset: &Dataset,
    template: &FormulaTemplate,
    mode: EvalMode<'_>,
    params: &mut ParamStore,
    root: &str,
    config: &TrainConfig,
    stream_seed: u64,
    stage: &'static str,
) -> Result<StepLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let mut adam = AdamState::new(params.values().len());
    let mut grad = vec![0.0; params.values().len()];
    let mut indices: Vec<usize> = (0..dataset.len()).collect();

    let (loss0, acc0, sat0) = measure(dataset, template, mode, params, root, config.eta)?;
    let mut records = vec![EpochRecord {
        epoch: 0,
        loss: loss0,
        accuracy: acc0,
        saturated: sat0,
    }];
    let mut best_values = params.values().to_vec();
    let mut best_loss = loss0;
    let mut best_epoch = 0usize;

    for epoch in 1..=config.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(config.batch_size) {
            grad.fill(0.0);
            for &i in batch {
                let sample = &dataset.samples()[i];
                let (value, trace) =
                    forward(template, mode, params, &sample.trajectory, &dataset.graph, root)?;
                let term = loss_term(value, sample.label(), config.eta);
                if term.grad_coeff != 0.0 {
                    backward_into(&trace, params, term.grad_coeff, &mut grad)?;
                }
            }
            adam.step(
                params.values_mut(),
                &grad,
                config.learning_rate,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            )?;
            if params.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    stage,
                    epoch,
                    detail: "parameters became non-finite after an optimizer step".into(),
                });
            }
        }
        let (loss, accuracy, saturated) = measure(dataset, template, mode, params, root, config.eta)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                stage,
                epoch,
                detail: format!("full-dataset loss evaluated to {loss}"),
            });
        }
        records.push(EpochRecord {
            epoch,
            loss,
            accuracy,
            saturated,
        });
        if loss < best_loss {
            best_loss = loss;
            best_epoch = epoch;
            best_values.copy_from_slice(params.values());
        }
    }
    params.set_values(&best_values)?;
    Ok(StepLog {
        records,
        best_epoch,
        best_loss,
    })
}

/// Validate the `(dataset, template, root)` combination shared by both steps.
fn check_task(
    dataset: &Dataset,
    template: &FormulaTemplate,
    root: &str,
    config: &TrainConfig,
) -> Result<()> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (pos, neg) = dataset.class_counts();
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    if dataset.has_missing() {
        return Err(Error::InvalidData(
            "dataset contains missing values; impute them before training".into(),
        ));
    }
    dataset.graph.node_index(root)?;
    let horizon = dataset.horizon().expect("nonempty dataset has a horizon");
    if horizon < template.required_horizon() {
        return Err(Error::HorizonExceeded {
            need: template.required_horizon(),
            have: horizon,
        });
    }
    Ok(())
}

/// Step one: learn which operator each flexible slot should be.
///
/// Returns the assignment and, when training actually ran, its log. A fully
/// determined template short-circuits to an empty assignment.
pub fn step1_learn_operators(
    dataset: &Dataset,
    template: &FormulaTemplate,
    root: &str,
    config: &TrainConfig,
) -> Result<(OperatorAssignment, Option<StepLog>)> {
    check_task(dataset, template, root, config)?;
    if !template.has_flexible_slots() {
        return Ok((OperatorAssignment::empty(), None));
    }
    let mut params = ParamStore::init(template, &dataset.graph, root, dataset.dim(), config.sigma)?;
    let log = run_step(
        dataset,
        template,
        EvalMode::Relaxed,
        &mut params,
        root,
        config,
        config.seed,
        "step1",
    )?;
    let mut assignment = OperatorAssignment::empty();
    for &id in template.flexible_temporal() {
        let b = params.slot(&SlotKey::TemporalSelect(id))?[0];
        let kind = if b >= 0.0 {
            TemporalKind::Always
        } else {
            TemporalKind::Eventually
        };
        assignment.temporal.insert(id, kind);
    }
    for &id in template.flexible_graph() {
        let b = params.slot(&SlotKey::GraphSelect(id))?[0];
        let kind = if b >= 0.0 {
            GraphKind::Forall
        } else {
            GraphKind::Exists
        };
        assignment.graph.insert(id, kind);
    }
    Ok((assignment, Some(log)))
}

/// Step two: with operators fixed by `assignment`, learn predicates and
/// importance weights from a fresh initialization.
pub fn step2_learn_parameters(
    dataset: &Dataset,
    template: &FormulaTemplate,
    assignment: &OperatorAssignment,
    root: &str,
    config: &TrainConfig,
) -> Result<(ParamStore, StepLog)> {
    check_task(dataset, template, root, config)?;
    template.check_assignment(assignment)?;
    let mut params = ParamStore::init(template, &dataset.graph, root, dataset.dim(), config.sigma)?;
    let log = run_step(
        dataset,
        template,
        EvalMode::Hardened(assignment),
        &mut params,
        root,
        config,
        config.seed.wrapping_add(1),
        "step2",
    )?;
    // The selection coefficients are inert while hardened; pin them to the
    // chosen operators' endpoint values so the stored parameters evaluate
    // identically in relaxed and hardened modes.
    for (&id, kind) in &assignment.temporal {
        let b = match kind {
            TemporalKind::Always => 1.0,
            TemporalKind::Eventually => -1.0,
        };
        params.set_slot(&SlotKey::TemporalSelect(id), &[b])?;
    }
    for (&id, kind) in &assignment.graph {
        let b = match kind {
            GraphKind::Forall => 1.0,
            GraphKind::Exists => -1.0,
        };
        params.set_slot(&SlotKey::GraphSelect(id), &[b])?;
    }
    Ok((params, log))
}

/// Run both steps and assemble the learned model.
pub fn train(
    dataset: &Dataset,
    template: &FormulaTemplate,
    root: &str,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let (assignment, step1) = step1_learn_operators(dataset, template, root, config)?;
    let (params, step2) = step2_learn_parameters(dataset, template, &assignment, root, config)?;
    TrainedModel::assemble(
        template.clone(),
        assignment,
        params,
        dataset.graph.clone(),
        root.to_string(),
        dataset.dim_names().to_vec(),
        config.clone(),
        TrainingLog { step1, step2 },
    )
}

/// Classify one trajectory with a trained model: `+1` when the weighted
/// robustness at the root is nonnegative, `−1` otherwise.
pub fn classify(model: &TrainedModel, trajectory: &Trajectory) -> Result<i32> {
    model.classify(trajectory)
}

/// Percentage of dataset samples whose [`classify`] result matches the label.
pub fn evaluate(model: &TrainedModel, dataset: &Dataset) -> Result<f64> {
    model.evaluate(dataset)
}
