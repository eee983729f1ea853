//! Learning: loss, optimizer, the two-step training procedure, and trained
//! models with their serialization.

pub mod adam;
pub mod loss;
pub mod model;
pub mod steps;

pub use adam::AdamState;
pub use loss::{loss, loss_term, LossOutcome, LossTerm, EXP_CAP};
pub use model::{TrainedModel, FORMAT_VERSION};
pub use steps::{
    classify, evaluate, step1_learn_operators, step2_learn_parameters, train, EpochRecord,
    StepLog, TrainConfig, TrainingLog,
};
