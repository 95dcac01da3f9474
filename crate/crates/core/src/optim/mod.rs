//! Training engine: optimizer, learning-rate schedule and the per-source
//! training loop.

mod nadam;
mod schedule;
mod train;

pub use nadam::{nadam_step, NadamConfig, OptimizerState};
pub use schedule::{plateau_schedule, PlateauSchedule};
pub use train::{
    epoch_batches, evaluate_loss, split_indices, train_source_model, EpochRecord, TrainConfig, TrainLog,
    TrainOutcome,
};
