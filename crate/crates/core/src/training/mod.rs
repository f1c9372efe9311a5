//! Negative sampling, pairwise losses, optimizers and training strategies.

mod config;
mod loss;
mod negative;
mod optim;
mod report;
mod run;

pub use config::{OptimizerKind, Strategy, TrainConfig};
pub use loss::{batch_loss, group_batch_loss, user_batch_loss, BatchLoss, Task, Triple};
pub use negative::{build_triples, sample_negative};
pub use optim::Optimizer;
pub use report::{EpochRecord, Stage, TrainReport};
pub use run::{train, train_joint, train_two_stage};
