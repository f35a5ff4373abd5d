//! Loss, metrics, optimization and cross-validation.

mod cv;
mod loss;
mod nadam;
mod trainer;

pub use cv::{evaluate, kfold_cv, run_fold, summarize, CvSummary, FoldOutcome, FoldReport, SessionSet};
pub use loss::{balanced_accuracy, weighted_cross_entropy, Bac, ConfusionCounts};
pub use nadam::Nadam;
pub use trainer::{train, validation_split, ClassWeighting, EpochRecord, TrainConfig, TrainOutcome};
