//! Interventionally fair regression: MMD, the predictor network, training
//! with a discrepancy penalty, and evaluation.

pub mod mlp;
pub mod mmd;
mod train;

pub use train::{
    admissible_intervention_values, eval_bandwidth, evaluate, train_predictor, BandwidthMode,
    EvalRecord, FairPredictor, FeatureSpec, InterventionalGroup, PenalizedObjective, Standardizer,
    TrainConfig, TrainError, Variant,
};
