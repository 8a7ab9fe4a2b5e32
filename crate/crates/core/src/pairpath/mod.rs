//! Unsupervised model of `P(path | w1, w2)` and its two uses: predicting
//! plausible paths for a pair and pseudo-path pair features.

pub mod model;
pub mod sampler;
pub mod train;

pub use model::{PairPathMeta, PairPathModel, DEFAULT_HIDDEN_DIM};
pub use sampler::NegativeSampler;
pub use train::{
    fit_pairpath, train_unsupervised, training_view, triple_objective, TrainingRunConfig,
    TrainingTriple,
};
