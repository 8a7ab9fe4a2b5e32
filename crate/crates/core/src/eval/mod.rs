//! Datasets, scoring, probes, exports and end-to-end experiments.

pub mod dataset;
pub mod experiment;
pub mod export;
pub mod metrics;
pub mod probe;

pub use dataset::{load_dataset, Instance, LabelSet, RelationDataset, Split};
pub use experiment::{
    coverage, evaluate, run_experiment, run_pipeline, ArchitectureResult, ExperimentConfig,
    ExperimentInputs, ExtractionConfig, PipelineOutput, PipelineSettings,
};
pub use export::{export_pair_vectors, pair_vector, word_concat, VectorKind};
pub use metrics::{argmax, weighted_f1, ClassScores, Coverage, EvalReport};
pub use probe::{LinearProbe, ProbeConfig};
