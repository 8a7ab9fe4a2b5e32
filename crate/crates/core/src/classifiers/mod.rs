//! Supervised path-based relation classifiers and their training protocol.

pub mod augment;
pub mod edge;
pub mod encoder;
pub mod model;
pub mod train;

pub use augment::{augment, augmented_paths};
pub use edge::{EdgeEmbedder, EncodedPath, COMPONENT_UNK, EDGE_DIM};
pub use encoder::{PathEncoder, PATH_DIM};
pub use model::{
    Architecture, BatchOutput, ClassifierSetup, ClassifierSpec, PairExample, RelationClassifier,
    TrainingSummary,
};
pub use train::{
    evaluate_examples, prepare_examples, train_setting, train_supervised, EarlyStopping,
    SettingOutcome, SupervisedInputs, SupervisedTrainConfig, TuningReport, TuningRow,
};
