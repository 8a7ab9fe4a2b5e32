//! Dependency paths between noun pairs and the corpus triple store.

pub mod edge;
pub mod extract;
pub mod store;

pub use edge::{mirror_str, DepPath, Direction, PathEdge, EMPTY_PATH, X_SLOT, Y_SLOT};
pub use extract::{extract_path, extract_triples, DEFAULT_MAX_NODES};
pub use store::{
    paths_for_pair, prune, PathLexicon, PathSet, TripleStore, DEFAULT_LEXICON_CAP,
    DEFAULT_MIN_PATH_COUNT,
};
