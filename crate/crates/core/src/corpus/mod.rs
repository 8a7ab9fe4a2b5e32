//! Dependency-parsed corpora, vocabularies and pretrained word vectors.

pub mod conllu;
pub mod embeddings;
pub mod vocab;

pub use conllu::{
    parse_conllu, read_conllu_dir, read_conllu_file, write_conllu, ParseStats, ParsedSentence,
    ParsedToken, TreeError,
};
pub use embeddings::{load_embeddings, read_embeddings, EmbeddingTable};
pub use vocab::{build_vocab, NounTags, Vocabulary, UNK};
