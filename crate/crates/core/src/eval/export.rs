//! Pair vectors for external inspection.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingTable;
use crate::error::{Error, Result};
use crate::pairpath::PairPathModel;

use super::dataset::{Instance, LabelSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorKind {
    /// Both pseudo-path encodings of the pair.
    PseudoPath,
    /// `[v_w1; v_w2]` from the pair-path model's word table.
    WordConcat,
}

impl VectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VectorKind::PseudoPath => "pseudo_path",
            VectorKind::WordConcat => "word_concat",
        }
    }
}

impl FromStr for VectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudo_path" => Ok(VectorKind::PseudoPath),
            "word_concat" => Ok(VectorKind::WordConcat),
            _ => Err(Error::InvalidArgument(format!(
                "unknown vector kind {s:?}, expected pseudo_path or word_concat"
            ))),
        }
    }
}

pub fn word_concat(words: &EmbeddingTable, w1: &str, w2: &str) -> Vec<f64> {
    let mut v = words.lookup(w1).to_vec();
    v.extend_from_slice(words.lookup(w2));
    v
}

pub fn pair_vector(model: &PairPathModel, kind: VectorKind, w1: &str, w2: &str) -> Vec<f64> {
    match kind {
        VectorKind::PseudoPath => model.pseudo_path_features(w1, w2),
        VectorKind::WordConcat => word_concat(&model.word_table, w1, w2),
    }
}

/// One row per pair: `w1 TAB w2 TAB label TAB v_1 .. v_D`.
pub fn export_pair_vectors<W: Write>(
    mut w: W,
    model: &PairPathModel,
    pairs: &[Instance],
    labels: &LabelSet,
    kind: VectorKind,
) -> Result<()> {
    let mut line = String::new();
    for p in pairs {
        line.clear();
        write!(line, "{}\t{}\t{}", p.w1, p.w2, labels.label(p.label)).unwrap();
        for x in pair_vector(model, kind, &p.w1, &p.w2) {
            write!(line, "\t{x:.6}").unwrap();
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
