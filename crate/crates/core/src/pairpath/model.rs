use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::corpus::{EmbeddingTable, Vocabulary};
use crate::error::{Error, Result};
use crate::neural::linear::{tanh_backward, tanh_vec};
use crate::neural::tensor::{axpy, dot, log_sigmoid, sigmoid};
use crate::neural::{init, Linear, Parameter};
use crate::paths::{mirror_str, PathLexicon};

pub const MODEL_KIND: &str = "pairpath";
pub const DEFAULT_HIDDEN_DIM: usize = 100;

/// Scalars recorded alongside the tensors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairPathMeta {
    pub hidden_dim: usize,
    pub seed: u64,
    pub init: String,
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub negatives: usize,
    pub training_triples: usize,
    pub objective_log: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StoredMeta {
    meta: PairPathMeta,
    words: Vec<String>,
    paths: Vec<String>,
    path_counts: Vec<u64>,
}

/// Model of `P(path | w1, w2)`.
///
/// A pair is encoded as `h~ = tanh(W2 tanh(W1 [v_w1; v_w2] + b1) + b2)` over
/// frozen word vectors, and each lexicon path has its own vector `v_path`.
/// The plausibility of a triple is `σ(v_path · h~)`.
#[derive(Clone, Debug)]
pub struct PairPathModel {
    pub word_table: EmbeddingTable,
    pub encoder1: Linear,
    pub encoder2: Linear,
    pub path_table: Parameter,
    pub lexicon: PathLexicon,
    pub meta: PairPathMeta,
}

/// Activations of one pair encoding, kept for backprop.
#[derive(Clone, Debug)]
pub(crate) struct PairTrace {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    pub repr: Vec<f64>,
}

impl PairPathModel {
    /// Fresh model. Draws `W1`, then `W2`, then the path table from `rng`.
    pub fn new<R: Rng>(
        mut word_table: EmbeddingTable,
        lexicon: PathLexicon,
        hidden_dim: usize,
        seed: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden_dim == 0 {
            return Err(Error::InvalidArgument("hidden dimension must be positive".into()));
        }
        if lexicon.is_empty() {
            return Err(Error::Data("path lexicon is empty".into()));
        }
        word_table.trainable = false;
        let dw = word_table.dim();
        let encoder1 = Linear::new(2 * dw, hidden_dim, rng);
        let encoder2 = Linear::new(hidden_dim, hidden_dim, rng);
        let path_table = Parameter::new(init::embedding_uniform(lexicon.len(), hidden_dim, rng));
        Ok(PairPathModel {
            word_table,
            encoder1,
            encoder2,
            path_table,
            lexicon,
            meta: PairPathMeta {
                hidden_dim,
                seed,
                init: "xavier_uniform(W1, W2); zeros(b1, b2); uniform(+-0.5/dim)(paths)".into(),
                ..PairPathMeta::default()
            },
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder2.d_out()
    }

    pub(crate) fn encode_ids(&self, w1: usize, w2: usize) -> PairTrace {
        let mut input = Vec::with_capacity(2 * self.word_table.dim());
        input.extend_from_slice(self.word_table.row(w1));
        input.extend_from_slice(self.word_table.row(w2));
        let hidden = tanh_vec(&self.encoder1.forward_row(&input));
        let repr = tanh_vec(&self.encoder2.forward_row(&hidden));
        PairTrace {
            input,
            hidden,
            repr,
        }
    }

    /// Encoded representation `h~(w1, w2)`. Unknown words use the unknown row.
    pub fn pair_repr(&self, w1: &str, w2: &str) -> Vec<f64> {
        let v = &self.word_table.vocab;
        self.encode_ids(v.lookup(w1), v.lookup(w2)).repr
    }

    pub fn path_vector(&self, id: usize) -> &[f64] {
        self.path_table.value.row(id)
    }

    /// `σ(v_path · h~(w1, w2))`
    pub fn score(&self, w1: &str, w2: &str, path: &str) -> Result<f64> {
        let id = self
            .lexicon
            .id(path)
            .ok_or_else(|| Error::InvalidArgument(format!("path not in lexicon: {path}")))?;
        Ok(sigmoid(dot(self.path_vector(id), &self.pair_repr(w1, w2))))
    }

    /// Scores of every lexicon entry for an encoded pair.
    pub fn score_all(&self, repr: &[f64]) -> Vec<f64> {
        (0..self.lexicon.len())
            .map(|id| sigmoid(dot(self.path_vector(id), repr)))
            .collect()
    }

    fn top_k(&self, repr: &[f64], k: usize) -> Vec<(usize, f64)> {
        let dots: Vec<f64> = (0..self.lexicon.len())
            .map(|id| dot(self.path_vector(id), repr))
            .collect();
        let mut ids: Vec<usize> = (1..self.lexicon.len()).collect();
        ids.sort_by(|&a, &b| dots[b].total_cmp(&dots[a]).then(a.cmp(&b)));
        ids.truncate(k);
        ids.into_iter().map(|id| (id, sigmoid(dots[id]))).collect()
    }

    /// The `k` best paths for `(X=w1, Y=w2)` followed by the `k` best for
    /// `(X=w2, Y=w1)` with X and Y swapped back, each half sorted by score.
    ///
    /// The empty path is never predicted. When the lexicon has fewer than
    /// `k` real paths each half holds all of them.
    pub fn predict_top_paths(&self, w1: &str, w2: &str, k: usize) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let forward = self.top_k(&self.pair_repr(w1, w2), k);
        let backward = self.top_k(&self.pair_repr(w2, w1), k);
        let mut out = Vec::with_capacity(2 * k);
        for (id, s) in forward {
            out.push((self.lexicon.path(id).to_string(), s));
        }
        for (id, s) in backward {
            out.push((mirror_str(self.lexicon.path(id))?, s));
        }
        Ok(out)
    }

    /// `[h~(w1, w2); h~(w2, w1)]`
    pub fn pseudo_path_features(&self, w1: &str, w2: &str) -> Vec<f64> {
        let mut f = self.pair_repr(w1, w2);
        f.extend(self.pair_repr(w2, w1));
        f
    }

    /// Loss `-log σ(v_pos·h~) - Σ log σ(-v_neg·h~)` for one triple and its
    /// negatives, all given by id. With `scale > 0` the gradient times
    /// `scale` is accumulated; the frozen word vectors receive none.
    pub fn triple_loss(
        &mut self,
        w1: usize,
        w2: usize,
        positive: usize,
        negatives: &[usize],
        scale: f64,
    ) -> f64 {
        let trace = self.encode_ids(w1, w2);
        let mut loss = 0.0;
        let mut d_repr = vec![0.0; trace.repr.len()];
        let mut terms = Vec::with_capacity(negatives.len() + 1);
        terms.push((positive, 1.0));
        terms.extend(negatives.iter().map(|&n| (n, -1.0)));
        for &(id, sign) in &terms {
            let s = dot(self.path_vector(id), &trace.repr);
            loss -= log_sigmoid(sign * s);
            if scale > 0.0 {
                // d/ds of -log σ(sign·s) = -sign·σ(-sign·s)
                let g = -sign * sigmoid(-sign * s) * scale;
                axpy(g, self.path_table.value.row(id), &mut d_repr);
                axpy(g, &trace.repr, self.path_table.grad.row_mut(id));
            }
        }
        if scale > 0.0 {
            let d_pre2 = tanh_backward(&trace.repr, &d_repr);
            let d_hidden = self.encoder2.backward_row(&trace.hidden, &d_pre2);
            let d_pre1 = tanh_backward(&trace.hidden, &d_hidden);
            // word vectors are frozen, so dL/dx is dropped
            self.encoder1.backward_row(&trace.input, &d_pre1);
        }
        loss
    }

    pub fn zero_grad(&mut self) {
        self.encoder1.zero_grad();
        self.encoder2.zero_grad();
        self.path_table.zero_grad();
    }

    pub fn to_container(&self) -> Result<Container> {
        let stored = StoredMeta {
            meta: self.meta.clone(),
            words: self.word_table.vocab.tokens().to_vec(),
            paths: self.lexicon.paths().to_vec(),
            path_counts: self.lexicon.counts().to_vec(),
        };
        let mut c = Container::new(MODEL_KIND, &stored)?;
        c.push("words", &self.word_table.matrix);
        c.push("encoder1.weight", &self.encoder1.weight.value);
        c.push("encoder1.bias", &self.encoder1.bias.value);
        c.push("encoder2.weight", &self.encoder2.weight.value);
        c.push("encoder2.bias", &self.encoder2.bias.value);
        c.push("paths", &self.path_table.value);
        Ok(c)
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        c.expect_kind(MODEL_KIND)?;
        let stored: StoredMeta = c.meta()?;
        let (unk, rest) = stored
            .words
            .split_first()
            .ok_or_else(|| Error::Format("empty word vocabulary".into()))?;
        let vocab = Vocabulary::from_tokens(unk, rest);
        let word_table = EmbeddingTable::new(vocab, c.take("words")?, false)?;
        let lexicon = PathLexicon::from_counts(
            stored
                .paths
                .iter()
                .zip(&stored.path_counts)
                .skip(1)
                .map(|(p, &n)| (p.as_str(), n)),
        );
        let encoder1 = Linear::from_parts(c.take("encoder1.weight")?, c.take("encoder1.bias")?)?;
        let encoder2 = Linear::from_parts(c.take("encoder2.weight")?, c.take("encoder2.bias")?)?;
        let path_table = Parameter::new(c.take("paths")?);
        if encoder1.d_in() != 2 * word_table.dim()
            || encoder2.d_in() != encoder1.d_out()
            || path_table.shape() != [lexicon.len(), encoder2.d_out()]
        {
            return Err(Error::Format("inconsistent pair-path model shapes".into()));
        }
        Ok(PairPathModel {
            word_table,
            encoder1,
            encoder2,
            path_table,
            lexicon,
            meta: stored.meta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container()?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        PairPathModel::from_container(Container::load(path)?)
    }
}
