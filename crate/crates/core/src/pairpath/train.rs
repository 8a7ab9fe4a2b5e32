//! Negative-sampling training of [`PairPathModel`].
//!
//! Draw order on the run generator: model initialization, the fixed
//! validation subsample and its negatives, then per epoch the shuffle of
//! positive occurrences followed by the negatives of each minibatch in order.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingTable;
use crate::error::{Error, Result};
use crate::neural::{seeded, Adam, RunRng};
use crate::paths::{PathLexicon, TripleStore};

use super::model::PairPathModel;
use super::sampler::NegativeSampler;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingRunConfig {
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub negatives: usize,
    pub seed: u64,
    /// Positive occurrences used for the per-epoch objective estimate.
    pub validation_size: usize,
}

impl Default for TrainingRunConfig {
    fn default() -> Self {
        TrainingRunConfig {
            epochs: 5,
            minibatch: 100,
            lr: 0.001,
            negatives: 5,
            seed: 0,
            validation_size: 2000,
        }
    }
}

impl TrainingRunConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.minibatch == 0 || self.negatives == 0 || !(self.lr > 0.0) {
            return Err(Error::InvalidArgument(
                "epochs, minibatch, negatives and lr must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One training triple with ids resolved against the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingTriple {
    pub w1: usize,
    pub w2: usize,
    pub path: usize,
    pub count: u64,
}

/// Triples whose words are both in `words` and whose path is in `lexicon`.
pub fn training_view(
    store: &TripleStore,
    lexicon: &PathLexicon,
    words: &EmbeddingTable,
) -> Vec<TrainingTriple> {
    store
        .iter()
        .filter_map(|(w1, w2, p, count)| {
            Some(TrainingTriple {
                w1: words.vocab.get(w1).filter(|&id| id != 0)?,
                w2: words.vocab.get(w2).filter(|&id| id != 0)?,
                path: lexicon.id(p).filter(|&id| id != 0)?,
                count,
            })
        })
        .collect()
}

/// Per-triple objective `log σ(v_p·h~) + Σ log σ(-v_n·h~)`.
pub fn triple_objective(model: &mut PairPathModel, t: &TrainingTriple, negatives: &[usize]) -> f64 {
    -model.triple_loss(t.w1, t.w2, t.path, negatives, 0.0)
}

struct ValidationSet {
    items: Vec<(TrainingTriple, Vec<usize>)>,
}

impl ValidationSet {
    fn objective(&self, model: &mut PairPathModel) -> f64 {
        let total: f64 = self
            .items
            .iter()
            .map(|(t, negs)| triple_objective(model, t, negs))
            .sum();
        total / self.items.len() as f64
    }
}

/// Maximizes the negative-sampling log-likelihood by minibatch Adam.
///
/// A triple with count `c` is `c` positive examples per epoch, each with
/// fresh negatives. Returns the validation objective before training and
/// after every epoch (`epochs + 1` values).
pub fn train_unsupervised(
    model: &mut PairPathModel,
    triples: &[TrainingTriple],
    cfg: &TrainingRunConfig,
    rng: &mut RunRng,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if triples.is_empty() {
        return Err(Error::Data("no training triples".into()));
    }
    let sampler = NegativeSampler::new(model.lexicon.counts())?;
    let mut occurrences: Vec<u32> = Vec::new();
    for (i, t) in triples.iter().enumerate() {
        occurrences.extend(std::iter::repeat_n(i as u32, t.count as usize));
    }

    let validation = ValidationSet {
        items: (0..cfg.validation_size.min(occurrences.len()))
            .map(|_| {
                let t = triples[occurrences[rng.gen_range(0..occurrences.len())] as usize];
                let negs = (0..cfg.negatives)
                    .map(|_| sampler.sample_negative(t.path, rng))
                    .collect();
                (t, negs)
            })
            .collect(),
    };

    let adam = Adam::new(cfg.lr);
    let mut log = vec![validation.objective(model)];
    let mut negs = vec![0usize; cfg.negatives];
    for _ in 0..cfg.epochs {
        occurrences.shuffle(rng);
        for batch in occurrences.chunks(cfg.minibatch) {
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let t = triples[i as usize];
                for n in negs.iter_mut() {
                    *n = sampler.sample_negative(t.path, rng);
                }
                let loss = model.triple_loss(t.w1, t.w2, t.path, &negs, scale);
                if !loss.is_finite() {
                    return Err(Error::NonFinite("pair-path training loss".into()));
                }
            }
            adam.update(&mut model.encoder1.weight)?;
            adam.update(&mut model.encoder1.bias)?;
            adam.update(&mut model.encoder2.weight)?;
            adam.update(&mut model.encoder2.bias)?;
            adam.update(&mut model.path_table)?;
        }
        log.push(validation.objective(model));
    }

    model.meta.epochs += cfg.epochs;
    model.meta.minibatch = cfg.minibatch;
    model.meta.lr = cfg.lr;
    model.meta.negatives = cfg.negatives;
    model.meta.training_triples = occurrences.len();
    model.meta.objective_log.extend_from_slice(&log);
    Ok(log)
}

/// Builds, initializes and trains a model from a pruned store in one run.
pub fn fit_pairpath(
    word_table: EmbeddingTable,
    store: &TripleStore,
    lexicon: &PathLexicon,
    hidden_dim: usize,
    cfg: &TrainingRunConfig,
) -> Result<(PairPathModel, Vec<f64>)> {
    let mut rng = seeded(cfg.seed);
    let mut model = PairPathModel::new(word_table, lexicon.clone(), hidden_dim, cfg.seed, &mut rng)?;
    let triples = training_view(store, lexicon, &model.word_table);
    let log = train_unsupervised(&mut model, &triples, cfg, &mut rng)?;
    Ok((model, log))
}
