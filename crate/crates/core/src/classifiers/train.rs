//! Supervised training protocol.
//!
//! Every grid setting starts from a generator seeded with the run seed and
//! draws, in order: classifier initialization, then per epoch the shuffle of
//! the training pairs followed by the dropout masks of each minibatch.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::dataset::{Instance, RelationDataset, Split};
use crate::eval::metrics::{weighted_f1, EvalReport};
use crate::neural::{seeded, Adam};
use crate::pairpath::PairPathModel;
use crate::paths::{mirror_str, TripleStore};

use super::model::{ClassifierSetup, ClassifierSpec, PairExample, RelationClassifier, TrainingSummary};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupervisedTrainConfig {
    pub lr: f64,
    pub minibatch: usize,
    pub dropout_grid: Vec<f64>,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Only used by +Aug models.
    pub aug_k_grid: Vec<usize>,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SupervisedTrainConfig {
    fn default() -> Self {
        SupervisedTrainConfig {
            lr: 0.001,
            minibatch: 100,
            dropout_grid: vec![0.0, 0.2, 0.4],
            patience: 7,
            aug_k_grid: vec![1, 3, 5],
            max_epochs: 100,
            seed: 0,
        }
    }
}

impl SupervisedTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dropout_grid.is_empty() || self.aug_k_grid.is_empty() {
            return Err(Error::InvalidArgument("hyperparameter grids must be nonempty".into()));
        }
        if !(self.lr > 0.0) || self.minibatch == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidArgument(
                "lr, minibatch, patience and max_epochs must be positive".into(),
            ));
        }
        if self.aug_k_grid.contains(&0) {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }

    /// `(dropout, k)` settings in grid order, dropout outermost.
    pub fn settings(&self, spec: &ClassifierSpec) -> Vec<(f64, Option<usize>)> {
        let ks: Vec<Option<usize>> = if spec.aug {
            self.aug_k_grid.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        self.dropout_grid
            .iter()
            .flat_map(|&dr| ks.iter().map(move |&k| (dr, k)))
            .collect()
    }
}

pub fn setting_name(dropout: f64, k: Option<usize>) -> String {
    match k {
        Some(k) => format!("dr={dropout:?},k={k}"),
        None => format!("dr={dropout:?}"),
    }
}

/// Tracks the best validation score and decides when to stop.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    epoch: usize,
    best_epoch: usize,
    best_score: f64,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            epoch: 0,
            best_epoch: 0,
            best_score: f64::NEG_INFINITY,
        }
    }

    /// Records the next epoch's score; true when it is a strict improvement.
    pub fn observe(&mut self, score: f64) -> bool {
        self.epoch += 1;
        if score > self.best_score {
            self.best_score = score;
            self.best_epoch = self.epoch;
            true
        } else {
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.epoch >= self.best_epoch + self.patience
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_score(&self) -> f64 {
        self.best_score
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    pub setting: String,
    pub dropout: f64,
    pub aug_k: Option<usize>,
    pub val_f1: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub selected: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub rows: Vec<TuningRow>,
}

impl TuningReport {
    pub fn selected(&self) -> Option<&TuningRow> {
        self.rows.iter().find(|r| r.selected)
    }

    /// `setting<TAB>val_f1<TAB>selected` with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("setting\tval_f1\tselected\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{:.6}\t{}\n",
                r.setting,
                r.val_f1,
                u8::from(r.selected)
            ));
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_tsv().as_bytes())?;
        Ok(())
    }
}

/// Shared inputs of every classifier trained on one dataset.
#[derive(Clone, Copy, Debug)]
pub struct SupervisedInputs<'a> {
    pub store: &'a TripleStore,
    pub embeddings: &'a EmbeddingTable,
    pub pairpath: Option<&'a PairPathModel>,
}

impl<'a> SupervisedInputs<'a> {
    /// Setup for `spec` on `dataset`. Edge vocabularies cover the corpus
    /// paths of every dataset pair and, for +Aug, every lexicon path in
    /// both orientations.
    pub fn setup(
        &self,
        spec: ClassifierSpec,
        dataset: &RelationDataset,
        dropout: f64,
        aug_k: Option<usize>,
    ) -> Result<ClassifierSetup<'a>> {
        let mut paths = BTreeSet::new();
        for inst in dataset.all() {
            if let Some(ps) = self.store.paths(&inst.w1, &inst.w2) {
                paths.extend(ps.keys().cloned());
            }
        }
        if spec.aug {
            if let Some(m) = self.pairpath {
                for p in m.lexicon.paths().iter().skip(1) {
                    paths.insert(mirror_str(p)?);
                    paths.insert(p.clone());
                }
            }
        }
        let mut words = BTreeSet::new();
        for inst in dataset.all() {
            words.insert(inst.w1.clone());
            words.insert(inst.w2.clone());
        }
        Ok(ClassifierSetup {
            spec,
            labels: dataset.labels.clone(),
            embeddings: self.embeddings,
            vocab_paths: paths.into_iter().collect(),
            words: words.into_iter().collect(),
            pairpath: self.pairpath,
            aug_k,
            dropout,
        })
    }
}

pub fn prepare_examples(
    clf: &RelationClassifier,
    store: &TripleStore,
    instances: &[Instance],
) -> Result<Vec<PairExample>> {
    instances
        .iter()
        .map(|i| clf.prepare(store, &i.w1, &i.w2, i.label))
        .collect()
}

/// Weighted F1 of the classifier on prepared examples.
pub fn evaluate_examples(clf: &RelationClassifier, examples: &[PairExample]) -> Result<EvalReport> {
    let pred = clf.predict(examples)?;
    let gold: Vec<usize> = examples.iter().map(|e| e.label).collect();
    weighted_f1(&gold, &pred, &clf.labels.labels)
}

/// Result of one grid setting.
#[derive(Clone, Debug)]
pub struct SettingOutcome {
    pub model: RelationClassifier,
    pub row: TuningRow,
}

/// Trains one setting with early stopping and returns the best-validation
/// checkpoint.
pub fn train_setting(
    setup: &ClassifierSetup,
    store: &TripleStore,
    dataset: &RelationDataset,
    cfg: &SupervisedTrainConfig,
) -> Result<SettingOutcome> {
    cfg.validate()?;
    for split in [Split::Train, Split::Val] {
        if dataset.split(split).is_empty() {
            return Err(Error::Data(format!("{split} split is empty")));
        }
    }
    let mut rng = seeded(cfg.seed);
    let mut clf = RelationClassifier::new(setup, &mut rng)?;
    let train = prepare_examples(&clf, store, &dataset.train)?;
    let val = prepare_examples(&clf, store, &dataset.val)?;
    let adam = Adam::new(cfg.lr);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = clf.clone();
    while stopper.epoch() < cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.minibatch) {
            let batch: Vec<&PairExample> = chunk.iter().map(|&i| &train[i]).collect();
            clf.batch_loss(&batch, Some(&mut rng), true)?;
            clf.step(&adam)?;
        }
        let score = evaluate_examples(&clf, &val)?.weighted_f1;
        if stopper.observe(score) {
            best = clf.clone();
        }
        if stopper.should_stop() {
            break;
        }
    }
    let setting = setting_name(setup.dropout, setup.aug_k);
    best.summary = Some(TrainingSummary {
        setting: setting.clone(),
        val_f1: stopper.best_score(),
        best_epoch: stopper.best_epoch(),
        epochs_run: stopper.epoch(),
        seed: cfg.seed,
    });
    Ok(SettingOutcome {
        model: best,
        row: TuningRow {
            setting,
            dropout: setup.dropout,
            aug_k: setup.aug_k,
            val_f1: stopper.best_score(),
            best_epoch: stopper.best_epoch(),
            epochs_run: stopper.epoch(),
            selected: false,
        },
    })
}

/// Runs every grid setting and keeps the one with the highest validation
/// weighted F1 (the first in grid order on ties).
pub fn train_supervised(
    spec: ClassifierSpec,
    inputs: &SupervisedInputs,
    dataset: &RelationDataset,
    cfg: &SupervisedTrainConfig,
) -> Result<(RelationClassifier, TuningReport)> {
    cfg.validate()?;
    let mut report = TuningReport::default();
    let mut best: Option<(usize, RelationClassifier)> = None;
    for (dr, k) in cfg.settings(&spec) {
        let setup = inputs.setup(spec, dataset, dr, k)?;
        let outcome = train_setting(&setup, inputs.store, dataset, cfg)?;
        let better = best
            .as_ref()
            .is_none_or(|(i, _)| outcome.row.val_f1 > report.rows[*i].val_f1);
        report.rows.push(outcome.row);
        if better {
            best = Some((report.rows.len() - 1, outcome.model));
        }
    }
    let (idx, model) = best.expect("grids are nonempty");
    report.rows[idx].selected = true;
    Ok((model, report))
}
