use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::corpus::{EmbeddingTable, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::dataset::LabelSet;
use crate::neural::dropout::{check_rate, fill_mask};
use crate::neural::linear::{tanh_backward, tanh_vec};
use crate::neural::{softmax, Adam, Linear, LstmStack, Parameter, RunRng};
use crate::pairpath::PairPathModel;
use crate::paths::{paths_for_pair, PathSet, TripleStore};

use super::augment::augmented_paths;
use super::edge::{EdgeEmbedder, EncodedPath};
use super::encoder::{normalized_weights, weighted_sum, PathEncoder, PathTrace};

pub const CLASSIFIER_KIND: &str = "relation-classifier";
pub const LEXNET_HIDDEN_DIM: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Npb,
    LexNet,
    LexNetH,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Npb => "NPB",
            Architecture::LexNet => "LexNET",
            Architecture::LexNetH => "LexNET_h",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "npb" => Ok(Architecture::Npb),
            "lexnet" => Ok(Architecture::LexNet),
            "lexnet_h" => Ok(Architecture::LexNetH),
            _ => Err(Error::InvalidArgument(format!("unknown architecture {s:?}"))),
        }
    }
}

/// An architecture with its optional augmentation and pseudo-path features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub arch: Architecture,
    pub aug: bool,
    pub rep: bool,
}

impl ClassifierSpec {
    pub fn new(arch: Architecture, aug: bool, rep: bool) -> Self {
        ClassifierSpec { arch, aug, rep }
    }

    pub fn needs_pairpath(&self) -> bool {
        self.aug || self.rep
    }

    /// Pseudo-path features on the path-only model go beyond the
    /// published configurations.
    pub fn is_extension(&self) -> bool {
        self.rep && self.arch == Architecture::Npb
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.arch)?;
        if self.aug {
            f.write_str("+Aug")?;
        }
        if self.rep {
            f.write_str("+Rep")?;
        }
        Ok(())
    }
}

/// Parses `npb`, `lexnet+aug`, `LexNET_h+Aug+Rep` and similar.
impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('+');
        let arch = parts.next().unwrap_or_default().parse()?;
        let mut spec = ClassifierSpec::new(arch, false, false);
        for p in parts {
            match p.to_ascii_lowercase().as_str() {
                "aug" if !spec.aug => spec.aug = true,
                "rep" if !spec.rep => spec.rep = true,
                _ => return Err(Error::InvalidArgument(format!("bad model name {s:?}"))),
            }
        }
        Ok(spec)
    }
}

/// Outcome of the training run that produced a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub setting: String,
    pub val_f1: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub seed: u64,
}

/// A dataset pair resolved against one classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct PairExample {
    pub w1: String,
    pub w2: String,
    pub label: usize,
    pub paths: Vec<(EncodedPath, f64)>,
    pub word_ids: (usize, usize),
    /// Pseudo-path features, held constant during training.
    pub rep: Option<Vec<f64>>,
    pub has_corpus_paths: bool,
}

/// Everything needed to build a fresh classifier.
#[derive(Clone, Debug)]
pub struct ClassifierSetup<'a> {
    pub spec: ClassifierSpec,
    pub labels: LabelSet,
    pub embeddings: &'a EmbeddingTable,
    /// Paths whose components make up the edge vocabularies.
    pub vocab_paths: Vec<String>,
    /// Words that receive rows in the frozen word tables.
    pub words: Vec<String>,
    pub pairpath: Option<&'a PairPathModel>,
    pub aug_k: Option<usize>,
    pub dropout: f64,
}

#[derive(Clone, Debug)]
pub struct RelationClassifier {
    pub spec: ClassifierSpec,
    pub labels: LabelSet,
    pub encoder: PathEncoder,
    /// Frozen word vectors of the LexNET variants.
    pub word_table: Option<EmbeddingTable>,
    pub hidden: Option<Linear>,
    pub head: Linear,
    /// Source of augmented paths and pseudo-path features; never trained here.
    pub pairpath: Option<PairPathModel>,
    pub aug_k: Option<usize>,
    pub dropout: f64,
    pub summary: Option<TrainingSummary>,
}

/// Loss of a minibatch and the gradients w.r.t. the frozen features.
#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub loss: f64,
    pub rep_grads: Vec<Vec<f64>>,
}

struct Penultimate {
    concat: Vec<f64>,
    hidden: Option<Vec<f64>>,
    hidden_mask: Option<Vec<f64>>,
    penult: Vec<f64>,
}

struct ExampleForward {
    slots: Vec<usize>,
    weights: Vec<f64>,
    pen: Penultimate,
    probs: Vec<f64>,
}

impl RelationClassifier {
    /// Draws the path encoder, then the hidden layer, then the head.
    pub fn new(setup: &ClassifierSetup, rng: &mut RunRng) -> Result<Self> {
        check_rate(setup.dropout)?;
        let spec = setup.spec;
        if spec.needs_pairpath() && setup.pairpath.is_none() {
            return Err(Error::InvalidArgument(format!("{spec} needs a pair-path model")));
        }
        let aug_k = match (spec.aug, setup.aug_k) {
            (true, Some(k)) if k > 0 => Some(k),
            (true, _) => return Err(Error::InvalidArgument("+Aug needs k >= 1".into())),
            (false, _) => None,
        };
        if setup.labels.len() < 2 {
            return Err(Error::InvalidArgument("at least two relation labels are needed".into()));
        }
        let encoder = PathEncoder::new(
            setup.vocab_paths.iter().map(String::as_str),
            Some(setup.embeddings),
            rng,
        )?;
        let word_table = match spec.arch {
            Architecture::Npb => None,
            _ => {
                let mut t = setup.embeddings.subset(setup.words.iter().map(String::as_str));
                t.trainable = false;
                Some(t)
            }
        };
        let wd = word_table.as_ref().map_or(0, EmbeddingTable::dim);
        let concat_dim = 2 * wd + encoder.dim();
        let hidden = match spec.arch {
            Architecture::LexNetH => Some(Linear::new(concat_dim, LEXNET_HIDDEN_DIM, rng)),
            _ => None,
        };
        let pairpath = if spec.needs_pairpath() {
            setup.pairpath.map(|p| {
                let mut p = p.clone();
                p.word_table = p.word_table.subset(setup.words.iter().map(String::as_str));
                p
            })
        } else {
            None
        };
        let mut clf = RelationClassifier {
            spec,
            labels: setup.labels.clone(),
            encoder,
            word_table,
            hidden,
            head: Linear::zeros(1, 1),
            pairpath,
            aug_k,
            dropout: setup.dropout,
            summary: None,
        };
        clf.head = Linear::new(clf.head_input_dim(), clf.labels.len(), rng);
        Ok(clf)
    }

    fn base_dim(&self) -> usize {
        match self.spec.arch {
            Architecture::Npb => self.encoder.dim(),
            Architecture::LexNet => self.concat_dim(),
            Architecture::LexNetH => LEXNET_HIDDEN_DIM,
        }
    }

    fn concat_dim(&self) -> usize {
        2 * self.word_table.as_ref().map_or(0, EmbeddingTable::dim) + self.encoder.dim()
    }

    pub fn rep_dim(&self) -> usize {
        match (&self.pairpath, self.spec.rep) {
            (Some(p), true) => 2 * p.hidden_dim(),
            _ => 0,
        }
    }

    /// Width of the vector fed to the softmax head.
    pub fn head_input_dim(&self) -> usize {
        self.base_dim() + self.rep_dim()
    }

    /// Corpus paths of the pair, plus the predicted paths under +Aug.
    pub fn path_set(&self, store: &TripleStore, w1: &str, w2: &str) -> Result<PathSet> {
        match (self.aug_k, &self.pairpath) {
            (Some(k), Some(p)) => augmented_paths(store, p, w1, w2, k),
            _ => Ok(paths_for_pair(store, w1, w2)),
        }
    }

    pub fn prepare(&self, store: &TripleStore, w1: &str, w2: &str, label: usize) -> Result<PairExample> {
        let set = self.path_set(store, w1, w2)?;
        self.prepare_with_paths(store, w1, w2, label, &set)
    }

    pub fn prepare_with_paths(
        &self,
        store: &TripleStore,
        w1: &str,
        w2: &str,
        label: usize,
        paths: &PathSet,
    ) -> Result<PairExample> {
        if label >= self.labels.len() {
            return Err(Error::InvalidArgument(format!("label index {label} out of range")));
        }
        if paths.is_empty() || paths.iter().any(|(_, f)| !(*f > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "path set of ({w1}, {w2}) must be nonempty with positive weights"
            )));
        }
        let word_ids = match &self.word_table {
            Some(t) => (t.vocab.lookup(w1), t.vocab.lookup(w2)),
            None => (0, 0),
        };
        let rep = match (&self.pairpath, self.spec.rep) {
            (Some(p), true) => Some(p.pseudo_path_features(w1, w2)),
            _ => None,
        };
        Ok(PairExample {
            w1: w1.to_string(),
            w2: w2.to_string(),
            label,
            paths: paths
                .iter()
                .map(|(p, f)| (self.encoder.embedder.encode_ids(p), *f))
                .collect(),
            word_ids,
            rep,
            has_corpus_paths: store.has_paths(w1, w2),
        })
    }

    fn penultimate<R: Rng>(&self, ex: &PairExample, v_paths: &[f64], rng: Option<&mut R>) -> Penultimate {
        let concat = match &self.word_table {
            Some(t) => {
                let mut c = Vec::with_capacity(self.concat_dim());
                c.extend_from_slice(t.row(ex.word_ids.0));
                c.extend_from_slice(v_paths);
                c.extend_from_slice(t.row(ex.word_ids.1));
                c
            }
            None => v_paths.to_vec(),
        };
        let (hidden, hidden_mask, mut penult) = match &self.hidden {
            Some(h) => {
                let z = tanh_vec(&h.forward_row(&concat));
                match rng {
                    Some(rng) if self.dropout > 0.0 => {
                        let mut m = vec![0.0; z.len()];
                        fill_mask(&mut m, self.dropout, rng);
                        let out = z.iter().zip(&m).map(|(a, b)| a * b).collect();
                        (Some(z), Some(m), out)
                    }
                    _ => (Some(z.clone()), None, z),
                }
            }
            None => (None, None, concat.clone()),
        };
        if let Some(r) = &ex.rep {
            penult.extend_from_slice(r);
        }
        Penultimate {
            concat,
            hidden,
            hidden_mask,
            penult,
        }
    }

    fn check_example(&self, ex: &PairExample) -> Result<()> {
        let rep_len = ex.rep.as_ref().map_or(0, Vec::len);
        if rep_len != self.rep_dim() {
            return Err(Error::shape(&[rep_len], &[self.rep_dim()]));
        }
        if ex.label >= self.labels.len() || ex.paths.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "example ({}, {}) does not fit this classifier",
                ex.w1, ex.w2
            )));
        }
        Ok(())
    }

    /// Class distributions in evaluation mode. Each distinct path is
    /// encoded once.
    pub fn probabilities(&self, examples: &[PairExample]) -> Result<Vec<Vec<f64>>> {
        let mut cache: HashMap<&EncodedPath, Vec<f64>> = HashMap::new();
        let mut out = Vec::with_capacity(examples.len());
        for ex in examples {
            self.check_example(ex)?;
            for (p, _) in &ex.paths {
                if !cache.contains_key(p) {
                    let v = self.encoder.forward(p, None)?.output().to_vec();
                    cache.insert(p, v);
                }
            }
            let weights = normalized_weights(ex.paths.iter().map(|(_, f)| *f));
            let v_paths = weighted_sum(
                ex.paths.iter().map(|(p, _)| cache[p].as_slice()),
                &weights,
                self.encoder.dim(),
            );
            let pen = self.penultimate::<RunRng>(ex, &v_paths, None);
            out.push(softmax(&self.head.forward_row(&pen.penult)));
        }
        Ok(out)
    }

    /// Evaluation-mode class distribution of one example.
    pub fn forward(&self, ex: &PairExample) -> Result<Vec<f64>> {
        Ok(self.probabilities(std::slice::from_ref(ex))?.remove(0))
    }

    /// Argmax predictions, lowest class index on ties.
    pub fn predict(&self, examples: &[PairExample]) -> Result<Vec<usize>> {
        Ok(self
            .probabilities(examples)?
            .iter()
            .map(|p| crate::eval::metrics::argmax(p))
            .collect())
    }

    /// Mean cross-entropy of a minibatch.
    ///
    /// `rng` selects training mode (dropout on); masks are drawn example by
    /// example, path components first. With `backprop` the gradients of
    /// every trainable parameter are accumulated. Gradients w.r.t. the
    /// pseudo-path features are returned but go nowhere.
    pub fn batch_loss(
        &mut self,
        batch: &[&PairExample],
        mut rng: Option<&mut RunRng>,
        backprop: bool,
    ) -> Result<BatchOutput> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty minibatch".into()));
        }
        let masked = rng.is_some() && self.dropout > 0.0;
        let mut traces: Vec<(&EncodedPath, PathTrace)> = Vec::new();
        let mut dedup: HashMap<&EncodedPath, usize> = HashMap::new();
        let mut forwards = Vec::with_capacity(batch.len());
        for ex in batch {
            self.check_example(ex)?;
            let mut slots = Vec::with_capacity(ex.paths.len());
            for (p, _) in &ex.paths {
                let slot = match (masked, dedup.get(p)) {
                    (false, Some(&s)) => s,
                    _ => {
                        let masks = match rng.as_deref_mut() {
                            Some(r) if masked => Some(EdgeEmbedder::draw_masks(p.len(), self.dropout, r)?),
                            _ => None,
                        };
                        traces.push((p, self.encoder.forward(p, masks)?));
                        if !masked {
                            dedup.insert(p, traces.len() - 1);
                        }
                        traces.len() - 1
                    }
                };
                slots.push(slot);
            }
            let weights = normalized_weights(ex.paths.iter().map(|(_, f)| *f));
            let v_paths = weighted_sum(
                slots.iter().map(|&s| traces[s].1.output()),
                &weights,
                self.encoder.dim(),
            );
            let pen = self.penultimate(ex, &v_paths, rng.as_deref_mut());
            let probs = softmax(&self.head.forward_row(&pen.penult));
            forwards.push(ExampleForward {
                slots,
                weights,
                pen,
                probs,
            });
        }

        let n = batch.len() as f64;
        let loss = batch
            .iter()
            .zip(&forwards)
            .map(|(ex, f)| -f.probs[ex.label].max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite("classifier loss".into()));
        }
        let mut rep_grads = Vec::new();
        if !backprop {
            return Ok(BatchOutput { loss, rep_grads });
        }

        let base = self.base_dim();
        let wd = self.word_table.as_ref().map_or(0, EmbeddingTable::dim);
        let pd = self.encoder.dim();
        let mut d_outputs = vec![vec![0.0; pd]; traces.len()];
        for (ex, f) in batch.iter().zip(&forwards) {
            let mut d_logits: Vec<f64> = f.probs.iter().map(|p| p / n).collect();
            d_logits[ex.label] -= 1.0 / n;
            let d_penult = self.head.backward_row(&f.pen.penult, &d_logits);
            if ex.rep.is_some() {
                rep_grads.push(d_penult[base..].to_vec());
            }
            let d_base = &d_penult[..base];
            let d_concat = match (&mut self.hidden, &f.pen.hidden) {
                (Some(h), Some(z)) => {
                    let dz: Vec<f64> = match &f.pen.hidden_mask {
                        Some(m) => d_base.iter().zip(m).map(|(a, b)| a * b).collect(),
                        None => d_base.to_vec(),
                    };
                    h.backward_row(&f.pen.concat, &tanh_backward(z, &dz))
                }
                _ => d_base.to_vec(),
            };
            // word vectors are frozen; only the path block flows back
            let d_v_paths = &d_concat[wd..wd + pd];
            for (&slot, &w) in f.slots.iter().zip(&f.weights) {
                crate::neural::tensor::axpy(w, d_v_paths, &mut d_outputs[slot]);
            }
        }
        for ((p, trace), d) in traces.iter().zip(&d_outputs) {
            self.encoder.backward(p, trace, d);
        }
        Ok(BatchOutput { loss, rep_grads })
    }

    /// Every trainable parameter, in a fixed order.
    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out: Vec<&mut Parameter> = self.encoder.embedder.tables.iter_mut().collect();
        out.extend(self.encoder.lstm.parameters_mut());
        if let Some(h) = &mut self.hidden {
            out.push(&mut h.weight);
            out.push(&mut h.bias);
        }
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }

    pub fn zero_grad(&mut self) {
        self.parameters_mut().into_iter().for_each(Parameter::zero_grad);
    }

    pub fn step(&mut self, adam: &Adam) -> Result<()> {
        for p in self.parameters_mut() {
            adam.update(p)?;
        }
        Ok(())
    }

    pub fn to_container(&self) -> Result<Container> {
        let mut c = Container::new(CLASSIFIER_KIND, &serde_json::Value::Null)?;
        let names = ["edge.lemma", "edge.pos", "edge.deprel", "edge.direction"];
        for (name, t) in names.iter().zip(&self.encoder.embedder.tables) {
            c.push(*name, &t.value);
        }
        for (l, layer) in self.encoder.lstm.layers.iter().enumerate() {
            c.push(format!("lstm.{l}.weight"), &layer.weight.value);
            c.push(format!("lstm.{l}.bias"), &layer.bias.value);
        }
        if let Some(h) = &self.hidden {
            c.push("hidden.weight", &h.weight.value);
            c.push("hidden.bias", &h.bias.value);
        }
        c.push("head.weight", &self.head.weight.value);
        c.push("head.bias", &self.head.bias.value);
        if let Some(t) = &self.word_table {
            c.push("words", &t.matrix);
        }
        let pairpath = match &self.pairpath {
            Some(p) => Some(c.absorb("pairpath", p.to_container()?)),
            None => None,
        };
        let stored = StoredClassifier {
            spec: self.spec,
            labels: self.labels.clone(),
            dropout: self.dropout,
            aug_k: self.aug_k,
            components: self
                .encoder
                .embedder
                .vocabs
                .iter()
                .map(|v| v.tokens().to_vec())
                .collect(),
            lstm_layers: self.encoder.lstm.num_layers(),
            words: self.word_table.as_ref().map(|t| t.vocab.tokens().to_vec()),
            pairpath,
            summary: self.summary.clone(),
        };
        c.meta = serde_json::to_value(stored)?;
        Ok(c)
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        c.expect_kind(CLASSIFIER_KIND)?;
        let stored: StoredClassifier = c.meta()?;
        if stored.components.len() != 4 {
            return Err(Error::Format("expected four component vocabularies".into()));
        }
        let vocab = |tokens: &[String]| -> Result<Vocabulary> {
            let (unk, rest) = tokens
                .split_first()
                .ok_or_else(|| Error::Format("empty vocabulary".into()))?;
            Ok(Vocabulary::from_tokens(unk, rest))
        };
        let vocabs = [
            vocab(&stored.components[0])?,
            vocab(&stored.components[1])?,
            vocab(&stored.components[2])?,
            vocab(&stored.components[3])?,
        ];
        let tables = [
            c.take("edge.lemma")?,
            c.take("edge.pos")?,
            c.take("edge.deprel")?,
            c.take("edge.direction")?,
        ];
        let embedder = EdgeEmbedder::from_parts(vocabs, tables)?;
        let mut layers = Vec::with_capacity(stored.lstm_layers);
        for l in 0..stored.lstm_layers {
            layers.push((
                Parameter::new(c.take(&format!("lstm.{l}.weight"))?),
                Parameter::new(c.take(&format!("lstm.{l}.bias"))?),
            ));
        }
        let lstm = LstmStack::from_layers(layers)?;
        let hidden = if stored.spec.arch == Architecture::LexNetH {
            Some(Linear::from_parts(c.take("hidden.weight")?, c.take("hidden.bias")?)?)
        } else {
            None
        };
        let head = Linear::from_parts(c.take("head.weight")?, c.take("head.bias")?)?;
        let word_table = match &stored.words {
            Some(tokens) => Some(EmbeddingTable::new(vocab(tokens)?, c.take("words")?, false)?),
            None => None,
        };
        let pairpath = match stored.pairpath {
            Some(meta) => Some(PairPathModel::from_container(c.extract("pairpath", meta)?)?),
            None => None,
        };
        let clf = RelationClassifier {
            spec: stored.spec,
            labels: stored.labels,
            encoder: PathEncoder { embedder, lstm },
            word_table,
            hidden,
            head,
            pairpath,
            aug_k: stored.aug_k,
            dropout: stored.dropout,
            summary: stored.summary,
        };
        if clf.head.d_in() != clf.head_input_dim() || clf.head.d_out() != clf.labels.len() {
            return Err(Error::Format("head shape does not match the architecture".into()));
        }
        Ok(clf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container()?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RelationClassifier::from_container(Container::load(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct StoredClassifier {
    spec: ClassifierSpec,
    labels: LabelSet,
    dropout: f64,
    aug_k: Option<usize>,
    components: Vec<Vec<String>>,
    lstm_layers: usize,
    words: Option<Vec<String>>,
    pairpath: Option<serde_json::Value>,
    summary: Option<TrainingSummary>,
}
