//! End-to-end runs: extraction, pair-path training, classifiers, scoring.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    evaluate_examples, prepare_examples, train_supervised, ClassifierSpec, RelationClassifier,
    SupervisedInputs, SupervisedTrainConfig, TuningReport,
};
use crate::corpus::{
    build_vocab, load_embeddings, read_conllu_dir, write_conllu, EmbeddingTable, NounTags,
    ParsedSentence,
};
use crate::error::{Error, Result};
use crate::pairpath::{fit_pairpath, PairPathModel, TrainingRunConfig};
use crate::paths::{
    extract_triples, prune, PathLexicon, TripleStore, DEFAULT_LEXICON_CAP, DEFAULT_MAX_NODES,
    DEFAULT_MIN_PATH_COUNT,
};
use crate::synthetic::{generate, SyntheticConfig};

use super::dataset::{load_dataset, Instance, LabelSet, RelationDataset};
use super::metrics::{Coverage, EvalReport};

pub const PAIRPATH_HIDDEN_DIM: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub min_count: usize,
    pub max_nodes: usize,
    pub include_propn: bool,
    pub min_path_count: u64,
    pub lexicon_cap: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            min_count: 5,
            max_nodes: DEFAULT_MAX_NODES,
            include_propn: false,
            min_path_count: DEFAULT_MIN_PATH_COUNT,
            lexicon_cap: DEFAULT_LEXICON_CAP,
        }
    }
}

/// Everything after input loading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub extraction: ExtractionConfig,
    pub pairpath: TrainingRunConfig,
    pub hidden_dim: usize,
    pub supervised: SupervisedTrainConfig,
    /// Parsed with [`ClassifierSpec`]'s `FromStr`, e.g. `npb+aug`.
    pub architectures: Vec<String>,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            extraction: ExtractionConfig::default(),
            pairpath: TrainingRunConfig::default(),
            hidden_dim: PAIRPATH_HIDDEN_DIM,
            supervised: SupervisedTrainConfig::default(),
            architectures: vec!["npb".into(), "npb+aug".into()],
        }
    }
}

impl PipelineSettings {
    pub fn specs(&self) -> Result<Vec<ClassifierSpec>> {
        if self.architectures.is_empty() {
            return Err(Error::InvalidArgument("no architectures to train".into()));
        }
        self.architectures.iter().map(|a| a.parse()).collect()
    }

    /// Seeds both training stages.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pairpath.seed = seed;
        self.supervised.seed = seed;
        self
    }
}

/// Experiment file: where the inputs live and how to process them.
///
/// Either `synthetic` is set, or all of `conllu_dir`, `embeddings` and
/// `dataset_dir` are.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "default_labels")]
    pub labels: String,
    pub conllu_dir: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub dataset_dir: Option<PathBuf>,
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default)]
    pub pipeline: PipelineSettings,
}

fn default_labels() -> String {
    "khn".into()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Data(format!("experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.conllu_dir, &mut cfg.embeddings, &mut cfg.dataset_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        Ok(cfg)
    }
}

/// Test-split scores of one trained architecture.
#[derive(Clone, Debug)]
pub struct ArchitectureResult {
    pub spec: ClassifierSpec,
    pub classifier: RelationClassifier,
    pub tuning: TuningReport,
    pub test: EvalReport,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub store: TripleStore,
    pub lexicon: PathLexicon,
    pub pairpath: Option<PairPathModel>,
    pub objective_log: Vec<f64>,
    pub results: Vec<ArchitectureResult>,
    /// Dataset instances, over all splits, with at least one corpus path.
    pub coverage: Coverage,
}

/// Instances with at least one path in `store`.
pub fn coverage<'a, I>(store: &TripleStore, instances: I) -> Coverage
where
    I: IntoIterator<Item = &'a Instance>,
{
    let mut c = Coverage {
        instances: 0,
        with_paths: 0,
    };
    for i in instances {
        c.instances += 1;
        if store.has_paths(&i.w1, &i.w2) {
            c.with_paths += 1;
        }
    }
    c
}

/// Test-style scoring of `clf` on `instances`, with coverage attached.
pub fn evaluate(clf: &RelationClassifier, store: &TripleStore, instances: &[Instance]) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(Error::Data("no instances to evaluate".into()));
    }
    let examples = prepare_examples(clf, store, instances)?;
    let mut report = evaluate_examples(clf, &examples)?;
    report.coverage = Some(coverage(store, instances));
    Ok(report)
}

/// Word table for the pair-path model: corpus nouns and dataset words.
fn pairpath_words(embeddings: &EmbeddingTable, nouns: &[String], dataset: &RelationDataset) -> EmbeddingTable {
    let words = nouns
        .iter()
        .map(String::as_str)
        .chain(dataset.all().flat_map(|i| [i.w1.as_str(), i.w2.as_str()]));
    embeddings.subset(words)
}

/// Runs extraction, pruning, pair-path training (when an architecture needs
/// it), classifier training and test scoring.
pub fn run_pipeline(
    corpus: &[ParsedSentence],
    embeddings: &EmbeddingTable,
    dataset: &RelationDataset,
    settings: &PipelineSettings,
) -> Result<PipelineOutput> {
    let specs = settings.specs()?;
    let ex = &settings.extraction;
    let nouns = NounTags {
        include_propn: ex.include_propn,
    };
    let vocab = build_vocab(corpus, ex.min_count, true, nouns)?;
    let raw = extract_triples(corpus, &vocab, ex.max_nodes, nouns);
    let (store, lexicon) = prune(&raw, ex.min_path_count, ex.lexicon_cap);
    let (pairpath, objective_log) = if specs.iter().any(|s| s.needs_pairpath()) {
        let words = pairpath_words(embeddings, vocab.tokens(), dataset);
        let (m, log) = fit_pairpath(words, &store, &lexicon, settings.hidden_dim, &settings.pairpath)?;
        (Some(m), log)
    } else {
        (None, Vec::new())
    };
    let inputs = SupervisedInputs {
        store: &store,
        embeddings,
        pairpath: pairpath.as_ref(),
    };
    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        let (classifier, tuning) = train_supervised(spec, &inputs, dataset, &settings.supervised)?;
        let test = evaluate(&classifier, &store, &dataset.test)?;
        results.push(ArchitectureResult {
            spec,
            classifier,
            tuning,
            test,
        });
    }
    let coverage = coverage(&store, dataset.all());
    Ok(PipelineOutput {
        store,
        lexicon,
        pairpath,
        objective_log,
        results,
        coverage,
    })
}

impl PipelineOutput {
    /// One row per architecture with its test weighted F1, then the
    /// coverage block.
    pub fn results_table(&self, dataset: &str) -> String {
        let mut out = String::new();
        writeln!(out, "model\t{dataset}").unwrap();
        for r in &self.results {
            let mark = if r.spec.is_extension() { "*" } else { "" };
            writeln!(out, "{}{mark}\t{:.3}", r.spec, r.test.weighted_f1).unwrap();
        }
        if self.results.iter().any(|r| r.spec.is_extension()) {
            writeln!(out, "* extension: +Rep on NPB feeds the pair features next to v_paths").unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "dataset\tinstances / with paths / proportion").unwrap();
        writeln!(out, "{dataset}\t{}", self.coverage).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "weighted F1 averages over every relation class, random included").unwrap();
        out
    }

    /// Writes triples, lexicon, models, tuning and test reports and the
    /// results table under `dir`.
    pub fn write_artifacts(&self, dir: &Path, dataset: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.store
            .write_tsv(BufWriter::new(fs::File::create(dir.join("triples.tsv"))?))?;
        self.lexicon
            .write_tsv(BufWriter::new(fs::File::create(dir.join("lexicon.tsv"))?))?;
        if let Some(m) = &self.pairpath {
            m.save(&dir.join("pairpath.model"))?;
        }
        for r in &self.results {
            let stem = r.spec.to_string().to_lowercase();
            r.classifier.save(&dir.join(format!("{stem}.model")))?;
            r.tuning
                .write_tsv(fs::File::create(dir.join(format!("{stem}.tuning.tsv")))?)?;
            fs::write(dir.join(format!("{stem}.test.tsv")), r.test.to_tsv())?;
        }
        fs::write(dir.join("results.tsv"), self.results_table(dataset))?;
        Ok(())
    }
}

/// Inputs of an experiment, either loaded or generated.
pub struct ExperimentInputs {
    pub corpus: Vec<ParsedSentence>,
    pub embeddings: EmbeddingTable,
    pub dataset: RelationDataset,
}

impl ExperimentConfig {
    /// Generated inputs are also written under `out_dir/inputs`.
    pub fn inputs(&self) -> Result<ExperimentInputs> {
        if let Some(syn) = &self.synthetic {
            let world = generate(syn)?;
            let dir = self.out_dir.join("inputs");
            fs::create_dir_all(&dir)?;
            write_conllu(BufWriter::new(fs::File::create(dir.join("corpus.conllu"))?), &world.corpus)?;
            world
                .embeddings
                .write_text(BufWriter::new(fs::File::create(dir.join("embeddings.txt"))?))?;
            world.dataset.write_dir(&dir.join("dataset"))?;
            return Ok(ExperimentInputs {
                corpus: world.corpus,
                embeddings: world.embeddings,
                dataset: world.dataset,
            });
        }
        let (Some(conllu), Some(emb), Some(data)) = (&self.conllu_dir, &self.embeddings, &self.dataset_dir) else {
            let missing = [
                ("conllu_dir", &self.conllu_dir),
                ("embeddings", &self.embeddings),
                ("dataset_dir", &self.dataset_dir),
            ]
            .into_iter()
            .find(|(_, v)| v.is_none())
            .map(|(n, _)| n)
            .unwrap();
            return Err(Error::InvalidArgument(format!(
                "experiment config needs `{missing}` unless `synthetic` is set"
            )));
        };
        let labels = LabelSet::parse(&self.labels)?;
        let (corpus, _) = read_conllu_dir(conllu)?;
        Ok(ExperimentInputs {
            corpus,
            embeddings: load_embeddings(emb, None)?,
            dataset: load_dataset(data, &labels)?,
        })
    }
}

/// Loads or generates inputs, runs the pipeline with the experiment seed
/// and writes every artifact under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let inputs = cfg.inputs()?;
    let settings = cfg.pipeline.clone().with_seed(cfg.seed);
    let out = run_pipeline(&inputs.corpus, &inputs.embeddings, &inputs.dataset, &settings)?;
    out.write_artifacts(&cfg.out_dir, &cfg.name)?;
    Ok(out)
}
