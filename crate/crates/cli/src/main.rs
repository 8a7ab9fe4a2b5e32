//! `pairpath` command-line interface.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pairpath::classifiers::{
    train_supervised, Architecture, ClassifierSpec, RelationClassifier, SupervisedInputs,
    SupervisedTrainConfig,
};
use pairpath::corpus::{build_vocab, load_embeddings, read_conllu_dir, write_conllu, NounTags};
use pairpath::eval::{
    evaluate, export_pair_vectors, load_dataset, run_experiment, ExperimentConfig, LabelSet, Split,
    VectorKind,
};
use pairpath::eval::dataset::load_split;
use pairpath::pairpath::{fit_pairpath, PairPathModel, TrainingRunConfig};
use pairpath::paths::{
    extract_triples, prune, PathLexicon, TripleStore, DEFAULT_LEXICON_CAP, DEFAULT_MAX_NODES,
    DEFAULT_MIN_PATH_COUNT,
};
use pairpath::synthetic::{generate, SyntheticConfig};
use pairpath::Error;

#[derive(Parser)]
#[command(name = "pairpath", version, about = "Path-based lexical relation classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count (w1, w2, path) triples over a directory of CoNLL-U files.
    ExtractTriples(ExtractArgs),
    /// Prune rare paths and write the path lexicon.
    BuildLexicon(LexiconArgs),
    /// Train the unsupervised pair-path model.
    TrainPairpath(TrainPairpathArgs),
    /// Print the top paths predicted for a word pair.
    PredictPaths(PredictArgs),
    /// Train a relation classifier with the validation grid.
    TrainClassifier(TrainClassifierArgs),
    /// Score a trained classifier on one dataset split.
    Evaluate(EvaluateArgs),
    /// Write pair vectors from a pair-path model.
    ExportPairs(ExportArgs),
    /// Run a full experiment described by a TOML file.
    RunExperiment(RunExperimentArgs),
    /// Write a synthetic corpus, word vectors and dataset.
    Synthesize(SynthesizeArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    conllu: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Minimum noun frequency for the extraction vocabulary.
    #[arg(long, default_value_t = 5)]
    min_count: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: usize,
    #[arg(long)]
    include_propn: bool,
}

#[derive(Args)]
struct LexiconArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long, default_value_t = DEFAULT_LEXICON_CAP)]
    cap: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_PATH_COUNT)]
    min_path_count: u64,
    /// Lexicon output; the pruned triples go to `--pruned-out` when given.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pruned_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainPairpathArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Lexicon from `build-lexicon`; built from the triples with the
    /// default pruning when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    neg: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    w1: String,
    #[arg(long)]
    w2: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
}

#[derive(Args)]
struct TrainClassifierArgs {
    #[arg(long, value_parser = parse_arch)]
    arch: Architecture,
    #[arg(long)]
    aug: bool,
    #[arg(long)]
    rep: bool,
    #[arg(long)]
    dataset_dir: PathBuf,
    /// Label preset (khn, bless, root09, evalution) or a comma list.
    #[arg(long, default_value = "khn")]
    labels: String,
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Required by --aug and --rep.
    #[arg(long)]
    pairpath_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    #[arg(long)]
    out: PathBuf,
    /// Tuning report; defaults to the model path with `.tuning.tsv`.
    #[arg(long)]
    tuning_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "test", value_parser = parse_split)]
    split: Split,
    #[arg(long)]
    dataset_dir: PathBuf,
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Pair-path model file.
    #[arg(long)]
    model: PathBuf,
    /// `w1 TAB w2 TAB label` file.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    kind: VectorKind,
    #[arg(long, default_value = "khn")]
    labels: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_split(s: &str) -> Result<Split, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<VectorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(Error::MissingInput(path.to_path_buf()).into()),
        Err(e) => Err(Error::Io(e)).with_context(|| format!("opening {}", path.display())),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::Io)?;
    }
    let f = File::create(path)
        .map_err(Error::Io)
        .with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn read_triples(path: &Path) -> anyhow::Result<TripleStore> {
    Ok(TripleStore::read_tsv(open(path)?, &path.display().to_string())?)
}

/// Writes to the file when given, otherwise to stdout.
fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn extract(a: ExtractArgs) -> anyhow::Result<()> {
    let (corpus, stats) = read_conllu_dir(&a.conllu)?;
    let nouns = NounTags {
        include_propn: a.include_propn,
    };
    let vocab = build_vocab(&corpus, a.min_count, true, nouns)?;
    let store = extract_triples(&corpus, &vocab, a.max_nodes, nouns);
    let mut w = create(&a.out)?;
    store.write_tsv(&mut w)?;
    w.flush().map_err(Error::Io)?;
    eprintln!(
        "{} sentences ({} malformed), {} nouns, {} triples",
        corpus.len(),
        stats.malformed,
        vocab.len() - 1,
        store.len()
    );
    Ok(())
}

fn build_lexicon(a: LexiconArgs) -> anyhow::Result<()> {
    let store = read_triples(&a.triples)?;
    let (pruned, lexicon) = prune(&store, a.min_path_count, a.cap);
    let mut w = create(&a.out)?;
    lexicon.write_tsv(&mut w)?;
    w.flush().map_err(Error::Io)?;
    if let Some(p) = &a.pruned_out {
        let mut w = create(p)?;
        pruned.write_tsv(&mut w)?;
        w.flush().map_err(Error::Io)?;
    }
    eprintln!("{} paths in lexicon, {} triples kept", lexicon.len() - 1, pruned.len());
    Ok(())
}

fn train_pairpath(a: TrainPairpathArgs) -> anyhow::Result<()> {
    let store = read_triples(&a.triples)?;
    let lexicon = match &a.lexicon {
        Some(p) => PathLexicon::read_tsv(open(p)?, &p.display().to_string())?,
        None => prune(&store, DEFAULT_MIN_PATH_COUNT, DEFAULT_LEXICON_CAP).1,
    };
    let embeddings = load_embeddings(&a.embeddings, None)?;
    let words = embeddings.subset(store.iter().flat_map(|(w1, w2, _, _)| [w1, w2]));
    let cfg = TrainingRunConfig {
        epochs: a.epochs,
        minibatch: a.batch,
        lr: a.lr,
        negatives: a.neg,
        seed: a.seed,
        ..TrainingRunConfig::default()
    };
    let (model, log) = fit_pairpath(words, &store, &lexicon, a.dim, &cfg)?;
    model.save(&a.out)?;
    for (epoch, obj) in log.iter().enumerate() {
        eprintln!("epoch {epoch}\tobjective {obj:.6}");
    }
    Ok(())
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let model = PairPathModel::load(&a.model)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for (rank, (path, score)) in model.predict_top_paths(&a.w1, &a.w2, a.k)?.iter().enumerate() {
        writeln!(out, "{}\t{path}\t{score:.6}", rank + 1).map_err(Error::Io)?;
    }
    out.flush().map_err(Error::Io)?;
    Ok(())
}

fn train_classifier(a: TrainClassifierArgs) -> anyhow::Result<()> {
    let spec = ClassifierSpec::new(a.arch, a.aug, a.rep);
    let pairpath = match (&a.pairpath_model, spec.needs_pairpath()) {
        (Some(p), _) => Some(PairPathModel::load(p)?),
        (None, true) => {
            return Err(Error::InvalidArgument(format!("{spec} needs --pairpath-model")).into());
        }
        (None, false) => None,
    };
    let labels = LabelSet::parse(&a.labels)?;
    let dataset = load_dataset(&a.dataset_dir, &labels)?;
    let store = read_triples(&a.triples)?;
    let embeddings = load_embeddings(&a.embeddings, None)?;
    let inputs = SupervisedInputs {
        store: &store,
        embeddings: &embeddings,
        pairpath: pairpath.as_ref(),
    };
    let cfg = SupervisedTrainConfig {
        seed: a.seed,
        max_epochs: a.max_epochs,
        ..SupervisedTrainConfig::default()
    };
    let (clf, report) = train_supervised(spec, &inputs, &dataset, &cfg)?;
    clf.save(&a.out)?;
    let tuning = a
        .tuning_out
        .unwrap_or_else(|| a.out.with_extension("tuning.tsv"));
    let mut w = create(&tuning)?;
    report.write_tsv(&mut w)?;
    w.flush().map_err(Error::Io)?;
    if let Some(row) = report.selected() {
        eprintln!("{spec}: selected {} with validation F1 {:.4}", row.setting, row.val_f1);
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> anyhow::Result<()> {
    let clf = RelationClassifier::load(&a.model)?;
    let path = a.dataset_dir.join(a.split.file_name());
    let instances = load_split(&path, &clf.labels)?;
    let store = read_triples(&a.triples)?;
    let report = evaluate(&clf, &store, &instances)?;
    let mut w = output(a.out.as_deref())?;
    w.write_all(report.to_tsv().as_bytes()).map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    Ok(())
}

fn export(a: ExportArgs) -> anyhow::Result<()> {
    let labels = LabelSet::parse(&a.labels)?;
    let pairs = load_split(&a.pairs, &labels)?;
    let model = PairPathModel::load(&a.model)?;
    let mut w = output(a.out.as_deref())?;
    export_pair_vectors(&mut w, &model, &pairs, &labels, a.kind)?;
    w.flush().map_err(Error::Io)?;
    Ok(())
}

fn experiment(a: RunExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let out = run_experiment(&cfg)?;
    print!("{}", out.results_table(&cfg.name));
    Ok(())
}

fn synthesize(a: SynthesizeArgs) -> anyhow::Result<()> {
    let world = generate(&SyntheticConfig {
        seed: a.seed,
        ..SyntheticConfig::default()
    })?;
    std::fs::create_dir_all(a.out.join("corpus")).map_err(Error::Io)?;
    let mut w = create(&a.out.join("corpus").join("corpus.conllu"))?;
    write_conllu(&mut w, &world.corpus).map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    let mut w = create(&a.out.join("embeddings.txt"))?;
    world.embeddings.write_text(&mut w).map_err(Error::Io)?;
    w.flush().map_err(Error::Io)?;
    world.dataset.write_dir(&a.out.join("dataset"))?;
    let mut w = create(&a.out.join("withheld.tsv"))?;
    for (split, inst) in &world.withheld {
        writeln!(w, "{split}\t{}\t{}\t{}", inst.w1, inst.w2, world.dataset.labels.label(inst.label))
            .map_err(Error::Io)?;
    }
    w.flush().map_err(Error::Io)?;
    eprintln!(
        "{} sentences, {} dataset pairs, {} withheld",
        world.corpus.len(),
        world.dataset.all().count(),
        world.withheld.len()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::ExtractTriples(a) => extract(a),
        Command::BuildLexicon(a) => build_lexicon(a),
        Command::TrainPairpath(a) => train_pairpath(a),
        Command::PredictPaths(a) => predict(a),
        Command::TrainClassifier(a) => train_classifier(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::ExportPairs(a) => export(a),
        Command::RunExperiment(a) => experiment(a),
        Command::Synthesize(a) => synthesize(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
