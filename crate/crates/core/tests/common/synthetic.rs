//! The synthetic missing-path experiment shared by the acceptance harness.

use pairpath::classifiers::{
    train_supervised, ClassifierSpec, RelationClassifier, SupervisedInputs, SupervisedTrainConfig,
};
use pairpath::corpus::{build_vocab, NounTags};
use pairpath::eval::{evaluate, pair_vector, Instance, LinearProbe, ProbeConfig, VectorKind};
use pairpath::pairpath::{fit_pairpath, PairPathModel, TrainingRunConfig};
use pairpath::paths::{extract_triples, prune, PathLexicon, TripleStore, DEFAULT_MAX_NODES};
use pairpath::synthetic::{generate, Relation, SyntheticConfig, SyntheticWorld};

pub const CLASSIFIER_SEEDS: [u64; 3] = [1, 2, 3];
/// Predicted paths per direction when checking withheld pairs.
pub const HIT_K: usize = 3;

pub struct Trained {
    pub world: SyntheticWorld,
    pub store: TripleStore,
    pub lexicon: PathLexicon,
    pub pairpath: PairPathModel,
    pub objective_log: Vec<f64>,
}

/// Generates the default world, extracts and prunes its triples and fits
/// the pair-path model with the default protocol.
pub fn train_world(seed: u64) -> Trained {
    let world = generate(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let nouns = NounTags::default();
    let vocab = build_vocab(&world.corpus, 1, true, nouns).unwrap();
    let raw = extract_triples(&world.corpus, &vocab, DEFAULT_MAX_NODES, nouns);
    let (store, lexicon) = prune(&raw, 5, 30_000);
    let words = world.embeddings.subset(vocab.tokens().iter().map(String::as_str));
    let cfg = TrainingRunConfig {
        seed,
        ..TrainingRunConfig::default()
    };
    let (pairpath, objective_log) = fit_pairpath(words, &store, &lexicon, 100, &cfg).unwrap();
    Trained {
        world,
        store,
        lexicon,
        pairpath,
        objective_log,
    }
}

/// Share of withheld related pairs whose top `2k` predictions include a
/// path characteristic of their relation.
pub fn withheld_hit_rate(t: &Trained, k: usize) -> (usize, usize) {
    let mut hits = 0;
    let mut total = 0;
    for (_, inst) in &t.world.withheld {
        let rel = t.world.relation_of(inst);
        if rel == Relation::Random {
            continue;
        }
        let characteristic = SyntheticWorld::characteristic_paths(rel);
        let top = t.pairpath.predict_top_paths(&inst.w1, &inst.w2, k).unwrap();
        total += 1;
        if top.iter().any(|(p, _)| characteristic.contains(p)) {
            hits += 1;
        }
    }
    (hits, total)
}

pub fn train_classifier(t: &Trained, spec: &str, seed: u64) -> RelationClassifier {
    let inputs = SupervisedInputs {
        store: &t.store,
        embeddings: &t.world.embeddings,
        pairpath: Some(&t.pairpath),
    };
    let cfg = SupervisedTrainConfig {
        seed,
        ..SupervisedTrainConfig::default()
    };
    let spec: ClassifierSpec = spec.parse().unwrap();
    train_supervised(spec, &inputs, &t.world.dataset, &cfg).unwrap().0
}

/// Test weighted F1 per classifier seed.
pub fn test_f1_by_seed(t: &Trained, spec: &str) -> Vec<f64> {
    CLASSIFIER_SEEDS
        .iter()
        .map(|&s| {
            let clf = train_classifier(t, spec, s);
            evaluate(&clf, &t.store, &t.world.dataset.test).unwrap().weighted_f1
        })
        .collect()
}

fn features(t: &Trained, kind: VectorKind, pairs: &[Instance]) -> (Vec<Vec<f64>>, Vec<usize>) {
    pairs
        .iter()
        .map(|i| (pair_vector(&t.pairpath, kind, &i.w1, &i.w2), i.label))
        .unzip()
}

/// Test accuracy of a linear probe fit on the train split.
pub fn probe_accuracy(t: &Trained, kind: VectorKind) -> f64 {
    let (x, y) = features(t, kind, &t.world.dataset.train);
    let probe = LinearProbe::fit(&x, &y, t.world.dataset.labels.len(), &ProbeConfig::default()).unwrap();
    let (tx, ty) = features(t, kind, &t.world.dataset.test);
    probe.accuracy(&tx, &ty).unwrap()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
