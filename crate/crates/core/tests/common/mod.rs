#![allow(dead_code)]

pub mod gradcheck;
pub mod oracle;
pub mod synthetic;

use pairpath::corpus::{read_embeddings, EmbeddingTable};
use pairpath::eval::{Instance, LabelSet, RelationDataset};
use pairpath::neural::{Parameter, RunRng};
use pairpath::paths::TripleStore;
use rand::seq::SliceRandom;
use rand::Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// `|a - n| / max(|a|, |n|, 1e-6)` over whole vectors. The floor keeps
/// central-difference round-off on vanishing gradients from counting.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    norm(&diff) / norm(analytic).max(norm(numeric)).max(1e-6)
}

/// Central differences of `loss` at coordinates of `param`.
///
/// `get` selects the parameter inside `model`; the value is restored after
/// each probe.
pub fn numeric_grad<M, G, L>(model: &mut M, get: G, loss: L, coords: &[usize]) -> Vec<f64>
where
    G: Fn(&mut M) -> &mut Parameter,
    L: Fn(&mut M) -> f64,
{
    coords
        .iter()
        .map(|&c| {
            let orig = get(model).value.data()[c];
            get(model).value.data_mut()[c] = orig + STEP;
            let up = loss(model);
            get(model).value.data_mut()[c] = orig - STEP;
            let down = loss(model);
            get(model).value.data_mut()[c] = orig;
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

/// Up to `n` distinct coordinates of a tensor with `len` entries.
pub fn sample_coords(len: usize, n: usize, rng: &mut RunRng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..len).collect();
    if len > n {
        all.shuffle(rng);
        all.truncate(n);
        all.sort_unstable();
    }
    all
}

/// Word vectors of dimension `dim` with random entries for `words`.
pub fn random_embeddings(words: &[&str], dim: usize, rng: &mut RunRng) -> EmbeddingTable {
    let text: String = words
        .iter()
        .map(|w| {
            let v: Vec<String> = (0..dim).map(|_| format!("{:.6}", rng.gen_range(-1.0..1.0))).collect();
            format!("{w} {}\n", v.join(" "))
        })
        .collect();
    read_embeddings(text.as_bytes(), Some(dim), "fixture").unwrap().0
}

pub const IS_A: &str = "X/NOUN/nsubj/> be/VERB/ROOT/- Y/NOUN/attr/<";
pub const HAS: &str = "X/NOUN/nsubj/> have/VERB/ROOT/- Y/NOUN/dobj/<";
pub const AND: &str = "X/NOUN/ROOT/- Y/NOUN/conj/<";
pub const NEAR: &str = "X/NOUN/ROOT/- near/ADP/prep/< Y/NOUN/pobj/<";

/// Pairs whose single corpus path determines the label.
pub fn separable_fixture(pairs: usize, rng: &mut RunRng) -> (TripleStore, RelationDataset, Vec<String>) {
    let labels = LabelSet::new("toy", &["hypernym", "meronym", "co-hyponym"]).unwrap();
    let templates = [IS_A, HAS, AND];
    let mut store = TripleStore::new();
    let mut instances = Vec::new();
    let mut words = Vec::new();
    for i in 0..pairs {
        let label = i % 3;
        let (w1, w2) = (format!("a{i}"), format!("b{i}"));
        store.add(&w1, &w2, templates[label], rng.gen_range(1..4));
        if rng.gen_bool(0.3) {
            store.add(&w1, &w2, NEAR, 1);
        }
        words.push(w1.clone());
        words.push(w2.clone());
        instances.push(Instance { w1, w2, label });
    }
    let dataset = RelationDataset {
        name: "toy".into(),
        labels,
        train: instances.clone(),
        val: instances.clone(),
        test: instances,
    };
    (store, dataset, words)
}
