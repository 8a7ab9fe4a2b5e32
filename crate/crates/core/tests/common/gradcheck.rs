//! Finite-difference checks shared by the gradient tests and the acceptance
//! harness. Each suite returns the worst relative error over its trials.

use pairpath::classifiers::{ClassifierSpec, PairExample, RelationClassifier, SupervisedInputs};
use pairpath::eval::{Instance, LabelSet, RelationDataset};
use pairpath::neural::linear::{tanh_backward, tanh_vec};
use pairpath::neural::{
    affine, affine_backward, init, seeded, softmax_cross_entropy, LstmStack, Parameter, RunRng,
    Tensor,
};
use pairpath::pairpath::PairPathModel;
use pairpath::paths::{PathLexicon, TripleStore};
use rand::Rng;

use super::{numeric_grad, random_embeddings, relative_error, sample_coords, AND, HAS, IS_A, NEAR};

fn random_tensor(shape: &[usize], rng: &mut RunRng) -> Tensor {
    init::uniform(shape, 1.0, rng)
}

fn weighted_sum(t: &Tensor, r: &Tensor) -> f64 {
    t.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

/// Checks one parameter against its accumulated analytic gradient.
fn check<M, G, L>(model: &mut M, get: G, loss: L, per_tensor: usize, rng: &mut RunRng) -> f64
where
    G: Fn(&mut M) -> &mut Parameter,
    L: Fn(&mut M) -> f64,
{
    let len = get(model).value.len();
    let coords = sample_coords(len, per_tensor, rng);
    let analytic: Vec<f64> = coords.iter().map(|&c| get(model).grad.data()[c]).collect();
    let numeric = numeric_grad(model, get, loss, &coords);
    relative_error(&analytic, &numeric)
}

/// `L = Σ r ⊙ affine(x, W, b)` on random shapes.
pub fn affine_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (n, d_in, d_out) = (rng.gen_range(1..5), rng.gen_range(1..7), rng.gen_range(1..7));
        // [x, W, b]
        let mut ps = vec![
            Parameter::new(random_tensor(&[n, d_in], &mut rng)),
            Parameter::new(random_tensor(&[d_out, d_in], &mut rng)),
            Parameter::new(random_tensor(&[d_out], &mut rng)),
        ];
        let r = random_tensor(&[n, d_out], &mut rng);
        let loss = |ps: &mut Vec<Parameter>| weighted_sum(&affine(&ps[0].value, &ps[1], &ps[2]).unwrap(), &r);
        let x = ps[0].value.clone();
        let (w, b) = ps.split_at_mut(2);
        let dx = affine_backward(&x, &mut w[1], &mut b[0], &r).unwrap();
        ps[0].grad = dx;
        for i in 0..3 {
            worst = worst.max(check(&mut ps, |p| &mut p[i], loss, 30, &mut rng));
        }
    }
    worst
}

/// `L = Σ r ⊙ tanh(a)`.
pub fn tanh_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.gen_range(1..12);
        let mut a = Parameter::new(random_tensor(&[d], &mut rng));
        let r = random_tensor(&[d], &mut rng);
        let y = tanh_vec(a.value.data());
        a.grad = Tensor::new(vec![d], tanh_backward(&y, r.data())).unwrap();
        let loss = |a: &mut Parameter| {
            tanh_vec(a.value.data()).iter().zip(r.data()).map(|(p, q)| p * q).sum()
        };
        worst = worst.max(check(&mut a, |a| a, loss, 30, &mut rng));
    }
    worst
}

/// Mean cross-entropy w.r.t. the logits.
pub fn softmax_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (n, c) = (rng.gen_range(1..6), rng.gen_range(2..6));
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let mut z = Parameter::new(init::uniform(&[n, c], 3.0, &mut rng));
        z.grad = softmax_cross_entropy(&z.value, &labels).unwrap().1;
        let loss = |z: &mut Parameter| softmax_cross_entropy(&z.value, &labels).unwrap().0;
        worst = worst.max(check(&mut z, |z| z, loss, 30, &mut rng));
    }
    worst
}

struct LstmCase {
    stack: LstmStack,
    inputs: Parameter,
}

/// `L = r · h_T` of a stacked LSTM over a random sequence, w.r.t. every
/// weight, bias and input.
pub fn lstm_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let layers = rng.gen_range(1..3);
        let (d_in, hidden, len) = (rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..5));
        let mut stack = LstmStack::new(layers, d_in, hidden, &mut rng);
        for p in stack.parameters_mut() {
            p.value = init::uniform(p.shape(), 0.8, &mut rng);
        }
        let inputs = Parameter::new(random_tensor(&[len, d_in], &mut rng));
        let r = random_tensor(&[hidden], &mut rng);
        let mut case = LstmCase { stack, inputs };
        let seq = |t: &Tensor| (0..t.rows()).map(|i| t.row(i).to_vec()).collect::<Vec<_>>();
        let trace = case.stack.forward(&seq(&case.inputs.value)).unwrap();
        let dx = case.stack.backward(&trace, r.data());
        case.inputs.grad = Tensor::from_rows(&dx).unwrap();
        let loss = |c: &mut LstmCase| {
            let out = c.stack.forward(&seq(&c.inputs.value)).unwrap();
            out.output().iter().zip(r.data()).map(|(a, b)| a * b).sum()
        };
        for l in 0..layers {
            worst = worst.max(check(&mut case, |c| &mut c.stack.layers[l].weight, loss, 40, &mut rng));
            worst = worst.max(check(&mut case, |c| &mut c.stack.layers[l].bias, loss, 40, &mut rng));
        }
        worst = worst.max(check(&mut case, |c| &mut c.inputs, loss, 40, &mut rng));
    }
    worst
}

/// Negative-sampling loss of one triple w.r.t. the pair encoder and the
/// path table.
pub fn pairpath_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dim = rng.gen_range(1..6);
        let hidden = rng.gen_range(1..8);
        let words = random_embeddings(&["w1", "w2", "w3"], dim, &mut rng);
        let npaths = rng.gen_range(2..6);
        let lexicon = PathLexicon::from_counts(
            (0..npaths).map(|i| (format!("X/NOUN/d{i}/> Y/NOUN/ROOT/-"), 1 + i as u64)),
        );
        let mut m = PairPathModel::new(words, lexicon, hidden, 0, &mut rng).unwrap();
        m.path_table.value = init::uniform(m.path_table.shape(), 1.0, &mut rng);
        let (w1, w2) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let pos = rng.gen_range(1..=npaths);
        let negs: Vec<usize> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(1..=npaths)).collect();
        m.triple_loss(w1, w2, pos, &negs, 1.0);
        let loss = |m: &mut PairPathModel| m.triple_loss(w1, w2, pos, &negs, 0.0);
        worst = worst.max(check(&mut m, |m| &mut m.encoder1.weight, loss, 30, &mut rng));
        worst = worst.max(check(&mut m, |m| &mut m.encoder1.bias, loss, 30, &mut rng));
        worst = worst.max(check(&mut m, |m| &mut m.encoder2.weight, loss, 30, &mut rng));
        worst = worst.max(check(&mut m, |m| &mut m.encoder2.bias, loss, 30, &mut rng));
        worst = worst.max(check(&mut m, |m| &mut m.path_table, loss, 30, &mut rng));
    }
    worst
}

const SPECS: [&str; 7] = [
    "npb",
    "npb+rep",
    "lexnet",
    "lexnet+rep",
    "lexnet_h",
    "lexnet_h+rep",
    "lexnet_h+aug+rep",
];

/// Full supervised loss through the head, optional hidden layer, path
/// averaging, both LSTM layers and every component table, on a micro
/// instance with two paths per pair and three classes. Dropout masks are
/// replayed from a fixed seed. Also checks the gradient w.r.t. the frozen
/// pseudo-path features.
pub fn supervised_suite(trials: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    let labels = LabelSet::new("micro", &["a", "b", "c"]).unwrap();
    for trial in 0..trials {
        let spec: ClassifierSpec = SPECS[trial % SPECS.len()].parse().unwrap();
        let embeddings = random_embeddings(&["p", "q", "r", "s", "be", "have"], 50, &mut rng);
        let mut store = TripleStore::new();
        let templates = [IS_A, HAS, AND, NEAR];
        let instances: Vec<Instance> = [("p", "q"), ("r", "s")]
            .iter()
            .map(|&(w1, w2)| {
                let a = rng.gen_range(0..4);
                store.add(w1, w2, templates[a], rng.gen_range(1..5));
                store.add(w1, w2, templates[(a + 1) % 4], rng.gen_range(1..5));
                Instance {
                    w1: w1.into(),
                    w2: w2.into(),
                    label: rng.gen_range(0..3),
                }
            })
            .collect();
        let dataset = RelationDataset {
            name: "micro".into(),
            labels: labels.clone(),
            train: instances.clone(),
            val: instances.clone(),
            test: instances,
        };
        let lexicon = PathLexicon::from_counts(templates.iter().map(|t| (*t, 3u64)));
        let pp = PairPathModel::new(embeddings.clone(), lexicon, 100, 1, &mut rng).unwrap();
        let inputs = SupervisedInputs {
            store: &store,
            embeddings: &embeddings,
            pairpath: Some(&pp),
        };
        let dropout = if rng.gen_bool(0.5) { 0.0 } else { 0.3 };
        let setup = inputs
            .setup(spec, &dataset, dropout, spec.aug.then_some(1))
            .unwrap();
        let mut clf = RelationClassifier::new(&setup, &mut rng).unwrap();
        let mut examples: Vec<PairExample> = dataset
            .train
            .iter()
            .map(|i| clf.prepare(&store, &i.w1, &i.w2, i.label).unwrap())
            .collect();
        let mask_seed = rng.gen::<u64>();
        let loss_of = |clf: &mut RelationClassifier, ex: &[PairExample]| {
            let batch: Vec<&PairExample> = ex.iter().collect();
            clf.batch_loss(&batch, Some(&mut seeded(mask_seed)), false).unwrap().loss
        };
        let batch: Vec<&PairExample> = examples.iter().collect();
        let out = clf.batch_loss(&batch, Some(&mut seeded(mask_seed)), true).unwrap();
        let n_params = clf.parameters_mut().len();
        for i in 0..n_params {
            let err = check(
                &mut clf,
                |c| c.parameters_mut().remove(i),
                |c| loss_of(c, &examples),
                8,
                &mut rng,
            );
            worst = worst.max(err);
        }
        if spec.rep {
            let coords = sample_coords(clf.rep_dim(), 8, &mut rng);
            let analytic: Vec<f64> = coords.iter().map(|&c| out.rep_grads[0][c]).collect();
            let numeric: Vec<f64> = coords
                .iter()
                .map(|&c| {
                    let orig = examples[0].rep.as_ref().unwrap()[c];
                    examples[0].rep.as_mut().unwrap()[c] = orig + super::STEP;
                    let up = loss_of(&mut clf, &examples);
                    examples[0].rep.as_mut().unwrap()[c] = orig - super::STEP;
                    let down = loss_of(&mut clf, &examples);
                    examples[0].rep.as_mut().unwrap()[c] = orig;
                    (up - down) / (2.0 * super::STEP)
                })
                .collect();
            worst = worst.max(relative_error(&analytic, &numeric));
        }
    }
    worst
}
