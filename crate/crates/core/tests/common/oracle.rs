//! Independent reimplementations checked against the library.

use std::collections::VecDeque;

use pairpath::corpus::{NounTags, ParsedSentence, ParsedToken, Vocabulary, UNK};
use pairpath::eval::weighted_f1;
use pairpath::neural::{seeded, RunRng};
use pairpath::paths::{extract_path, extract_triples, mirror_str};
use rand::seq::SliceRandom;
use rand::Rng;

const LEMMAS: [&str; 6] = ["dog", "cat", "be", "have", "tail", "of"];
const POS: [&str; 4] = ["NOUN", "VERB", "ADP", "DET"];
const DEPRELS: [&str; 5] = ["nsubj", "dobj", "prep", "pobj", "amod"];

/// A uniformly shaped random tree: nodes attach to an earlier node of a
/// shuffled order, whose first node is the root.
pub fn random_tree(max_nodes: usize, rng: &mut RunRng) -> ParsedSentence {
    let n = rng.gen_range(2..=max_nodes);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut head = vec![0; n + 1];
    for k in 1..n {
        head[order[k]] = order[rng.gen_range(0..k)];
    }
    let tokens = (1..=n)
        .map(|i| ParsedToken {
            index: i,
            lemma: LEMMAS.choose(rng).unwrap().to_string(),
            upos: POS.choose(rng).unwrap().to_string(),
            head: head[i],
            deprel: if head[i] == 0 {
                "ROOT".into()
            } else {
                DEPRELS.choose(rng).unwrap().to_string()
            },
        })
        .collect();
    ParsedSentence::new(tokens).unwrap()
}

/// Shortest undirected walk from `i` to `j`, rendered edge by edge: a node
/// whose head is the next node is `>`, one whose head is the previous node
/// is `<`, the remaining node is `-`.
pub fn brute_force_path(s: &ParsedSentence, i: usize, j: usize, max_nodes: usize) -> Option<String> {
    let n = s.len();
    let mut adj = vec![Vec::new(); n + 1];
    for t in &s.tokens {
        if t.head != 0 {
            adj[t.index].push(t.head);
            adj[t.head].push(t.index);
        }
    }
    let mut prev = vec![usize::MAX; n + 1];
    prev[i] = i;
    let mut queue = VecDeque::from([i]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut walk = vec![j];
    while *walk.last().unwrap() != i {
        walk.push(prev[*walk.last().unwrap()]);
    }
    walk.reverse();
    if walk.len() > max_nodes {
        return None;
    }
    let edges: Vec<String> = walk
        .iter()
        .enumerate()
        .map(|(t, &node)| {
            let tok = s.token(node);
            let dir = if t + 1 < walk.len() && tok.head == walk[t + 1] {
                ">"
            } else if t > 0 && tok.head == walk[t - 1] {
                "<"
            } else {
                "-"
            };
            let lemma = match node {
                x if x == i => "X",
                x if x == j => "Y",
                _ => tok.lemma.as_str(),
            };
            format!("{lemma}/{}/{}/{dir}", tok.upos, tok.deprel)
        })
        .collect();
    Some(edges.join(" "))
}

#[derive(Debug, Default)]
pub struct PathOracleReport {
    pub pairs: usize,
    pub mismatches: usize,
    pub mirror_failures: usize,
    pub symmetry_failures: usize,
}

impl PathOracleReport {
    pub fn ok(&self) -> bool {
        self.pairs > 0 && self.mismatches == 0 && self.mirror_failures == 0 && self.symmetry_failures == 0
    }
}

/// Compares extraction with the brute force on every ordered node pair of
/// `trees` random trees, then checks mirror involution and store symmetry.
pub fn path_oracle(trees: usize, max_tree_nodes: usize, seed: u64) -> PathOracleReport {
    let mut rng = seeded(seed);
    let mut report = PathOracleReport::default();
    let mut corpus = Vec::with_capacity(trees);
    for _ in 0..trees {
        let s = random_tree(max_tree_nodes, &mut rng);
        let cap = rng.gen_range(2..=max_tree_nodes + 1);
        for i in 1..=s.len() {
            for j in 1..=s.len() {
                if i == j {
                    continue;
                }
                report.pairs += 1;
                let got = extract_path(&s, i, j, cap).unwrap();
                let want = brute_force_path(&s, i, j, cap);
                if got.as_ref().map(|p| p.to_string()) != want {
                    report.mismatches += 1;
                }
                if let Some(p) = got {
                    let m = mirror_str(&p.to_string()).unwrap();
                    if p.mirror().mirror() != p
                        || mirror_str(&m).unwrap() != p.to_string()
                        || brute_force_path(&s, j, i, cap).as_deref() != Some(m.as_str())
                    {
                        report.mirror_failures += 1;
                    }
                }
            }
        }
        corpus.push(s);
    }
    let vocab = Vocabulary::from_tokens(UNK, LEMMAS);
    let store = extract_triples(&corpus, &vocab, 6, NounTags::default());
    for (w1, w2, p, c) in store.iter() {
        if store.count(w2, w1, &mirror_str(p).unwrap()) != c {
            report.symmetry_failures += 1;
        }
    }
    report
}

/// Weighted F1 from an explicit confusion matrix.
pub fn confusion_weighted_f1(gold: &[usize], pred: &[usize], classes: usize) -> f64 {
    let mut m = vec![vec![0usize; classes]; classes];
    for (&g, &p) in gold.iter().zip(pred) {
        m[g][p] += 1;
    }
    let mut total = 0.0;
    for c in 0..classes {
        let tp = m[c][c] as f64;
        let support: usize = m[c].iter().sum();
        let predicted: usize = (0..classes).map(|r| m[r][c]).sum();
        let p = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let r = if support == 0 { 0.0 } else { tp / support as f64 };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        total += f * support as f64;
    }
    total / gold.len() as f64
}

/// Largest deviation between the library and the confusion-matrix oracle.
pub fn metric_oracle(cases: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let classes = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=200);
        let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        let labels: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
        let got = weighted_f1(&gold, &pred, &labels).unwrap().weighted_f1;
        worst = worst.max((got - confusion_weighted_f1(&gold, &pred, classes)).abs());
    }
    worst
}
