use crate::corpus::{NounTags, ParsedSentence, Vocabulary};
use crate::error::{Error, Result};

use super::edge::{DepPath, Direction, PathEdge, X_SLOT, Y_SLOT};
use super::store::TripleStore;

/// Default cap on path length in nodes: X, Y and up to three in between.
pub const DEFAULT_MAX_NODES: usize = 5;

fn ancestors(s: &ParsedSentence, mut node: usize) -> Vec<usize> {
    let mut chain = vec![node];
    while s.token(node).head != 0 {
        node = s.token(node).head;
        chain.push(node);
    }
    chain
}

/// Dependency path between tokens `i` and `j` (1-based), or `None` when it
/// has more than `max_nodes` nodes.
///
/// Nodes on the ascent from `i` get `>`, the lowest common ancestor gets `-`
/// with its own relation to its head, nodes on the descent to `j` get `<`.
/// When one endpoint is the ancestor of the other, that endpoint is the `-`
/// node.
pub fn extract_path(
    s: &ParsedSentence,
    i: usize,
    j: usize,
    max_nodes: usize,
) -> Result<Option<DepPath>> {
    let n = s.len();
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!(
            "token index out of range: ({i}, {j}) for sentence of length {n}"
        )));
    }
    if i == j {
        return Err(Error::InvalidArgument(format!("path endpoints coincide at {i}")));
    }
    let up_i = ancestors(s, i);
    let up_j = ancestors(s, j);
    let (pos_i, lca) = up_i
        .iter()
        .enumerate()
        .find(|(_, a)| up_j.contains(a))
        .map(|(p, &a)| (p, a))
        .expect("nodes of one tree share the root");
    let pos_j = up_j.iter().position(|&a| a == lca).unwrap();
    if pos_i + pos_j + 1 > max_nodes {
        return Ok(None);
    }

    let render = |node: usize, direction: Direction| {
        let t = s.token(node);
        let lemma = if node == i {
            X_SLOT.to_string()
        } else if node == j {
            Y_SLOT.to_string()
        } else {
            t.lemma.clone()
        };
        PathEdge {
            lemma,
            pos: t.upos.clone(),
            deprel: t.deprel.clone(),
            direction,
        }
    };
    let mut edges = Vec::with_capacity(pos_i + pos_j + 1);
    edges.extend(up_i[..pos_i].iter().map(|&a| render(a, Direction::Up)));
    edges.push(render(lca, Direction::Root));
    edges.extend(up_j[..pos_j].iter().rev().map(|&a| render(a, Direction::Down)));
    DepPath::new(edges).map(Some)
}

/// Counts `(w1, w2, path)` for every ordered pair of in-vocabulary nouns
/// sharing a sentence. Each unordered pair contributes both orientations.
pub fn extract_triples(
    corpus: &[ParsedSentence],
    vocab: &Vocabulary,
    max_nodes: usize,
    nouns: NounTags,
) -> TripleStore {
    let mut store = TripleStore::new();
    for s in corpus {
        add_sentence(&mut store, s, vocab, max_nodes, nouns);
    }
    store
}

pub(crate) fn add_sentence(
    store: &mut TripleStore,
    s: &ParsedSentence,
    vocab: &Vocabulary,
    max_nodes: usize,
    nouns: NounTags,
) {
    let candidates: Vec<usize> = s
        .tokens
        .iter()
        .filter(|t| nouns.is_noun(&t.upos) && vocab.get(&t.lemma).is_some_and(|id| id != 0))
        .map(|t| t.index)
        .collect();
    for (a, &i) in candidates.iter().enumerate() {
        for &j in &candidates[a + 1..] {
            let Some(path) = extract_path(s, i, j, max_nodes).expect("indices come from the sentence")
            else {
                continue;
            };
            let (li, lj) = (&s.token(i).lemma, &s.token(j).lemma);
            store.add(li, lj, &path.to_string(), 1);
            store.add(lj, li, &path.mirror().to_string(), 1);
        }
    }
}
