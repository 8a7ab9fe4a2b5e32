use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

use super::edge::EMPTY_PATH;

/// Paths of one pair with their weights, as fed to path aggregation.
pub type PathSet = Vec<(String, f64)>;

/// Multiset of `(w1, w2, path)` corpus co-occurrences.
///
/// Nested ordered maps keep iteration (and the TSV form) sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleStore {
    pairs: BTreeMap<String, BTreeMap<String, BTreeMap<String, u64>>>,
    triples: usize,
}

impl TripleStore {
    pub fn new() -> Self {
        TripleStore::default()
    }

    pub fn add(&mut self, w1: &str, w2: &str, path: &str, count: u64) {
        if count == 0 {
            return;
        }
        let slot = self
            .pairs
            .entry(w1.to_string())
            .or_default()
            .entry(w2.to_string())
            .or_default()
            .entry(path.to_string())
            .or_insert(0);
        if *slot == 0 {
            self.triples += 1;
        }
        *slot += count;
    }

    pub fn count(&self, w1: &str, w2: &str, path: &str) -> u64 {
        self.paths(w1, w2)
            .and_then(|p| p.get(path))
            .copied()
            .unwrap_or(0)
    }

    /// All paths observed for the ordered pair.
    pub fn paths(&self, w1: &str, w2: &str) -> Option<&BTreeMap<String, u64>> {
        self.pairs.get(w1)?.get(w2)
    }

    pub fn has_paths(&self, w1: &str, w2: &str) -> bool {
        self.paths(w1, w2).is_some_and(|p| !p.is_empty())
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.triples
    }

    pub fn is_empty(&self) -> bool {
        self.triples == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &str, u64)> {
        self.pairs.iter().flat_map(|(w1, inner)| {
            inner.iter().flat_map(move |(w2, paths)| {
                paths
                    .iter()
                    .map(move |(p, &c)| (w1.as_str(), w2.as_str(), p.as_str(), c))
            })
        })
    }

    /// Corpus-wide count of every path.
    pub fn path_totals(&self) -> BTreeMap<&str, u64> {
        let mut totals = BTreeMap::new();
        for (_, _, p, c) in self.iter() {
            *totals.entry(p).or_insert(0) += c;
        }
        totals
    }

    /// Adds all counts of `other`. The result does not depend on merge order.
    pub fn merge(&mut self, other: &TripleStore) {
        for (w1, w2, p, c) in other.iter() {
            self.add(w1, w2, p, c);
        }
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (w1, w2, p, c) in self.iter() {
            writeln!(w, "{w1}\t{w2}\t{p}\t{c}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R, source: &str) -> Result<Self> {
        let mut store = TripleStore::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(source, n + 1, "expected w1<TAB>w2<TAB>path<TAB>count"));
            }
            let count: u64 = cols[3]
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| Error::parse(source, n + 1, format!("bad count {:?}", cols[3])))?;
            store.add(cols[0], cols[1], cols[2], count);
        }
        Ok(store)
    }
}

/// Paths of an ordered pair; the empty path with weight 1 when there are none.
pub fn paths_for_pair(store: &TripleStore, w1: &str, w2: &str) -> PathSet {
    match store.paths(w1, w2) {
        Some(p) if !p.is_empty() => p.iter().map(|(p, &c)| (p.clone(), c as f64)).collect(),
        _ => vec![(EMPTY_PATH.to_string(), 1.0)],
    }
}

/// Path vocabulary used as prediction targets, id 0 being the empty path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathLexicon {
    vocab: Vocabulary,
    counts: Vec<u64>,
}

impl PathLexicon {
    pub fn from_counts<I, S>(paths: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::new(EMPTY_PATH);
        let mut counts = vec![0];
        for (p, c) in paths {
            let before = vocab.len();
            vocab.insert(p.as_ref());
            if vocab.len() > before {
                counts.push(c);
            }
        }
        PathLexicon { vocab, counts }
    }

    /// Number of entries including the empty path.
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    /// True when there are no real paths.
    pub fn is_empty(&self) -> bool {
        self.vocab.len() <= 1
    }

    pub fn id(&self, path: &str) -> Option<usize> {
        self.vocab.get(path)
    }

    pub fn path(&self, id: usize) -> &str {
        self.vocab.token(id)
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn paths(&self) -> &[String] {
        self.vocab.tokens()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (id, (p, c)) in self.vocab.tokens().iter().zip(&self.counts).enumerate() {
            writeln!(w, "{p}\t{id}\t{c}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R, source: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let parsed = (cols.len() == 3)
                .then(|| Some((cols[1].parse::<usize>().ok()?, cols[2].parse::<u64>().ok()?)))
                .flatten();
            let Some((id, count)) = parsed else {
                return Err(Error::parse(source, n + 1, "expected path<TAB>id<TAB>count"));
            };
            if id != entries.len() {
                return Err(Error::parse(source, n + 1, "ids must be dense and ordered"));
            }
            if id == 0 && cols[0] != EMPTY_PATH {
                return Err(Error::parse(source, n + 1, "id 0 must be the empty path"));
            }
            entries.push((cols[0].to_string(), count));
        }
        if entries.is_empty() {
            return Err(Error::Data(format!("{source}: empty lexicon")));
        }
        Ok(PathLexicon::from_counts(entries.into_iter().skip(1)))
    }
}

pub const DEFAULT_MIN_PATH_COUNT: u64 = 5;
pub const DEFAULT_LEXICON_CAP: usize = 30_000;

/// Drops triples whose path occurs fewer than `min_path_count` times in the
/// corpus, then ranks surviving paths by count (ties lexicographic) and keeps
/// the top `lexicon_cap` as the lexicon.
///
/// The returned store still holds triples whose path missed the cap; they
/// remain available as classifier evidence.
pub fn prune(
    store: &TripleStore,
    min_path_count: u64,
    lexicon_cap: usize,
) -> (TripleStore, PathLexicon) {
    let totals = store.path_totals();
    let mut pruned = TripleStore::new();
    for (w1, w2, p, c) in store.iter() {
        if totals[p] >= min_path_count {
            pruned.add(w1, w2, p, c);
        }
    }
    let mut ranked: Vec<(&str, u64)> = totals
        .into_iter()
        .filter(|&(_, c)| c >= min_path_count)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(lexicon_cap);
    (pruned, PathLexicon::from_counts(ranked))
}
