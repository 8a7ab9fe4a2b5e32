use crate::error::Result;
use crate::pairpath::PairPathModel;
use crate::paths::{paths_for_pair, PathSet, TripleStore};

/// Corpus paths of `(w1, w2)` followed by the `2k` predicted paths, each
/// with weight 1. The empty-path entry of a pair without corpus paths is
/// kept, and predicted paths are appended even when they already occur.
pub fn augmented_paths(
    store: &TripleStore,
    model: &PairPathModel,
    w1: &str,
    w2: &str,
    k: usize,
) -> Result<PathSet> {
    let mut set = paths_for_pair(store, w1, w2);
    for (p, _) in model.predict_top_paths(w1, w2, k)? {
        set.push((p, 1.0));
    }
    Ok(set)
}

/// [`augmented_paths`] for every pair, co-occurring or not.
pub fn augment<'a, I>(store: &TripleStore, model: &PairPathModel, pairs: I, k: usize) -> Result<Vec<PathSet>>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    pairs
        .into_iter()
        .map(|(w1, w2)| augmented_paths(store, model, w1, w2, k))
        .collect()
}
