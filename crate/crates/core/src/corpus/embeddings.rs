use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::neural::Tensor;

use super::vocab::{Vocabulary, UNK};

/// Word vectors indexed through a [`Vocabulary`]; row 0 is the unknown word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub vocab: Vocabulary,
    pub matrix: Tensor,
    pub trainable: bool,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, matrix: Tensor, trainable: bool) -> Result<Self> {
        if matrix.shape().len() != 2 || matrix.rows() != vocab.len() {
            return Err(Error::shape(matrix.shape(), &[vocab.len()]));
        }
        Ok(EmbeddingTable {
            vocab,
            matrix,
            trainable,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        self.matrix.row(id)
    }

    /// Vector of `word`, the unknown row when absent.
    pub fn lookup(&self, word: &str) -> &[f64] {
        self.matrix.row(self.vocab.lookup(word))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains(word)
    }

    /// Copy restricted to `words` that exist in the table; the unknown row is kept.
    pub fn subset<'a, I>(&self, words: I) -> EmbeddingTable
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut vocab = Vocabulary::new(self.vocab.unk());
        let mut rows = vec![self.row(0).to_vec()];
        for w in words {
            if let Some(id) = self.vocab.get(w) {
                if !vocab.contains(w) {
                    vocab.insert(w);
                    rows.push(self.row(id).to_vec());
                }
            }
        }
        let matrix = Tensor::from_rows(&rows).expect("rows share the table width");
        EmbeddingTable {
            vocab,
            matrix,
            trainable: self.trainable,
        }
    }

    /// Text format: `word v1 ... vD` per line, unknown row excluded.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        for id in 1..self.len() {
            write!(w, "{}", self.vocab.token(id))?;
            for v in self.row(id) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmbeddingLoadStats {
    pub loaded: usize,
    pub duplicates: usize,
}

/// Parses whitespace-separated word vectors.
///
/// The dimension is taken from `expected_dim` or from the first line. The
/// unknown row is the componentwise mean of all loaded vectors. For repeated
/// words the first vector wins.
pub fn read_embeddings<R: BufRead>(
    reader: R,
    expected_dim: Option<usize>,
    source: &str,
) -> Result<(EmbeddingTable, EmbeddingLoadStats)> {
    let mut dim = expected_dim;
    let mut vocab = Vocabulary::new(UNK);
    let mut data: Vec<f64> = Vec::new();
    let mut stats = EmbeddingLoadStats::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        let d = *dim.get_or_insert(values.len());
        if values.len() != d || d == 0 {
            return Err(Error::parse(
                source,
                n + 1,
                format!("expected {d} floats, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(source, n + 1, "non-finite value"));
        }
        if vocab.contains(word) {
            stats.duplicates += 1;
            continue;
        }
        vocab.insert(word);
        if data.is_empty() {
            data.resize(d, 0.0);
        }
        data.extend_from_slice(&values);
        stats.loaded += 1;
    }
    let Some(d) = dim.filter(|_| stats.loaded > 0) else {
        return Err(Error::Data(format!("{source}: no vectors found")));
    };
    let count = stats.loaded as f64;
    for k in 0..d {
        let sum: f64 = (1..=stats.loaded).map(|r| data[r * d + k]).sum();
        data[k] = sum / count;
    }
    let matrix = Tensor::new(vec![vocab.len(), d], data)?;
    Ok((EmbeddingTable::new(vocab, matrix, false)?, stats))
}

pub fn load_embeddings(path: &Path, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let (table, _) = read_embeddings(BufReader::new(file), expected_dim, &path.display().to_string())?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "dog 1 2 3 4\ncat 0 0 1 1\nfish -1 2 0.5 0\n";

    #[test]
    fn counts_and_unk_mean() {
        let (t, stats) = read_embeddings(THREE.as_bytes(), Some(4), "mem").unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(stats.loaded, 3);
        let expected = [0.0, 4.0 / 3.0, 4.5 / 3.0, 5.0 / 3.0];
        for (a, b) in t.row(0).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(t.lookup("whale"), t.row(0));
        assert_eq!(t.lookup("cat"), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn wrong_width_reports_line() {
        let err = read_embeddings("a 1 2\nb 1 2 3\n".as_bytes(), None, "vec.txt").unwrap_err();
        assert!(err.to_string().starts_with("vec.txt:2:"), "{err}");
    }

    #[test]
    fn duplicates_first_wins() {
        let (t, stats) = read_embeddings("a 1\na 2\nb 3\n".as_bytes(), None, "mem").unwrap();
        assert_eq!(stats.duplicates, 1);
        assert_eq!(t.lookup("a"), &[1.0]);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(read_embeddings("".as_bytes(), Some(3), "mem").is_err());
    }

    #[test]
    fn subset_keeps_unk_row() {
        let (t, _) = read_embeddings(THREE.as_bytes(), Some(4), "mem").unwrap();
        let s = t.subset(["fish", "nope", "dog"]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.row(0), t.row(0));
        assert_eq!(s.lookup("fish"), t.lookup("fish"));
    }
}
