use rand::Rng;

use crate::corpus::EmbeddingTable;
use crate::error::Result;
use crate::neural::tensor::axpy;
use crate::neural::{Adam, LstmStack, LstmTrace};

use super::edge::{EdgeEmbedder, EdgeMasks, EncodedPath, EDGE_DIM};

pub const PATH_LAYERS: usize = 2;
pub const PATH_DIM: usize = 60;

/// Edge embeddings fed through a stacked LSTM; the path vector is the
/// final top-layer hidden state.
#[derive(Clone, Debug)]
pub struct PathEncoder {
    pub embedder: EdgeEmbedder,
    pub lstm: LstmStack,
}

/// Forward state of one path encoding.
#[derive(Clone, Debug)]
pub struct PathTrace {
    pub masks: Option<EdgeMasks>,
    pub trace: LstmTrace,
}

impl PathTrace {
    pub fn output(&self) -> &[f64] {
        self.trace.output()
    }
}

impl PathEncoder {
    /// Draws the embedder tables, then the LSTM.
    pub fn new<'a, I, R>(paths: I, pretrained: Option<&EmbeddingTable>, rng: &mut R) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
        R: Rng,
    {
        let embedder = EdgeEmbedder::build(paths, pretrained, rng)?;
        let lstm = LstmStack::new(PATH_LAYERS, EDGE_DIM, PATH_DIM, rng);
        Ok(PathEncoder { embedder, lstm })
    }

    pub fn dim(&self) -> usize {
        self.lstm.hidden_dim()
    }

    /// Runs the LSTM from the zero state over the (masked) edge vectors.
    pub fn forward(&self, path: &EncodedPath, masks: Option<EdgeMasks>) -> Result<PathTrace> {
        let inputs = self.embedder.embed(path, masks.as_ref());
        let trace = self.lstm.forward(&inputs)?;
        Ok(PathTrace { masks, trace })
    }

    /// Backpropagates `d_out` into the LSTM and the component tables.
    pub fn backward(&mut self, path: &EncodedPath, trace: &PathTrace, d_out: &[f64]) {
        let d_edges = self.lstm.backward(&trace.trace, d_out);
        self.embedder.backward(path, trace.masks.as_ref(), &d_edges);
    }

    /// Evaluation-mode path vector `o_p` for a path string.
    pub fn encode_path(&self, path: &str) -> Result<Vec<f64>> {
        Ok(self
            .forward(&self.embedder.encode_ids(path), None)?
            .output()
            .to_vec())
    }

    /// Frequency-weighted mean of the evaluation-mode path vectors.
    pub fn aggregate_paths(&self, paths: &[(String, f64)]) -> Result<Vec<f64>> {
        let vectors = paths
            .iter()
            .map(|(p, _)| self.encode_path(p))
            .collect::<Result<Vec<_>>>()?;
        let weights = normalized_weights(paths.iter().map(|(_, f)| *f));
        Ok(weighted_sum(vectors.iter().map(Vec::as_slice), &weights, self.dim()))
    }

    pub fn zero_grad(&mut self) {
        self.embedder.zero_grad();
        self.lstm.zero_grad();
    }

    pub fn step(&mut self, adam: &Adam) -> Result<()> {
        self.embedder.step(adam)?;
        self.lstm.step_all(adam)
    }
}

/// `f_i / Σ f`. Normalizing first makes exact rescalings of the
/// frequencies leave the mean bit-identical.
pub fn normalized_weights<I: IntoIterator<Item = f64>>(freqs: I) -> Vec<f64> {
    let f: Vec<f64> = freqs.into_iter().collect();
    let total: f64 = f.iter().sum();
    f.iter().map(|x| x / total).collect()
}

pub fn weighted_sum<'a, I>(vectors: I, weights: &[f64], dim: usize) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = vec![0.0; dim];
    for (v, &w) in vectors.into_iter().zip(weights) {
        axpy(w, v, &mut out);
    }
    out
}
