use rand::Rng;

use crate::corpus::{EmbeddingTable, Vocabulary};
use crate::error::{Error, Result};
use crate::neural::dropout::{check_rate, fill_mask};
use crate::neural::{init, Adam, Parameter, Tensor};

pub const LEMMA_DIM: usize = 50;
pub const POS_DIM: usize = 4;
pub const DEPREL_DIM: usize = 5;
pub const DIRECTION_DIM: usize = 1;
pub const EDGE_DIM: usize = LEMMA_DIM + POS_DIM + DEPREL_DIM + DIRECTION_DIM;

/// Component unknown tokens. The empty path consists of exactly these, so it
/// maps to id 0 in every table.
pub const COMPONENT_UNK: [&str; 4] = ["UNK-lemma", "UNK-POS", "UNK-dep", "UNK-dir"];
const DIMS: [usize; 4] = [LEMMA_DIM, POS_DIM, DEPREL_DIM, DIRECTION_DIM];
/// Bound for lemma rows without a pretrained vector.
const LEMMA_INIT_BOUND: f64 = 0.01;

/// Lemma, POS, dependency label and direction ids of one edge.
pub type EdgeIds = [usize; 4];
pub type EncodedPath = Vec<EdgeIds>;
/// One dropout multiplier per component of each edge.
pub type EdgeMasks = Vec<[f64; 4]>;

/// Splits `lemma/POS/deprel/dir`; the lemma may itself contain slashes.
pub fn split_edge(edge: &str) -> Option<[&str; 4]> {
    let mut it = edge.rsplitn(4, '/');
    let dir = it.next()?;
    let dep = it.next()?;
    let pos = it.next()?;
    let lemma = it.next()?;
    Some([lemma, pos, dep, dir])
}

/// Component embedding tables producing the 60-dimensional edge vectors.
#[derive(Clone, Debug)]
pub struct EdgeEmbedder {
    pub vocabs: [Vocabulary; 4],
    pub tables: [Parameter; 4],
}

impl EdgeEmbedder {
    /// Vocabularies from the components of `paths`, in first-seen order.
    ///
    /// Lemma rows copy `pretrained` where the lemma is known and are uniform
    /// in `[-0.01, 0.01]` otherwise; the other tables use the embedding
    /// initializer. Tables are drawn lemma, POS, deprel, direction.
    pub fn build<'a, I, R>(paths: I, pretrained: Option<&EmbeddingTable>, rng: &mut R) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
        R: Rng,
    {
        if let Some(p) = pretrained {
            if p.dim() != LEMMA_DIM {
                return Err(Error::shape(&[p.dim()], &[LEMMA_DIM]));
            }
        }
        let mut vocabs = COMPONENT_UNK.map(Vocabulary::new);
        for path in paths {
            for edge in path.split(' ') {
                let parts = split_edge(edge)
                    .ok_or_else(|| Error::InvalidArgument(format!("malformed path edge {edge:?}")))?;
                for (v, part) in vocabs.iter_mut().zip(parts) {
                    v.insert(part);
                }
            }
        }
        let mut lemma = Tensor::zeros(&[vocabs[0].len(), LEMMA_DIM]);
        for id in 0..vocabs[0].len() {
            let known = pretrained.and_then(|p| {
                p.vocab
                    .get(vocabs[0].token(id))
                    .filter(|&i| i != 0)
                    .map(|i| p.row(i))
            });
            let row = lemma.row_mut(id);
            match known {
                Some(v) => row.copy_from_slice(v),
                None => row
                    .iter_mut()
                    .for_each(|x| *x = rng.gen_range(-LEMMA_INIT_BOUND..=LEMMA_INIT_BOUND)),
            }
        }
        let pos = init::embedding_uniform(vocabs[1].len(), POS_DIM, rng);
        let dep = init::embedding_uniform(vocabs[2].len(), DEPREL_DIM, rng);
        let dir = init::embedding_uniform(vocabs[3].len(), DIRECTION_DIM, rng);
        Ok(EdgeEmbedder {
            vocabs,
            tables: [lemma, pos, dep, dir].map(Parameter::new),
        })
    }

    pub fn from_parts(vocabs: [Vocabulary; 4], tables: [Tensor; 4]) -> Result<Self> {
        for ((v, t), d) in vocabs.iter().zip(&tables).zip(DIMS) {
            if t.shape() != [v.len(), d] {
                return Err(Error::shape(t.shape(), &[v.len(), d]));
            }
        }
        Ok(EdgeEmbedder {
            vocabs,
            tables: tables.map(Parameter::new),
        })
    }

    /// Component ids of a path string; unknown components map to 0.
    pub fn encode_ids(&self, path: &str) -> EncodedPath {
        path.split(' ')
            .map(|edge| match split_edge(edge) {
                Some(parts) => {
                    let mut ids = [0; 4];
                    for (k, part) in parts.iter().enumerate() {
                        ids[k] = self.vocabs[k].lookup(part);
                    }
                    ids
                }
                None => [0; 4],
            })
            .collect()
    }

    /// Draws component masks for `len` edges, lemma first within each edge.
    pub fn draw_masks<R: Rng>(len: usize, rate: f64, rng: &mut R) -> Result<EdgeMasks> {
        check_rate(rate)?;
        let mut masks = vec![[1.0; 4]; len];
        for m in masks.iter_mut() {
            fill_mask(m, rate, rng);
        }
        Ok(masks)
    }

    /// Edge vectors `[v_lemma; v_pos; v_dep; v_dir]`, masked per component.
    pub fn embed(&self, path: &EncodedPath, masks: Option<&EdgeMasks>) -> Vec<Vec<f64>> {
        path.iter()
            .enumerate()
            .map(|(t, ids)| {
                let mut e = Vec::with_capacity(EDGE_DIM);
                for k in 0..4 {
                    let row = self.tables[k].value.row(ids[k]);
                    match masks {
                        Some(m) => e.extend(row.iter().map(|v| v * m[t][k])),
                        None => e.extend_from_slice(row),
                    }
                }
                e
            })
            .collect()
    }

    /// Accumulates table gradients from the gradients of the edge vectors.
    pub fn backward(&mut self, path: &EncodedPath, masks: Option<&EdgeMasks>, d_edges: &[Vec<f64>]) {
        for (t, (ids, de)) in path.iter().zip(d_edges).enumerate() {
            let mut offset = 0;
            for k in 0..4 {
                let scale = masks.map_or(1.0, |m| m[t][k]);
                if scale != 0.0 {
                    let g = self.tables[k].grad.row_mut(ids[k]);
                    for (gi, &d) in g.iter_mut().zip(&de[offset..offset + DIMS[k]]) {
                        *gi += scale * d;
                    }
                }
                offset += DIMS[k];
            }
        }
    }

    pub fn zero_grad(&mut self) {
        self.tables.iter_mut().for_each(Parameter::zero_grad);
    }

    pub fn step(&mut self, adam: &Adam) -> Result<()> {
        for t in self.tables.iter_mut() {
            adam.update(t)?;
        }
        Ok(())
    }
}
