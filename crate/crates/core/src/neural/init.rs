//! Parameter initialization and the run-wide random number generator.
//!
//! Every training run owns exactly one generator, created from the run seed.
//! Draws happen in a fixed order: parameter initialization (in construction
//! order), then per-epoch shuffling, then dropout masks, then negative
//! samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;

pub type RunRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform<R: Rng>(shape: &[usize], bound: f64, rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    Tensor::new(shape.to_vec(), data).expect("uniform init produces finite values")
}

/// Glorot/Xavier uniform for a `[rows, cols]` weight matrix.
pub fn xavier_uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    uniform(&[rows, cols], bound, rng)
}

/// Embedding tables: uniform in `[-0.5/dim, 0.5/dim]`.
pub fn embedding_uniform<R: Rng>(rows: usize, dim: usize, rng: &mut R) -> Tensor {
    uniform(&[rows, dim], 0.5 / dim as f64, rng)
}
