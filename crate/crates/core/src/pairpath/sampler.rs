use rand::Rng;

use crate::error::{Error, Result};

/// Smoothing exponent applied to path counts.
pub const UNIGRAM_POWER: f64 = 0.75;
/// Redraws allowed when a negative equals the positive path.
pub const MAX_REDRAWS: usize = 10;

/// Draws lexicon ids with probability proportional to `count^0.75`.
/// Id 0 (the empty path) is never drawn.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts
            .iter()
            .enumerate()
            .map(|(id, &c)| if id == 0 { 0.0 } else { (c as f64).powf(UNIGRAM_POWER) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Data("negative sampler needs at least one counted path".into()));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        // pin the tail so every u in [0, 1) lands in range
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap();
        for c in &mut cumulative[last_positive..] {
            *c = 1.0;
        }
        Ok(NegativeSampler { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u)
    }

    /// A negative for `positive`, redrawn up to [`MAX_REDRAWS`] times on collision.
    pub fn sample_negative<R: Rng>(&self, positive: usize, rng: &mut R) -> usize {
        let mut id = self.sample(rng);
        for _ in 0..MAX_REDRAWS {
            if id != positive {
                break;
            }
            id = self.sample(rng);
        }
        id
    }
}
