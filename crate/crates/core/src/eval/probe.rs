//! Linear probe: multinomial logistic regression on fixed pair vectors.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{seeded, softmax_cross_entropy, Adam, Linear, Tensor};

use super::metrics::argmax;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epochs: 200,
            minibatch: 100,
            lr: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearProbe {
    pub layer: Linear,
}

fn stack(features: &[Vec<f64>], rows: &[usize]) -> Result<Tensor> {
    let picked: Vec<Vec<f64>> = rows.iter().map(|&i| features[i].clone()).collect();
    Tensor::from_rows(&picked)
}

impl LinearProbe {
    /// Fits weights and biases by minibatch Adam on the mean cross-entropy.
    pub fn fit(features: &[Vec<f64>], labels: &[usize], classes: usize, cfg: &ProbeConfig) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows for {} labels",
                features.len(),
                labels.len()
            )));
        }
        if cfg.epochs == 0 || cfg.minibatch == 0 {
            return Err(Error::InvalidArgument("epochs and minibatch must be positive".into()));
        }
        let mut rng = seeded(cfg.seed);
        let mut layer = Linear::new(features[0].len(), classes, &mut rng);
        let adam = Adam::new(cfg.lr);
        let mut order: Vec<usize> = (0..features.len()).collect();
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.minibatch) {
                let x = stack(features, batch)?;
                let y: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
                let (_, dlogits) = softmax_cross_entropy(&layer.forward(&x)?, &y)?;
                layer.zero_grad();
                layer.backward(&x, &dlogits)?;
                layer.step(&adam)?;
            }
        }
        Ok(LinearProbe { layer })
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<usize>> {
        let all: Vec<usize> = (0..features.len()).collect();
        let logits = self.layer.forward(&stack(features, &all)?)?;
        Ok((0..logits.rows()).map(|i| argmax(logits.row(i))).collect())
    }

    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
        let pred = self.predict(features)?;
        let hits = pred.iter().zip(labels).filter(|(p, g)| p == g).count();
        Ok(hits as f64 / labels.len().max(1) as f64)
    }
}
