use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Mean negative log-likelihood over `n` rows of `logits: [n, C]`.
///
/// Returns the loss and `dL/dlogits = (softmax - onehot) / n`.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    if logits.shape().len() != 2 || logits.rows() != labels.len() {
        return Err(Error::shape(logits.shape(), &[labels.len()]));
    }
    let n = labels.len();
    let classes = logits.cols();
    let mut grad = Tensor::zeros(logits.shape());
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::InvalidArgument(format!(
                "label {y} out of range for {classes} classes"
            )));
        }
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
        loss += log_z - row[y];
        let g = grad.row_mut(i);
        for (k, gk) in g.iter_mut().enumerate() {
            let p = (row[k] - log_z).exp();
            *gk = (p - if k == y { 1.0 } else { 0.0 }) / n as f64;
        }
    }
    let loss = loss / n as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite("softmax cross-entropy loss".into()));
    }
    Ok((loss, grad))
}
