use rand::Rng;

use crate::error::{Error, Result};

use super::tensor::Tensor;

pub fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dropout rate {rate} outside [0, 1)"
        )))
    }
}

/// Inverted-dropout mask: entries are `0` with probability `rate`, else `1/(1-rate)`.
///
/// A zero rate returns the all-ones mask without touching the generator.
pub fn dropout_mask<R: Rng>(shape: &[usize], rate: f64, rng: &mut R) -> Result<Tensor> {
    check_rate(rate)?;
    let mut mask = Tensor::zeros(shape);
    fill_mask(mask.data_mut(), rate, rng);
    Ok(mask)
}

pub(crate) fn fill_mask<R: Rng>(out: &mut [f64], rate: f64, rng: &mut R) {
    if rate == 0.0 {
        out.iter_mut().for_each(|m| *m = 1.0);
        return;
    }
    let keep = 1.0 / (1.0 - rate);
    for m in out.iter_mut() {
        *m = if rng.gen::<f64>() < rate { 0.0 } else { keep };
    }
}
