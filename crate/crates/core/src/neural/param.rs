use crate::error::{Error, Result};

use super::tensor::Tensor;

/// A trainable tensor together with its gradient and Adam moment estimates.
#[derive(Clone, Debug)]
pub struct Parameter {
    pub value: Tensor,
    pub grad: Tensor,
    adam_m: Tensor,
    adam_v: Tensor,
    step_count: u64,
}

impl Parameter {
    pub fn new(value: Tensor) -> Self {
        let shape = value.shape().to_vec();
        Parameter {
            value,
            grad: Tensor::zeros(&shape),
            adam_m: Tensor::zeros(&shape),
            adam_v: Tensor::zeros(&shape),
            step_count: 0,
        }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Parameter::new(Tensor::zeros(shape))
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam step on `p`, then zero its gradient.
    ///
    /// The gradient is checked before anything is modified, so a non-finite
    /// gradient leaves the parameter untouched.
    pub fn update(&self, p: &mut Parameter) -> Result<()> {
        if !p.grad.is_finite() {
            return Err(Error::NonFinite("gradient passed to adam_update".into()));
        }
        p.step_count += 1;
        let t = p.step_count as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        let value = p.value.data_mut();
        let grad = p.grad.data();
        let m = p.adam_m.data_mut();
        let v = p.adam_v.data_mut();
        for i in 0..value.len() {
            let g = grad[i];
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            value[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        p.zero_grad();
        Ok(())
    }
}

impl Default for Adam {
    fn default() -> Self {
        Adam::new(0.001)
    }
}

/// Free-function form of [`Adam::update`].
pub fn adam_update(p: &mut Parameter, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
    Adam {
        lr,
        beta1,
        beta2,
        eps,
    }
    .update(p)
}
