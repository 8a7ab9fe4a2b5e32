use rand::Rng;

use crate::error::{Error, Result};

use super::init;
use super::param::{Adam, Parameter};
use super::tensor::{axpy, dot, Tensor};

/// Affine map `x -> W x + b` with `W: [d_out, d_in]`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub weight: Parameter,
    pub bias: Parameter,
}

impl Linear {
    pub fn new<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        Linear {
            weight: Parameter::new(init::xavier_uniform(d_out, d_in, rng)),
            bias: Parameter::zeros(&[d_out]),
        }
    }

    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Linear {
            weight: Parameter::zeros(&[d_out, d_in]),
            bias: Parameter::zeros(&[d_out]),
        }
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        if weight.shape().len() != 2 || bias.shape() != [weight.rows()] {
            return Err(Error::shape(weight.shape(), bias.shape()));
        }
        Ok(Linear {
            weight: Parameter::new(weight),
            bias: Parameter::new(bias),
        })
    }

    pub fn d_in(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn d_out(&self) -> usize {
        self.weight.shape()[0]
    }

    /// Single-row forward pass.
    pub fn forward_row(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.d_in());
        let w = &self.weight.value;
        let b = self.bias.value.data();
        (0..self.d_out()).map(|o| dot(w.row(o), x) + b[o]).collect()
    }

    /// Accumulates `dW`, `db` for one row and returns `dx`.
    pub fn backward_row(&mut self, x: &[f64], dout: &[f64]) -> Vec<f64> {
        let d_in = self.d_in();
        let mut dx = vec![0.0; d_in];
        for (o, &g) in dout.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            axpy(g, x, self.weight.grad.row_mut(o));
            self.bias.grad.data_mut()[o] += g;
            axpy(g, self.weight.value.row(o), &mut dx);
        }
        dx
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        affine(x, &self.weight, &self.bias)
    }

    pub fn backward(&mut self, x: &Tensor, dout: &Tensor) -> Result<Tensor> {
        affine_backward(x, &mut self.weight, &mut self.bias, dout)
    }

    pub fn zero_grad(&mut self) {
        self.weight.zero_grad();
        self.bias.zero_grad();
    }

    pub fn step(&mut self, adam: &Adam) -> Result<()> {
        adam.update(&mut self.weight)?;
        adam.update(&mut self.bias)
    }
}

fn check_affine_shapes(x: &Tensor, w: &Parameter, b: &Parameter) -> Result<()> {
    if w.shape().len() != 2 {
        return Err(Error::shape(w.shape(), &[0, 0]));
    }
    if x.shape().len() != 2 || x.shape()[1] != w.shape()[1] {
        return Err(Error::shape(x.shape(), w.shape()));
    }
    if b.shape() != [w.shape()[0]] {
        return Err(Error::shape(b.shape(), w.shape()));
    }
    Ok(())
}

/// Batched affine map: `out[i] = W x[i] + b` for `x: [n, d_in]`.
pub fn affine(x: &Tensor, w: &Parameter, b: &Parameter) -> Result<Tensor> {
    check_affine_shapes(x, w, b)?;
    let n = x.rows();
    let d_out = w.shape()[0];
    let mut out = Vec::with_capacity(n * d_out);
    for i in 0..n {
        let xi = x.row(i);
        for o in 0..d_out {
            out.push(dot(w.value.row(o), xi) + b.value.data()[o]);
        }
    }
    Tensor::new(vec![n, d_out], out)
}

/// Backward pass of [`affine`]: accumulates into `w.grad`, `b.grad`, returns `dL/dx`.
pub fn affine_backward(
    x: &Tensor,
    w: &mut Parameter,
    b: &mut Parameter,
    dout: &Tensor,
) -> Result<Tensor> {
    check_affine_shapes(x, w, b)?;
    let d_out = w.shape()[0];
    if dout.shape() != [x.rows(), d_out] {
        return Err(Error::shape(dout.shape(), &[x.rows(), d_out]));
    }
    let d_in = w.shape()[1];
    let mut dx = Tensor::zeros(&[x.rows(), d_in]);
    for i in 0..x.rows() {
        let xi = x.row(i);
        let gi = dout.row(i);
        for (o, &g) in gi.iter().enumerate() {
            axpy(g, xi, w.grad.row_mut(o));
            b.grad.data_mut()[o] += g;
            axpy(g, w.value.row(o), dx.row_mut(i));
        }
    }
    Ok(dx)
}

pub fn tanh_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

/// Gradient through `y = tanh(a)` given `y`.
pub fn tanh_backward(y: &[f64], dy: &[f64]) -> Vec<f64> {
    y.iter().zip(dy).map(|(y, g)| g * (1.0 - y * y)).collect()
}
