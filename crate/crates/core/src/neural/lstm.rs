//! Stacked LSTM with full backpropagation through time.
//!
//! Each layer keeps one fused weight matrix `[4H, I + H]` acting on the
//! concatenation `[x_t; h_{t-1}]`, with gate blocks ordered input, forget,
//! output, candidate.

use rand::Rng;

use crate::error::{Error, Result};

use super::init;
use super::param::{Adam, Parameter};
use super::tensor::{axpy, dot, sigmoid};

#[derive(Clone, Debug)]
pub struct LstmLayer {
    pub weight: Parameter,
    pub bias: Parameter,
    input_dim: usize,
    hidden_dim: usize,
}

impl LstmLayer {
    fn new<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        LstmLayer {
            weight: Parameter::new(init::xavier_uniform(
                4 * hidden_dim,
                input_dim + hidden_dim,
                rng,
            )),
            bias: Parameter::zeros(&[4 * hidden_dim]),
            input_dim,
            hidden_dim,
        }
    }

    fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmLayer {
            weight: Parameter::zeros(&[4 * hidden_dim, input_dim + hidden_dim]),
            bias: Parameter::zeros(&[4 * hidden_dim]),
            input_dim,
            hidden_dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let hd = self.hidden_dim;
        let mut x_cat = Vec::with_capacity(self.input_dim + hd);
        x_cat.extend_from_slice(x);
        x_cat.extend_from_slice(h_prev);
        let b = self.bias.value.data();
        let mut gates = vec![0.0; 4 * hd];
        for (r, g) in gates.iter_mut().enumerate() {
            let a = dot(self.weight.value.row(r), &x_cat) + b[r];
            *g = if r < 3 * hd { sigmoid(a) } else { a.tanh() };
        }
        let mut c = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        for k in 0..hd {
            let (i, f, o, g) = (gates[k], gates[hd + k], gates[2 * hd + k], gates[3 * hd + k]);
            c[k] = f * c_prev[k] + i * g;
            tanh_c[k] = c[k].tanh();
            h[k] = o * tanh_c[k];
        }
        StepCache {
            x_cat,
            gates,
            c_prev: c_prev.to_vec(),
            c,
            tanh_c,
            h,
        }
    }
}

#[derive(Clone, Debug)]
struct StepCache {
    x_cat: Vec<f64>,
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Per-layer hidden and cell states.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl LstmState {
    /// Hidden state of the top layer.
    pub fn top(&self) -> &[f64] {
        self.h.last().expect("at least one layer")
    }
}

/// Cached activations of one forward pass, consumed by [`LstmStack::backward`].
#[derive(Clone, Debug)]
pub struct LstmTrace {
    steps: Vec<Vec<StepCache>>,
}

impl LstmTrace {
    /// Final top-layer hidden state.
    pub fn output(&self) -> &[f64] {
        &self.steps.last().unwrap().last().unwrap().h
    }

    pub fn len(&self) -> usize {
        self.steps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct LstmStack {
    pub layers: Vec<LstmLayer>,
}

impl LstmStack {
    pub fn new<R: Rng>(num_layers: usize, input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        assert!(num_layers >= 1);
        let layers = (0..num_layers)
            .map(|l| LstmLayer::new(if l == 0 { input_dim } else { hidden_dim }, hidden_dim, rng))
            .collect();
        LstmStack { layers }
    }

    pub fn zeros(num_layers: usize, input_dim: usize, hidden_dim: usize) -> Self {
        assert!(num_layers >= 1);
        let layers = (0..num_layers)
            .map(|l| LstmLayer::zeros(if l == 0 { input_dim } else { hidden_dim }, hidden_dim))
            .collect();
        LstmStack { layers }
    }

    /// Rebuilds a stack from per-layer `(weight, bias)` parameters.
    pub fn from_layers(parts: Vec<(Parameter, Parameter)>) -> Result<Self> {
        let mut layers = Vec::with_capacity(parts.len());
        let mut expected_in = None;
        for (weight, bias) in parts {
            let shape = weight.shape().to_vec();
            if shape.len() != 2 || shape[0] % 4 != 0 || bias.shape() != [shape[0]] {
                return Err(Error::shape(&shape, bias.shape()));
            }
            let hidden_dim = shape[0] / 4;
            if shape[1] <= hidden_dim {
                return Err(Error::shape(&shape, &[hidden_dim]));
            }
            let input_dim = shape[1] - hidden_dim;
            if let Some(e) = expected_in {
                if e != input_dim {
                    return Err(Error::shape(&[e], &[input_dim]));
                }
            }
            expected_in = Some(hidden_dim);
            layers.push(LstmLayer {
                weight,
                bias,
                input_dim,
                hidden_dim,
            });
        }
        if layers.is_empty() {
            return Err(Error::InvalidArgument("LSTM needs at least one layer".into()));
        }
        Ok(LstmStack { layers })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].hidden_dim
    }

    pub fn zero_state(&self) -> LstmState {
        let h = vec![vec![0.0; self.hidden_dim()]; self.num_layers()];
        LstmState { h: h.clone(), c: h }
    }

    /// One time step through every layer.
    pub fn step(&self, state: &LstmState, input: &[f64]) -> Result<LstmState> {
        if input.len() != self.input_dim() {
            return Err(Error::shape(&[input.len()], &[self.input_dim()]));
        }
        if state.h.len() != self.num_layers() || state.c.len() != self.num_layers() {
            return Err(Error::shape(&[state.h.len()], &[self.num_layers()]));
        }
        for (h, c) in state.h.iter().zip(&state.c) {
            if h.len() != self.hidden_dim() || c.len() != self.hidden_dim() {
                return Err(Error::shape(&[h.len(), c.len()], &[self.hidden_dim()]));
            }
        }
        let mut next = LstmState {
            h: Vec::with_capacity(self.num_layers()),
            c: Vec::with_capacity(self.num_layers()),
        };
        let mut x = input.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let cache = layer.step(&x, &state.h[l], &state.c[l]);
            x = cache.h.clone();
            next.h.push(cache.h);
            next.c.push(cache.c);
        }
        Ok(next)
    }

    /// Runs the whole sequence from the zero state, caching for backprop.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<LstmTrace> {
        if inputs.is_empty() {
            return Err(Error::InvalidArgument("empty LSTM input sequence".into()));
        }
        if let Some(bad) = inputs.iter().find(|x| x.len() != self.input_dim()) {
            return Err(Error::shape(&[bad.len()], &[self.input_dim()]));
        }
        let hd = self.hidden_dim();
        let mut steps = Vec::with_capacity(self.num_layers());
        let mut layer_inputs: Vec<Vec<f64>> = inputs.to_vec();
        for layer in &self.layers {
            let mut h = vec![0.0; hd];
            let mut c = vec![0.0; hd];
            let mut caches = Vec::with_capacity(inputs.len());
            for x in &layer_inputs {
                let cache = layer.step(x, &h, &c);
                h.clone_from(&cache.h);
                c.clone_from(&cache.c);
                caches.push(cache);
            }
            layer_inputs = caches.iter().map(|s| s.h.clone()).collect();
            steps.push(caches);
        }
        Ok(LstmTrace { steps })
    }

    /// Backpropagates `d_out` (gradient w.r.t. the final top hidden state).
    ///
    /// Accumulates weight gradients and returns the gradient for every input.
    pub fn backward(&mut self, trace: &LstmTrace, d_out: &[f64]) -> Vec<Vec<f64>> {
        let t_len = trace.len();
        let hd = self.hidden_dim();
        let mut dh_in = vec![vec![0.0; hd]; t_len];
        dh_in[t_len - 1].copy_from_slice(d_out);
        for (l, layer) in self.layers.iter_mut().enumerate().rev() {
            let caches = &trace.steps[l];
            let in_dim = layer.input_dim;
            let mut dx_all = vec![vec![0.0; in_dim]; t_len];
            let mut dh_next = vec![0.0; hd];
            let mut dc_next = vec![0.0; hd];
            let mut da = vec![0.0; 4 * hd];
            for t in (0..t_len).rev() {
                let s = &caches[t];
                for k in 0..hd {
                    let (i, f, o, g) =
                        (s.gates[k], s.gates[hd + k], s.gates[2 * hd + k], s.gates[3 * hd + k]);
                    let dh = dh_in[t][k] + dh_next[k];
                    let tc = s.tanh_c[k];
                    let d_o = dh * tc;
                    let dc = dh * o * (1.0 - tc * tc) + dc_next[k];
                    let d_i = dc * g;
                    let d_g = dc * i;
                    let d_f = dc * s.c_prev[k];
                    dc_next[k] = dc * f;
                    da[k] = d_i * i * (1.0 - i);
                    da[hd + k] = d_f * f * (1.0 - f);
                    da[2 * hd + k] = d_o * o * (1.0 - o);
                    da[3 * hd + k] = d_g * (1.0 - g * g);
                }
                let mut dx_cat = vec![0.0; in_dim + hd];
                for (r, &g) in da.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    axpy(g, &s.x_cat, layer.weight.grad.row_mut(r));
                    layer.bias.grad.data_mut()[r] += g;
                    axpy(g, layer.weight.value.row(r), &mut dx_cat);
                }
                dx_all[t].copy_from_slice(&dx_cat[..in_dim]);
                dh_next.copy_from_slice(&dx_cat[in_dim..]);
            }
            dh_in = dx_all;
        }
        dh_in
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
    }

    pub fn zero_grad(&mut self) {
        self.parameters_mut().for_each(Parameter::zero_grad);
    }

    pub fn step_all(&mut self, adam: &Adam) -> Result<()> {
        for p in self.parameters_mut() {
            adam.update(p)?;
        }
        Ok(())
    }
}
