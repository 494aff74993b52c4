use rand::RngCore;

use super::NetworkConfig;
use crate::error::{Error, Result};
use crate::seed::{self, Stage};

/// Fully connected layer; `weights` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense { n_in, n_out, weights: vec![0.0; n_in * n_out], bias: vec![0.0; n_out] }
    }

    fn affine(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.chunks_exact(self.n_in).zip(&self.bias)) {
            *o = b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }
}

pub(crate) fn elu(z: f64, alpha: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        alpha * z.exp_m1()
    }
}

pub(crate) fn elu_grad(z: f64, alpha: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        alpha * z.exp()
    }
}

/// Network weights together with the configuration they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub config: NetworkConfig,
    /// Hidden layers followed by the linear output layer.
    pub layers: Vec<Dense>,
}

impl NetworkParams {
    /// All-zero weights and biases.
    pub fn zeros(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut fan_in = config.input_dim;
        let mut layers = Vec::with_capacity(config.hidden.len() + 1);
        for &w in config.hidden.iter().chain(std::iter::once(&1)) {
            layers.push(Dense::zeros(fan_in, w));
            fan_in = w;
        }
        Ok(NetworkParams { config: config.clone(), layers })
    }

    /// He-uniform initialization: weights `U(−√(6/fan_in), √(6/fan_in))`,
    /// biases zero. The stream is derived from `seed` under [`Stage::Init`].
    pub fn init(config: &NetworkConfig, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        let mut rng = seed::stream(seed::derive_seed(seed, Stage::Init, 0));
        for layer in &mut params.layers {
            let limit = (6.0 / layer.n_in as f64).sqrt();
            for w in &mut layer.weights {
                *w = limit * (2.0 * seed::uniform(&mut rng) - 1.0);
            }
        }
        Ok(params)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.params().all(|p| p.is_finite()))
    }

    fn hidden(&self) -> &[Dense] {
        &self.layers[..self.layers.len() - 1]
    }

    fn output(&self) -> &Dense {
        self.layers.last().expect("network has an output layer")
    }

    /// Applies dropout in place to the activations of the designated layer,
    /// drawing one uniform per unit in unit order.
    pub(crate) fn apply_dropout<R: RngCore + ?Sized>(&self, act: &mut [f64], rng: &mut R) {
        let rate = self.config.dropout_rate;
        let scale = 1.0 / (1.0 - rate);
        for a in act.iter_mut() {
            if seed::uniform(rng) < rate {
                *a = 0.0;
            } else {
                *a *= scale;
            }
        }
    }

    /// Hidden activations up to and including the dropout layer, before any
    /// mask is applied.
    pub(crate) fn forward_prefix(&self, x: &[f64]) -> Vec<f64> {
        let alpha = self.config.elu_alpha;
        let mut act = x.to_vec();
        for layer in &self.hidden()[..=self.config.dropout_after] {
            let mut z = vec![0.0; layer.n_out];
            layer.affine(&act, &mut z);
            z.iter_mut().for_each(|v| *v = elu(*v, alpha));
            act = z;
        }
        act
    }

    /// Layers after the dropout layer, ending in the linear output.
    pub(crate) fn forward_suffix(&self, mut act: Vec<f64>) -> f64 {
        let alpha = self.config.elu_alpha;
        for layer in &self.hidden()[self.config.dropout_after + 1..] {
            let mut z = vec![0.0; layer.n_out];
            layer.affine(&act, &mut z);
            z.iter_mut().for_each(|v| *v = elu(*v, alpha));
            act = z;
        }
        let mut out = [0.0];
        self.output().affine(&act, &mut out);
        out[0]
    }

    /// One forward pass on a standardized input. With `dropout_on`, units of
    /// the designated hidden layer are zeroed with the configured rate and
    /// survivors scaled by `1/(1 − rate)`.
    pub fn forward<R: RngCore + ?Sized>(&self, x: &[f64], dropout_on: bool, rng: &mut R) -> f64 {
        debug_assert_eq!(x.len(), self.config.input_dim);
        let mut act = self.forward_prefix(x);
        if dropout_on {
            self.apply_dropout(&mut act, rng);
        }
        self.forward_suffix(act)
    }

    /// Mean squared error over `(inputs, targets)` with dropout off, and its
    /// gradient with respect to every weight and bias.
    ///
    /// `inputs` is row-major with `config.input_dim` columns.
    pub fn loss_and_grad(&self, inputs: &[f64], targets: &[f64]) -> Result<(f64, Vec<Dense>)> {
        self.batch_loss_and_grad(inputs, targets, None::<&mut seed::Stream>)
    }

    pub(crate) fn batch_loss_and_grad<R: RngCore>(
        &self,
        inputs: &[f64],
        targets: &[f64],
        mut dropout: Option<&mut R>,
    ) -> Result<(f64, Vec<Dense>)> {
        let d = self.config.input_dim;
        if inputs.len() != targets.len() * d {
            return Err(Error::LengthMismatch { left: inputs.len(), right: targets.len() * d });
        }
        if targets.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        let mut grads: Vec<Dense> = self.layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect();
        let mut scratch = Scratch::new(self);
        let scale = 2.0 / targets.len() as f64;
        let mut sse = 0.0;
        for (x, &y) in inputs.chunks_exact(d).zip(targets) {
            let y_hat = scratch.forward(self, x, dropout.as_deref_mut());
            let err = y_hat - y;
            sse += err * err;
            scratch.backward(self, x, scale * err, &mut grads);
        }
        Ok((sse / targets.len() as f64, grads))
    }
}

/// Per-sample activations kept for backpropagation.
struct Scratch {
    pre: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
    mask: Vec<f64>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    dropped: bool,
}

impl Scratch {
    fn new(net: &NetworkParams) -> Self {
        let hidden = net.hidden();
        let widest = hidden.iter().map(|l| l.n_out).chain([net.config.input_dim]).max().unwrap_or(1);
        Scratch {
            pre: hidden.iter().map(|l| vec![0.0; l.n_out]).collect(),
            act: hidden.iter().map(|l| vec![0.0; l.n_out]).collect(),
            mask: vec![1.0; hidden[net.config.dropout_after].n_out],
            delta: vec![0.0; widest],
            delta_prev: vec![0.0; widest],
            dropped: false,
        }
    }

    fn forward<R: RngCore>(&mut self, net: &NetworkParams, x: &[f64], dropout: Option<&mut R>) -> f64 {
        let alpha = net.config.elu_alpha;
        let k = net.config.dropout_after;
        let mut dropout = dropout;
        self.dropped = false;
        for (i, layer) in net.hidden().iter().enumerate() {
            let (before, rest) = self.act.split_at_mut(i);
            let input: &[f64] = if i == 0 { x } else { &before[i - 1] };
            layer.affine(input, &mut self.pre[i]);
            for (a, z) in rest[0].iter_mut().zip(&self.pre[i]) {
                *a = elu(*z, alpha);
            }
            if i == k {
                if let Some(rng) = dropout.as_deref_mut() {
                    self.dropped = true;
                    let rate = net.config.dropout_rate;
                    let scale = 1.0 / (1.0 - rate);
                    for (a, m) in rest[0].iter_mut().zip(&mut self.mask) {
                        *m = if seed::uniform(rng) < rate { 0.0 } else { scale };
                        *a *= *m;
                    }
                }
            }
        }
        let mut out = [0.0];
        net.output().affine(self.act.last().expect("hidden layer"), &mut out);
        out[0]
    }

    /// Accumulates `∂L/∂θ` for one sample given `∂L/∂ŷ`.
    fn backward(&mut self, net: &NetworkParams, x: &[f64], d_out: f64, grads: &mut [Dense]) {
        let alpha = net.config.elu_alpha;
        let n_hidden = net.hidden().len();
        let out_layer = net.output();
        let last_act = &self.act[n_hidden - 1];

        let g = &mut grads[n_hidden];
        g.bias[0] += d_out;
        for (gw, a) in g.weights.iter_mut().zip(last_act) {
            *gw += d_out * a;
        }
        let width = out_layer.n_in;
        for (dl, w) in self.delta[..width].iter_mut().zip(&out_layer.weights) {
            *dl = d_out * w;
        }

        for i in (0..n_hidden).rev() {
            let layer = &net.hidden()[i];
            let width = layer.n_out;
            if i == net.config.dropout_after && self.dropped {
                for (dl, m) in self.delta[..width].iter_mut().zip(&self.mask) {
                    *dl *= m;
                }
            }
            for (dl, z) in self.delta[..width].iter_mut().zip(&self.pre[i]) {
                *dl *= elu_grad(*z, alpha);
            }
            let input: &[f64] = if i == 0 { x } else { &self.act[i - 1] };
            let g = &mut grads[i];
            for (o, &dz) in self.delta[..width].iter().enumerate() {
                g.bias[o] += dz;
                for (gw, a) in g.weights[o * layer.n_in..(o + 1) * layer.n_in].iter_mut().zip(input) {
                    *gw += dz * a;
                }
            }
            if i > 0 {
                let prev = &mut self.delta_prev[..layer.n_in];
                prev.iter_mut().for_each(|v| *v = 0.0);
                for (o, &dz) in self.delta[..width].iter().enumerate() {
                    for (p, w) in prev.iter_mut().zip(&layer.weights[o * layer.n_in..(o + 1) * layer.n_in]) {
                        *p += dz * w;
                    }
                }
                std::mem::swap(&mut self.delta, &mut self.delta_prev);
            }
        }
    }
}
