use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::{Error, Result};

/// Serializable description of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Valid-padding convolution; output side `floor((n - k) / stride) + 1`.
    Conv2d {
        kernel: (usize, usize),
        filters: usize,
        stride: usize,
    },
    Relu,
    BatchNorm {
        momentum: f64,
        eps: f64,
    },
    MaxPool {
        size: usize,
        stride: usize,
    },
    Flatten,
    Dense {
        units: usize,
    },
    Sigmoid,
    Softmax,
}

impl LayerSpec {
    pub fn batch_norm() -> Self {
        LayerSpec::BatchNorm {
            momentum: 0.9,
            eps: 1e-5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::Relu => "relu",
            LayerSpec::BatchNorm { .. } => "batch_norm",
            LayerSpec::MaxPool { .. } => "max_pool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Sigmoid => "sigmoid",
            LayerSpec::Softmax => "softmax",
        }
    }

    /// Per-sample output shape, or an error naming why `input` is unusable.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = |why: String| Err(Error::InvalidParameter(format!("{}: {why}", self.name())));
        match *self {
            LayerSpec::Conv2d {
                kernel: (kh, kw),
                filters,
                stride,
            } => {
                let &[h, w, _] = input else {
                    return bad(format!("expects [H, W, C] input, got {input:?}"));
                };
                if kh == 0 || kw == 0 || filters == 0 || stride == 0 {
                    return bad("kernel, filters and stride must be positive".into());
                }
                if h < kh || w < kw {
                    return bad(format!("kernel {kh}x{kw} larger than input {h}x{w}"));
                }
                Ok(vec![(h - kh) / stride + 1, (w - kw) / stride + 1, filters])
            }
            LayerSpec::MaxPool { size, stride } => {
                let &[h, w, c] = input else {
                    return bad(format!("expects [H, W, C] input, got {input:?}"));
                };
                if size == 0 || stride == 0 {
                    return bad("size and stride must be positive".into());
                }
                if h < size || w < size {
                    return bad(format!("pool {size}x{size} larger than input {h}x{w}"));
                }
                Ok(vec![(h - size) / stride + 1, (w - size) / stride + 1, c])
            }
            LayerSpec::BatchNorm { momentum, eps } => {
                if !(0.0..1.0).contains(&momentum) || eps <= 0.0 {
                    return bad(format!("momentum {momentum} / eps {eps} out of range"));
                }
                if input.len() != 1 && input.len() != 3 {
                    return bad(format!("expects [F] or [H, W, C] input, got {input:?}"));
                }
                Ok(input.to_vec())
            }
            LayerSpec::Flatten => Ok(vec![input.iter().product()]),
            LayerSpec::Dense { units } => {
                if units == 0 {
                    return bad("zero-width dense layer".into());
                }
                if input.len() != 1 {
                    return bad(format!("expects flat input, got {input:?}"));
                }
                Ok(vec![units])
            }
            LayerSpec::Relu | LayerSpec::Sigmoid => Ok(input.to_vec()),
            LayerSpec::Softmax => {
                if input.len() != 1 {
                    return bad(format!("expects flat input, got {input:?}"));
                }
                Ok(input.to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv2d {
    pub kh: usize,
    pub kw: usize,
    pub cin: usize,
    pub cout: usize,
    pub stride: usize,
    pub in_hw: (usize, usize),
    pub out_hw: (usize, usize),
    /// `[kh][kw][cin][cout]`
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub inputs: usize,
    pub units: usize,
    /// `[units][inputs]`
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BatchNorm {
    pub channels: usize,
    pub momentum: f64,
    pub eps: f64,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MaxPool {
    pub size: usize,
    pub stride: usize,
    pub in_shape: [usize; 3],
    pub out_shape: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layer {
    Conv2d(Conv2d),
    Relu,
    BatchNorm(BatchNorm),
    MaxPool(MaxPool),
    Flatten,
    Dense(Dense),
    Sigmoid,
    Softmax,
}

/// What a layer keeps from the forward pass for its backward pass.
pub(crate) enum Cache {
    Input(Tensor),
    Output(Tensor),
    BatchNorm { xhat: Vec<f64>, inv_std: Vec<f64>, mean: Vec<f64>, var: Vec<f64>, count: usize, training: bool },
    Argmax(Vec<usize>, Vec<usize>),
    Shape(Vec<usize>),
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, limit: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

impl Layer {
    /// Materializes a layer for a per-sample `input` shape. Conv layers get
    /// He-uniform weights; dense layers Xavier-uniform; biases start at zero.
    pub fn new(spec: &LayerSpec, input: &[usize], rng: &mut ChaCha8Rng) -> Result<Layer> {
        let out = spec.output_shape(input)?;
        Ok(match *spec {
            LayerSpec::Conv2d {
                kernel: (kh, kw),
                filters,
                stride,
            } => {
                let cin = input[2];
                let fan_in = (kh * kw * cin) as f64;
                Layer::Conv2d(Conv2d {
                    kh,
                    kw,
                    cin,
                    cout: filters,
                    stride,
                    in_hw: (input[0], input[1]),
                    out_hw: (out[0], out[1]),
                    weights: uniform(rng, kh * kw * cin * filters, (6.0 / fan_in).sqrt()),
                    bias: vec![0.0; filters],
                })
            }
            LayerSpec::Dense { units } => {
                let inputs = input[0];
                let limit = (6.0 / (inputs + units) as f64).sqrt();
                Layer::Dense(Dense {
                    inputs,
                    units,
                    weights: uniform(rng, inputs * units, limit),
                    bias: vec![0.0; units],
                })
            }
            LayerSpec::BatchNorm { momentum, eps } => {
                let channels = *input.last().unwrap();
                Layer::BatchNorm(BatchNorm {
                    channels,
                    momentum,
                    eps,
                    gamma: vec![1.0; channels],
                    beta: vec![0.0; channels],
                    running_mean: vec![0.0; channels],
                    running_var: vec![1.0; channels],
                })
            }
            LayerSpec::MaxPool { size, stride } => Layer::MaxPool(MaxPool {
                size,
                stride,
                in_shape: [input[0], input[1], input[2]],
                out_shape: [out[0], out[1], out[2]],
            }),
            LayerSpec::Relu => Layer::Relu,
            LayerSpec::Flatten => Layer::Flatten,
            LayerSpec::Sigmoid => Layer::Sigmoid,
            LayerSpec::Softmax => Layer::Softmax,
        })
    }

    pub fn params(&self) -> Vec<&Vec<f64>> {
        match self {
            Layer::Conv2d(c) => vec![&c.weights, &c.bias],
            Layer::Dense(d) => vec![&d.weights, &d.bias],
            Layer::BatchNorm(b) => vec![&b.gamma, &b.beta],
            _ => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Conv2d(c) => vec![&mut c.weights, &mut c.bias],
            Layer::Dense(d) => vec![&mut d.weights, &mut d.bias],
            Layer::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta],
            _ => vec![],
        }
    }

    /// Non-trainable state (BatchNorm running statistics).
    pub fn buffers(&self) -> Vec<&Vec<f64>> {
        match self {
            Layer::BatchNorm(b) => vec![&b.running_mean, &b.running_var],
            _ => vec![],
        }
    }

    pub fn forward(&self, x: Tensor, training: bool, keep_cache: bool) -> (Tensor, Option<Cache>) {
        match self {
            Layer::Conv2d(c) => {
                let y = c.forward(&x);
                (y, keep_cache.then_some(Cache::Input(x)))
            }
            Layer::Dense(d) => {
                let y = d.forward(&x);
                (y, keep_cache.then_some(Cache::Input(x)))
            }
            Layer::Relu => {
                let mut y = x;
                y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
                let cache = keep_cache.then(|| Cache::Output(y.clone()));
                (y, cache)
            }
            Layer::Sigmoid => {
                let mut y = x;
                y.data_mut().iter_mut().for_each(|v| *v = 1.0 / (1.0 + (-*v).exp()));
                let cache = keep_cache.then(|| Cache::Output(y.clone()));
                (y, cache)
            }
            Layer::Softmax => {
                let mut y = x;
                let k = y.item_len();
                y.data_mut().chunks_mut(k).for_each(|row| {
                    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    row.iter_mut().for_each(|v| *v = (*v - max).exp());
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= sum);
                });
                let cache = keep_cache.then(|| Cache::Output(y.clone()));
                (y, cache)
            }
            Layer::Flatten => {
                let shape = x.shape().to_vec();
                let n = x.batch();
                let len = x.item_len();
                (x.reshape(vec![n, len]), keep_cache.then_some(Cache::Shape(shape)))
            }
            Layer::MaxPool(p) => {
                let (y, argmax) = p.forward(&x);
                (y, keep_cache.then(|| Cache::Argmax(argmax, x.shape().to_vec())))
            }
            Layer::BatchNorm(b) => b.forward(x, training, keep_cache),
        }
    }

    /// Returns the input gradient; parameter gradients go to `grads` in
    /// [`Layer::params`] order.
    pub fn backward(&self, cache: &Cache, dy: Tensor, grads: &mut Vec<Vec<f64>>) -> Tensor {
        match (self, cache) {
            (Layer::Conv2d(c), Cache::Input(x)) => c.backward(x, dy, grads),
            (Layer::Dense(d), Cache::Input(x)) => d.backward(x, dy, grads),
            (Layer::Relu, Cache::Output(y)) => {
                let mut dx = dy;
                dx.data_mut()
                    .iter_mut()
                    .zip(y.data())
                    .for_each(|(g, &o)| if o <= 0.0 { *g = 0.0 });
                dx
            }
            (Layer::Sigmoid, Cache::Output(y)) => {
                let mut dx = dy;
                dx.data_mut().iter_mut().zip(y.data()).for_each(|(g, &o)| *g *= o * (1.0 - o));
                dx
            }
            (Layer::Softmax, Cache::Output(y)) => {
                let mut dx = dy;
                let k = y.item_len();
                dx.data_mut().chunks_mut(k).zip(y.data().chunks(k)).for_each(|(g, p)| {
                    let dot: f64 = g.iter().zip(p).map(|(a, b)| a * b).sum();
                    g.iter_mut().zip(p).for_each(|(gi, &pi)| *gi = pi * (*gi - dot));
                });
                dx
            }
            (Layer::Flatten, Cache::Shape(shape)) => dy.reshape(shape.clone()),
            (Layer::MaxPool(_), Cache::Argmax(argmax, in_shape)) => {
                let mut dx = Tensor::zeros(in_shape.clone());
                let data = dx.data_mut();
                for (g, &i) in dy.data().iter().zip(argmax) {
                    data[i] += g;
                }
                dx
            }
            (Layer::BatchNorm(b), cache) => b.backward(cache, dy, grads),
            _ => unreachable!("cache does not belong to this layer"),
        }
    }
}

impl Conv2d {
    fn forward(&self, x: &Tensor) -> Tensor {
        let n = x.batch();
        let (h, w) = self.in_hw;
        let (oh, ow) = self.out_hw;
        let (cin, cout) = (self.cin, self.cout);
        let in_len = h * w * cin;
        let out_len = oh * ow * cout;
        let mut out = vec![0.0; n * out_len];
        out.par_chunks_mut(out_len)
            .zip(x.data().par_chunks(in_len))
            .for_each(|(o, xi)| {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let acc = &mut o[(oy * ow + ox) * cout..(oy * ow + ox + 1) * cout];
                        acc.copy_from_slice(&self.bias);
                        for ky in 0..self.kh {
                            let iy = oy * self.stride + ky;
                            for kx in 0..self.kw {
                                let ix = ox * self.stride + kx;
                                let px = &xi[(iy * w + ix) * cin..(iy * w + ix + 1) * cin];
                                let wbase = (ky * self.kw + kx) * cin * cout;
                                for (ci, &v) in px.iter().enumerate() {
                                    let wrow = &self.weights[wbase + ci * cout..wbase + (ci + 1) * cout];
                                    for (a, &wv) in acc.iter_mut().zip(wrow) {
                                        *a += v * wv;
                                    }
                                }
                            }
                        }
                    }
                }
            });
        Tensor::from_parts(vec![n, oh, ow, cout], out)
    }

    fn backward(&self, x: &Tensor, dy: Tensor, grads: &mut Vec<Vec<f64>>) -> Tensor {
        let n = x.batch();
        let (h, w) = self.in_hw;
        let (oh, ow) = self.out_hw;
        let (cin, cout) = (self.cin, self.cout);
        let in_len = h * w * cin;
        let out_len = oh * ow * cout;
        let mut dx = vec![0.0; n * in_len];
        // Per-sample weight gradients, reduced below in sample order so the
        // sum does not depend on scheduling.
        let partials: Vec<(Vec<f64>, Vec<f64>)> = dx
            .par_chunks_mut(in_len)
            .zip(x.data().par_chunks(in_len))
            .zip(dy.data().par_chunks(out_len))
            .map(|((dxi, xi), dyi)| {
                let mut dw = vec![0.0; self.weights.len()];
                let mut db = vec![0.0; cout];
                for oy in 0..oh {
                    for ox in 0..ow {
                        let g = &dyi[(oy * ow + ox) * cout..(oy * ow + ox + 1) * cout];
                        for (b, &gv) in db.iter_mut().zip(g) {
                            *b += gv;
                        }
                        for ky in 0..self.kh {
                            let iy = oy * self.stride + ky;
                            for kx in 0..self.kw {
                                let ix = ox * self.stride + kx;
                                let pbase = (iy * w + ix) * cin;
                                let wbase = (ky * self.kw + kx) * cin * cout;
                                for ci in 0..cin {
                                    let range = wbase + ci * cout..wbase + (ci + 1) * cout;
                                    let wrow = &self.weights[range.clone()];
                                    let v = xi[pbase + ci];
                                    let mut acc = 0.0;
                                    for ((dwv, &wv), &gv) in dw[range].iter_mut().zip(wrow).zip(g) {
                                        *dwv += v * gv;
                                        acc += wv * gv;
                                    }
                                    dxi[pbase + ci] += acc;
                                }
                            }
                        }
                    }
                }
                (dw, db)
            })
            .collect();
        let mut dw = vec![0.0; self.weights.len()];
        let mut db = vec![0.0; cout];
        for (pw, pb) in partials {
            dw.iter_mut().zip(pw).for_each(|(a, b)| *a += b);
            db.iter_mut().zip(pb).for_each(|(a, b)| *a += b);
        }
        grads.push(dw);
        grads.push(db);
        Tensor::from_parts(vec![n, h, w, cin], dx)
    }
}

impl Dense {
    fn forward(&self, x: &Tensor) -> Tensor {
        let n = x.batch();
        let mut out = vec![0.0; n * self.units];
        out.par_chunks_mut(self.units)
            .zip(x.data().par_chunks(self.inputs))
            .for_each(|(o, xi)| {
                for (u, slot) in o.iter_mut().enumerate() {
                    let row = &self.weights[u * self.inputs..(u + 1) * self.inputs];
                    *slot = self.bias[u] + row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                }
            });
        Tensor::from_parts(vec![n, self.units], out)
    }

    fn backward(&self, x: &Tensor, dy: Tensor, grads: &mut Vec<Vec<f64>>) -> Tensor {
        let n = x.batch();
        let (inputs, units) = (self.inputs, self.units);
        let mut dx = vec![0.0; n * inputs];
        dx.par_chunks_mut(inputs)
            .zip(dy.data().par_chunks(units))
            .for_each(|(dxi, g)| {
                for (u, &gv) in g.iter().enumerate() {
                    if gv == 0.0 {
                        continue;
                    }
                    let row = &self.weights[u * inputs..(u + 1) * inputs];
                    dxi.iter_mut().zip(row).for_each(|(d, &wv)| *d += gv * wv);
                }
            });
        let mut dw = vec![0.0; self.weights.len()];
        dw.par_chunks_mut(inputs).enumerate().for_each(|(u, row)| {
            for b in 0..n {
                let gv = dy.data()[b * units + u];
                let xi = &x.data()[b * inputs..(b + 1) * inputs];
                row.iter_mut().zip(xi).for_each(|(r, &xv)| *r += gv * xv);
            }
        });
        let mut db = vec![0.0; units];
        for g in dy.data().chunks(units) {
            db.iter_mut().zip(g).for_each(|(a, &b)| *a += b);
        }
        grads.push(dw);
        grads.push(db);
        Tensor::from_parts(vec![n, inputs], dx)
    }
}

impl MaxPool {
    fn forward(&self, x: &Tensor) -> (Tensor, Vec<usize>) {
        let n = x.batch();
        let [h, w, c] = self.in_shape;
        let [oh, ow, _] = self.out_shape;
        let mut out = vec![0.0; n * oh * ow * c];
        let mut argmax = vec![0usize; out.len()];
        let data = x.data();
        for b in 0..n {
            for oy in 0..oh {
                for ox in 0..ow {
                    for ch in 0..c {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_i = 0;
                        for ky in 0..self.size {
                            for kx in 0..self.size {
                                let i = ((b * h + oy * self.stride + ky) * w + ox * self.stride + kx) * c + ch;
                                if data[i] > best {
                                    best = data[i];
                                    best_i = i;
                                }
                            }
                        }
                        let o = ((b * oh + oy) * ow + ox) * c + ch;
                        out[o] = best;
                        argmax[o] = best_i;
                    }
                }
            }
        }
        (Tensor::from_parts(vec![n, oh, ow, c], out), argmax)
    }
}

impl BatchNorm {
    fn forward(&self, x: Tensor, training: bool, keep_cache: bool) -> (Tensor, Option<Cache>) {
        let c = self.channels;
        let count = x.data().len() / c;
        let (mean, var) = if training {
            let mut mean = vec![0.0; c];
            for row in x.data().chunks(c) {
                mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
            }
            mean.iter_mut().for_each(|m| *m /= count as f64);
            let mut var = vec![0.0; c];
            for row in x.data().chunks(c) {
                var.iter_mut().zip(row).zip(&mean).for_each(|((s, v), m)| *s += (v - m).powi(2));
            }
            var.iter_mut().for_each(|s| *s /= count as f64);
            (mean, var)
        } else {
            (self.running_mean.clone(), self.running_var.clone())
        };
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect();
        let shape = x.shape().to_vec();
        let mut xhat = x.into_data();
        for row in xhat.chunks_mut(c) {
            for (ch, v) in row.iter_mut().enumerate() {
                *v = (*v - mean[ch]) * inv_std[ch];
            }
        }
        let mut y = xhat.clone();
        for row in y.chunks_mut(c) {
            for (ch, v) in row.iter_mut().enumerate() {
                *v = self.gamma[ch] * *v + self.beta[ch];
            }
        }
        let cache = keep_cache.then_some(Cache::BatchNorm {
            xhat,
            inv_std,
            mean,
            var,
            count,
            training,
        });
        (Tensor::from_parts(shape, y), cache)
    }

    fn backward(&self, cache: &Cache, dy: Tensor, grads: &mut Vec<Vec<f64>>) -> Tensor {
        let Cache::BatchNorm {
            xhat,
            inv_std,
            count,
            training,
            ..
        } = cache
        else {
            unreachable!("batch norm backward without its cache")
        };
        let c = self.channels;
        let m = *count as f64;
        let mut dgamma = vec![0.0; c];
        let mut dbeta = vec![0.0; c];
        for (g, xh) in dy.data().chunks(c).zip(xhat.chunks(c)) {
            for ch in 0..c {
                dgamma[ch] += g[ch] * xh[ch];
                dbeta[ch] += g[ch];
            }
        }
        let shape = dy.shape().to_vec();
        let mut dx = dy.into_data();
        for (g, xh) in dx.chunks_mut(c).zip(xhat.chunks(c)) {
            for ch in 0..c {
                let dxhat = g[ch] * self.gamma[ch];
                g[ch] = if *training {
                    // (1/m)·σ⁻¹·(m·dx̂ − Σdx̂ − x̂·Σ(dx̂·x̂)) with Σdx̂ = γ·dβ, Σdx̂·x̂ = γ·dγ.
                    inv_std[ch] / m
                        * (m * dxhat - self.gamma[ch] * dbeta[ch] - xh[ch] * self.gamma[ch] * dgamma[ch])
                } else {
                    dxhat * inv_std[ch]
                };
            }
        }
        grads.push(dgamma);
        grads.push(dbeta);
        Tensor::from_parts(shape, dx)
    }

    /// Folds the batch statistics of a training step into the running averages
    /// (unbiased variance).
    pub fn update_running(&mut self, mean: &[f64], var: &[f64], count: usize) {
        let unbias = if count > 1 { count as f64 / (count - 1) as f64 } else { 1.0 };
        for ch in 0..self.channels {
            self.running_mean[ch] = self.momentum * self.running_mean[ch] + (1.0 - self.momentum) * mean[ch];
            self.running_var[ch] = self.momentum * self.running_var[ch] + (1.0 - self.momentum) * var[ch] * unbias;
        }
    }
}
