//! Layer kinds, their forward kernels and exact reverse-mode gradients.

use super::lstm::{sigmoid, LstmGrads, LstmParams, StepCache};
use super::tensor::{dot, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Declarative description of one layer. Input sizes are inferred from the
/// incoming tensor shape when the network is built.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    /// Affine map on the last axis; `l2` penalizes `l2·Σw²` (biases excluded).
    Dense { units: usize, l2: f64 },
    /// 1-D convolution over a `(time, channels)` tensor with "same" padding.
    Conv1d {
        filters: usize,
        kernel: usize,
        stride: usize,
        l2: f64,
    },
    /// LSTM over a `(time, features)` sequence, zero initial state.
    GatedRecurrentCell { hidden: usize },
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
    Flatten,
    /// `(time, channels)` → `(channels)`
    GlobalAvgPool,
    /// Trainable per-channel `γ·x + β` on the last axis (γ = 1, β = 0 at
    /// build time; see [`super::Network::standardize_affine`]).
    ChannelAffine,
    /// `x + block(x)`
    Residual(Vec<LayerSpec>),
    /// Branches applied to the same input, concatenated on the last axis.
    Parallel(Vec<Vec<LayerSpec>>),
}

#[derive(Debug, Clone)]
pub(crate) enum Layer {
    Dense {
        input: usize,
        units: usize,
        l2: f64,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    Conv1d {
        in_ch: usize,
        filters: usize,
        kernel: usize,
        stride: usize,
        l2: f64,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    Lstm(LstmParams),
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
    Flatten,
    GlobalAvgPool,
    ChannelAffine {
        gamma: Vec<f64>,
        beta: Vec<f64>,
    },
    Residual(Vec<Layer>),
    Parallel(Vec<Vec<Layer>>),
}

#[derive(Debug, Clone)]
pub(crate) enum Cache {
    Input(Tensor),
    Output(Tensor),
    Shape(Vec<usize>),
    Lstm(Vec<StepCache>),
    Seq(Vec<Cache>),
    Par(Vec<Vec<Cache>>, Vec<usize>),
}

fn glorot(fan_in: usize, fan_out: usize, n: usize, rng: &mut Rng) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.uniform_range(-limit, limit)).collect()
}

fn rank2(shape: &[usize], what: &str) -> Result<(usize, usize)> {
    match shape {
        [t, c] => Ok((*t, *c)),
        _ => Err(Error::invalid(format!(
            "{what} expects a (time, channels) input, got {shape:?}"
        ))),
    }
}

pub(crate) fn build_seq(specs: &[LayerSpec], input: &[usize], rng: &mut Rng) -> Result<(Vec<Layer>, Vec<usize>)> {
    let mut shape = input.to_vec();
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        let (layer, out) = build(spec, &shape, rng)?;
        layers.push(layer);
        shape = out;
    }
    Ok((layers, shape))
}

fn build(spec: &LayerSpec, input: &[usize], rng: &mut Rng) -> Result<(Layer, Vec<usize>)> {
    if input.is_empty() || input.iter().any(|&d| d == 0) {
        return Err(Error::invalid(format!("invalid layer input shape {input:?}")));
    }
    let same = input.to_vec();
    Ok(match spec {
        LayerSpec::Dense { units, l2 } => {
            if *units == 0 || *l2 < 0.0 {
                return Err(Error::invalid("dense layer needs units > 0 and l2 >= 0"));
            }
            let n_in = *input.last().unwrap();
            let mut out = same;
            *out.last_mut().unwrap() = *units;
            (
                Layer::Dense {
                    input: n_in,
                    units: *units,
                    l2: *l2,
                    w: glorot(n_in, *units, n_in * units, rng),
                    b: vec![0.0; *units],
                },
                out,
            )
        }
        LayerSpec::Conv1d {
            filters,
            kernel,
            stride,
            l2,
        } => {
            let (t, c) = rank2(input, "Conv1d")?;
            if *filters == 0 || *kernel == 0 || *stride == 0 || *l2 < 0.0 {
                return Err(Error::invalid("conv layer needs positive sizes and l2 >= 0"));
            }
            let t_out = t.div_ceil(*stride);
            (
                Layer::Conv1d {
                    in_ch: c,
                    filters: *filters,
                    kernel: *kernel,
                    stride: *stride,
                    l2: *l2,
                    w: glorot(kernel * c, kernel * filters, filters * kernel * c, rng),
                    b: vec![0.0; *filters],
                },
                vec![t_out, *filters],
            )
        }
        LayerSpec::GatedRecurrentCell { hidden } => {
            let (t, c) = rank2(input, "GatedRecurrentCell")?;
            if *hidden == 0 {
                return Err(Error::invalid("recurrent layer needs hidden > 0"));
            }
            let mut p = LstmParams::zeros(c, *hidden);
            let limit = 1.0 / (*hidden as f64).sqrt();
            p.w_x.iter_mut().chain(p.w_h.iter_mut()).for_each(|w| *w = rng.uniform_range(-limit, limit));
            p.bias[*hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
            (Layer::Lstm(p), vec![t, *hidden])
        }
        LayerSpec::Relu => (Layer::Relu, same),
        LayerSpec::Sigmoid => (Layer::Sigmoid, same),
        LayerSpec::Tanh => (Layer::Tanh, same),
        LayerSpec::Softmax => (Layer::Softmax, same),
        LayerSpec::Flatten => (Layer::Flatten, vec![input.iter().product()]),
        LayerSpec::GlobalAvgPool => {
            let (_, c) = rank2(input, "GlobalAvgPool")?;
            (Layer::GlobalAvgPool, vec![c])
        }
        LayerSpec::ChannelAffine => {
            let c = *input.last().unwrap();
            (
                Layer::ChannelAffine {
                    gamma: vec![1.0; c],
                    beta: vec![0.0; c],
                },
                same,
            )
        }
        LayerSpec::Residual(block) => {
            if block.is_empty() {
                return Err(Error::invalid("residual block must not be empty"));
            }
            let (layers, out) = build_seq(block, input, rng)?;
            if out != input {
                return Err(Error::invalid(format!(
                    "residual block maps {input:?} to {out:?}; shapes must match"
                )));
            }
            (Layer::Residual(layers), same)
        }
        LayerSpec::Parallel(branches) => {
            if branches.is_empty() {
                return Err(Error::invalid("parallel layer needs at least one branch"));
            }
            let mut built = Vec::new();
            let mut lead: Option<Vec<usize>> = None;
            let mut width = 0;
            for br in branches {
                let (layers, out) = build_seq(br, input, rng)?;
                let (last, head) = out.split_last().unwrap();
                match &lead {
                    None => lead = Some(head.to_vec()),
                    Some(l) if l.as_slice() != head => {
                        return Err(Error::invalid("parallel branches disagree on leading axes"))
                    }
                    _ => {}
                }
                width += last;
                built.push(layers);
            }
            let mut out = lead.unwrap();
            out.push(width);
            (Layer::Parallel(built), out)
        }
    })
}

pub(crate) fn spec_of(layer: &Layer) -> LayerSpec {
    match layer {
        Layer::Dense { units, l2, .. } => LayerSpec::Dense { units: *units, l2: *l2 },
        Layer::Conv1d {
            filters,
            kernel,
            stride,
            l2,
            ..
        } => LayerSpec::Conv1d {
            filters: *filters,
            kernel: *kernel,
            stride: *stride,
            l2: *l2,
        },
        Layer::Lstm(p) => LayerSpec::GatedRecurrentCell { hidden: p.hidden },
        Layer::Relu => LayerSpec::Relu,
        Layer::Sigmoid => LayerSpec::Sigmoid,
        Layer::Tanh => LayerSpec::Tanh,
        Layer::Softmax => LayerSpec::Softmax,
        Layer::Flatten => LayerSpec::Flatten,
        Layer::GlobalAvgPool => LayerSpec::GlobalAvgPool,
        Layer::ChannelAffine { .. } => LayerSpec::ChannelAffine,
        Layer::Residual(ls) => LayerSpec::Residual(ls.iter().map(spec_of).collect()),
        Layer::Parallel(bs) => {
            LayerSpec::Parallel(bs.iter().map(|b| b.iter().map(spec_of).collect()).collect())
        }
    }
}

impl Layer {
    pub fn n_param_tensors(&self) -> usize {
        match self {
            Layer::Dense { .. } | Layer::Conv1d { .. } | Layer::ChannelAffine { .. } => 2,
            Layer::Lstm(_) => 3,
            Layer::Residual(ls) => ls.iter().map(Layer::n_param_tensors).sum(),
            Layer::Parallel(bs) => bs.iter().flatten().map(Layer::n_param_tensors).sum(),
            _ => 0,
        }
    }

    pub fn params<'a>(&'a self, out: &mut Vec<&'a [f64]>) {
        match self {
            Layer::Dense { w, b, .. } | Layer::Conv1d { w, b, .. } => {
                out.push(w);
                out.push(b);
            }
            Layer::ChannelAffine { gamma, beta } => {
                out.push(gamma);
                out.push(beta);
            }
            Layer::Lstm(p) => {
                out.push(&p.w_x);
                out.push(&p.w_h);
                out.push(&p.bias);
            }
            Layer::Residual(ls) => ls.iter().for_each(|l| l.params(out)),
            Layer::Parallel(bs) => bs.iter().flatten().for_each(|l| l.params(out)),
            _ => {}
        }
    }

    pub fn params_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        match self {
            Layer::Dense { w, b, .. } | Layer::Conv1d { w, b, .. } => {
                out.push(w);
                out.push(b);
            }
            Layer::ChannelAffine { gamma, beta } => {
                out.push(gamma);
                out.push(beta);
            }
            Layer::Lstm(p) => {
                out.push(&mut p.w_x);
                out.push(&mut p.w_h);
                out.push(&mut p.bias);
            }
            Layer::Residual(ls) => ls.iter_mut().for_each(|l| l.params_mut(out)),
            Layer::Parallel(bs) => bs.iter_mut().flatten().for_each(|l| l.params_mut(out)),
            _ => {}
        }
    }

    /// `Σ l2·w²` over regularized weights.
    pub fn l2_penalty(&self) -> f64 {
        match self {
            Layer::Dense { w, l2, .. } | Layer::Conv1d { w, l2, .. } => {
                l2 * w.iter().map(|v| v * v).sum::<f64>()
            }
            Layer::Residual(ls) => ls.iter().map(Layer::l2_penalty).sum(),
            Layer::Parallel(bs) => bs.iter().flatten().map(Layer::l2_penalty).sum(),
            _ => 0.0,
        }
    }

    pub fn forward(&self, x: Tensor) -> Result<(Tensor, Cache)> {
        match self {
            Layer::Dense {
                input, units, w, b, ..
            } => {
                if x.last_dim() != *input {
                    return Err(Error::invalid(format!(
                        "dense layer expects last axis {input}, got {:?}",
                        x.shape()
                    )));
                }
                let rows = x.rows();
                let mut out = Vec::with_capacity(rows * units);
                for r in x.data().chunks_exact(*input) {
                    for u in 0..*units {
                        let wr = &w[u * input..(u + 1) * input];
                        out.push(b[u] + dot(wr, r));
                    }
                }
                let mut shape = x.shape().to_vec();
                *shape.last_mut().unwrap() = *units;
                Ok((Tensor::from_parts(shape, out), Cache::Input(x)))
            }
            Layer::Conv1d {
                in_ch,
                filters,
                kernel,
                stride,
                w,
                b,
                ..
            } => {
                let (t, c) = rank2(x.shape(), "Conv1d")?;
                if c != *in_ch {
                    return Err(Error::invalid(format!(
                        "conv layer expects {in_ch} channels, got {c}"
                    )));
                }
                let t_out = t.div_ceil(*stride);
                let padded = conv_pad(x.data(), t, c, *kernel, *stride);
                let win = kernel * c;
                let mut out = Vec::with_capacity(t_out * filters);
                for to in 0..t_out {
                    let xw = &padded[to * stride * c..to * stride * c + win];
                    for f in 0..*filters {
                        let wf = &w[f * win..(f + 1) * win];
                        out.push(b[f] + dot(wf, xw));
                    }
                }
                Ok((Tensor::from_parts(vec![t_out, *filters], out), Cache::Input(x)))
            }
            Layer::Lstm(p) => {
                let (t, c) = rank2(x.shape(), "GatedRecurrentCell")?;
                if c != p.input {
                    return Err(Error::invalid(format!(
                        "recurrent layer expects {} features, got {c}",
                        p.input
                    )));
                }
                let mut h = vec![0.0; p.hidden];
                let mut cell = vec![0.0; p.hidden];
                let mut out = Vec::with_capacity(t * p.hidden);
                let mut steps = Vec::with_capacity(t);
                for xt in x.data().chunks_exact(c) {
                    let (h2, c2, sc) = p.step_cached(xt, &h, &cell);
                    out.extend_from_slice(&h2);
                    steps.push(sc);
                    h = h2;
                    cell = c2;
                }
                Ok((Tensor::from_parts(vec![t, p.hidden], out), Cache::Lstm(steps)))
            }
            Layer::Relu => {
                let y = map(&x, |v| v.max(0.0));
                Ok((y, Cache::Input(x)))
            }
            Layer::Sigmoid => {
                let y = map(&x, sigmoid);
                Ok((y.clone(), Cache::Output(y)))
            }
            Layer::Tanh => {
                let y = map(&x, f64::tanh);
                Ok((y.clone(), Cache::Output(y)))
            }
            Layer::Softmax => {
                let n = x.last_dim();
                let mut y = x.data().to_vec();
                for row in y.chunks_exact_mut(n) {
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    row.iter_mut().for_each(|v| *v = (*v - m).exp());
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= s);
                }
                let y = Tensor::from_parts(x.shape().to_vec(), y);
                Ok((y.clone(), Cache::Output(y)))
            }
            Layer::Flatten => {
                let shape = x.shape().to_vec();
                let n = x.len();
                Ok((x.reshape(vec![n])?, Cache::Shape(shape)))
            }
            Layer::GlobalAvgPool => {
                let (t, c) = rank2(x.shape(), "GlobalAvgPool")?;
                let mut out = vec![0.0; c];
                for row in x.data().chunks_exact(c) {
                    out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
                }
                out.iter_mut().for_each(|o| *o /= t as f64);
                Ok((Tensor::from_parts(vec![c], out), Cache::Shape(vec![t, c])))
            }
            Layer::ChannelAffine { gamma, beta } => {
                let c = gamma.len();
                if x.last_dim() != c {
                    return Err(Error::invalid(format!(
                        "affine layer expects last axis {c}, got {:?}",
                        x.shape()
                    )));
                }
                let mut y = x.data().to_vec();
                for row in y.chunks_exact_mut(c) {
                    for j in 0..c {
                        row[j] = gamma[j] * row[j] + beta[j];
                    }
                }
                Ok((Tensor::from_parts(x.shape().to_vec(), y), Cache::Input(x)))
            }
            Layer::Residual(block) => {
                let (y, caches) = forward_seq(block, x.clone())?;
                if y.shape() != x.shape() {
                    return Err(Error::invalid("residual block changed the tensor shape"));
                }
                let mut out = y.into_data();
                out.iter_mut().zip(x.data()).for_each(|(o, v)| *o += v);
                Ok((Tensor::from_parts(x.shape().to_vec(), out), Cache::Seq(caches)))
            }
            Layer::Parallel(branches) => {
                let mut outs = Vec::new();
                let mut caches = Vec::new();
                for br in branches {
                    let (y, c) = forward_seq(br, x.clone())?;
                    outs.push(y);
                    caches.push(c);
                }
                let widths: Vec<usize> = outs.iter().map(|o| o.last_dim()).collect();
                let total: usize = widths.iter().sum();
                let rows = outs[0].rows();
                let mut data = Vec::with_capacity(rows * total);
                for r in 0..rows {
                    for (o, &wd) in outs.iter().zip(&widths) {
                        data.extend_from_slice(&o.data()[r * wd..(r + 1) * wd]);
                    }
                }
                let mut shape = outs[0].shape().to_vec();
                *shape.last_mut().unwrap() = total;
                Ok((Tensor::from_parts(shape, data), Cache::Par(caches, widths)))
            }
        }
    }

    /// Backward pass. `grads` holds exactly this layer's parameter slots
    /// (in `params` order) and is accumulated into.
    pub fn backward(&self, cache: &Cache, gy: Tensor, grads: &mut [Vec<f64>]) -> Result<Tensor> {
        match (self, cache) {
            (
                Layer::Dense {
                    input,
                    units,
                    l2,
                    w,
                    ..
                },
                Cache::Input(x),
            ) => {
                let (gw, gb) = split2(grads);
                let mut gx = vec![0.0; x.len()];
                for ((xr, gyr), gxr) in x
                    .data()
                    .chunks_exact(*input)
                    .zip(gy.data().chunks_exact(*units))
                    .zip(gx.chunks_exact_mut(*input))
                {
                    for u in 0..*units {
                        let g = gyr[u];
                        if g == 0.0 {
                            continue;
                        }
                        gb[u] += g;
                        let wr = &w[u * input..(u + 1) * input];
                        let gwr = &mut gw[u * input..(u + 1) * input];
                        for j in 0..*input {
                            gwr[j] += g * xr[j];
                            gxr[j] += g * wr[j];
                        }
                    }
                }
                if *l2 > 0.0 {
                    gw.iter_mut().zip(w).for_each(|(g, v)| *g += 2.0 * l2 * v);
                }
                Ok(Tensor::from_parts(x.shape().to_vec(), gx))
            }
            (
                Layer::Conv1d {
                    in_ch,
                    filters,
                    kernel,
                    stride,
                    l2,
                    w,
                    ..
                },
                Cache::Input(x),
            ) => {
                let (t, c) = (x.shape()[0], *in_ch);
                let padded = conv_pad(x.data(), t, c, *kernel, *stride);
                let mut gpad = vec![0.0; padded.len()];
                let (gw, gb) = split2(grads);
                let win = kernel * c;
                for (to, gyr) in gy.data().chunks_exact(*filters).enumerate() {
                    let off = to * stride * c;
                    let xw = &padded[off..off + win];
                    for f in 0..*filters {
                        let g = gyr[f];
                        if g == 0.0 {
                            continue;
                        }
                        gb[f] += g;
                        let wf = &w[f * win..(f + 1) * win];
                        let gwf = &mut gw[f * win..(f + 1) * win];
                        let gxw = &mut gpad[off..off + win];
                        for j in 0..win {
                            gwf[j] += g * xw[j];
                            gxw[j] += g * wf[j];
                        }
                    }
                }
                if *l2 > 0.0 {
                    gw.iter_mut().zip(w).for_each(|(g, v)| *g += 2.0 * l2 * v);
                }
                let left = (kernel - 1) / 2;
                Ok(Tensor::from_parts(
                    x.shape().to_vec(),
                    gpad[left * c..(left + t) * c].to_vec(),
                ))
            }
            (Layer::Lstm(p), Cache::Lstm(steps)) => {
                let mut lg = LstmGrads::zeros_like(p);
                let hd = p.hidden;
                let mut dh_next = vec![0.0; hd];
                let mut dc_next = vec![0.0; hd];
                let mut gx = vec![0.0; steps.len() * p.input];
                for (t, sc) in steps.iter().enumerate().rev() {
                    let dh: Vec<f64> = gy.data()[t * hd..(t + 1) * hd]
                        .iter()
                        .zip(&dh_next)
                        .map(|(a, b)| a + b)
                        .collect();
                    let (dx, dhp, dcp) = p.step_backward(sc, &dh, &dc_next, &mut lg);
                    gx[t * p.input..(t + 1) * p.input].copy_from_slice(&dx);
                    dh_next = dhp;
                    dc_next = dcp;
                }
                for (dst, src) in grads.iter_mut().zip([lg.w_x, lg.w_h, lg.bias]) {
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
                }
                Ok(Tensor::from_parts(vec![steps.len(), p.input], gx))
            }
            (Layer::ChannelAffine { gamma, .. }, Cache::Input(x)) => {
                let c = gamma.len();
                let (gg, gbeta) = split2(grads);
                let mut gx = Vec::with_capacity(x.len());
                for (xr, gr) in x.data().chunks_exact(c).zip(gy.data().chunks_exact(c)) {
                    for j in 0..c {
                        gg[j] += gr[j] * xr[j];
                        gbeta[j] += gr[j];
                        gx.push(gr[j] * gamma[j]);
                    }
                }
                Ok(Tensor::from_parts(x.shape().to_vec(), gx))
            }
            (Layer::Relu, Cache::Input(x)) => Ok(Tensor::from_parts(
                x.shape().to_vec(),
                x.data()
                    .iter()
                    .zip(gy.data())
                    .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
                    .collect(),
            )),
            (Layer::Sigmoid, Cache::Output(y)) => Ok(zip_map(y, &gy, |s, g| g * s * (1.0 - s))),
            (Layer::Tanh, Cache::Output(y)) => Ok(zip_map(y, &gy, |s, g| g * (1.0 - s * s))),
            (Layer::Softmax, Cache::Output(y)) => {
                let n = y.last_dim();
                let mut gx = Vec::with_capacity(y.len());
                for (yr, gr) in y.data().chunks_exact(n).zip(gy.data().chunks_exact(n)) {
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    gx.extend(yr.iter().zip(gr).map(|(s, g)| s * (g - dot)));
                }
                Ok(Tensor::from_parts(y.shape().to_vec(), gx))
            }
            (Layer::Flatten, Cache::Shape(shape)) => gy.reshape(shape.clone()),
            (Layer::GlobalAvgPool, Cache::Shape(shape)) => {
                let (t, c) = (shape[0], shape[1]);
                let mut gx = Vec::with_capacity(t * c);
                for _ in 0..t {
                    gx.extend(gy.data().iter().map(|g| g / t as f64));
                }
                Ok(Tensor::from_parts(shape.clone(), gx))
            }
            (Layer::Residual(block), Cache::Seq(caches)) => {
                let skip = gy.clone();
                let gb = backward_seq(block, caches, gy, grads)?;
                let mut out = gb.into_data();
                out.iter_mut().zip(skip.data()).for_each(|(o, s)| *o += s);
                Ok(Tensor::from_parts(skip.shape().to_vec(), out))
            }
            (Layer::Parallel(branches), Cache::Par(caches, widths)) => {
                let total: usize = widths.iter().sum();
                let rows = gy.len() / total;
                let mut lead = gy.shape().to_vec();
                lead.pop();
                let mut acc: Option<Tensor> = None;
                let mut col = 0;
                let mut slot = 0;
                for ((br, bc), &wd) in branches.iter().zip(caches).zip(widths) {
                    let mut part = Vec::with_capacity(rows * wd);
                    for r in 0..rows {
                        part.extend_from_slice(&gy.data()[r * total + col..r * total + col + wd]);
                    }
                    let mut shape = lead.clone();
                    shape.push(wd);
                    let n: usize = br.iter().map(Layer::n_param_tensors).sum();
                    let gx = backward_seq(br, bc, Tensor::from_parts(shape, part), &mut grads[slot..slot + n])?;
                    slot += n;
                    col += wd;
                    acc = Some(match acc {
                        None => gx,
                        Some(mut a) => {
                            a.data_mut().iter_mut().zip(gx.data()).for_each(|(x, y)| *x += y);
                            a
                        }
                    });
                }
                Ok(acc.unwrap())
            }
            _ => Err(Error::InvalidState("cache does not match layer".into())),
        }
    }
}

pub(crate) fn forward_seq(layers: &[Layer], mut x: Tensor) -> Result<(Tensor, Vec<Cache>)> {
    let mut caches = Vec::with_capacity(layers.len());
    for l in layers {
        let (y, c) = l.forward(x)?;
        caches.push(c);
        x = y;
    }
    Ok((x, caches))
}

pub(crate) fn backward_seq(
    layers: &[Layer],
    caches: &[Cache],
    mut gy: Tensor,
    grads: &mut [Vec<f64>],
) -> Result<Tensor> {
    if caches.len() != layers.len() {
        return Err(Error::InvalidState("cache length does not match network".into()));
    }
    let mut offsets = Vec::with_capacity(layers.len());
    let mut acc = 0;
    for l in layers {
        offsets.push(acc);
        acc += l.n_param_tensors();
    }
    for ((l, c), &off) in layers.iter().zip(caches).zip(&offsets).rev() {
        let n = l.n_param_tensors();
        gy = l.backward(c, gy, &mut grads[off..off + n])?;
    }
    Ok(gy)
}

fn split2(grads: &mut [Vec<f64>]) -> (&mut [f64], &mut [f64]) {
    let (a, b) = grads.split_at_mut(1);
    (&mut a[0], &mut b[0])
}

fn map(x: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::from_parts(x.shape().to_vec(), x.data().iter().map(|&v| f(v)).collect())
}

fn zip_map(y: &Tensor, gy: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor::from_parts(
        y.shape().to_vec(),
        y.data().iter().zip(gy.data()).map(|(&a, &b)| f(a, b)).collect(),
    )
}

/// Zero-padded copy of a `(t, c)` input laid out so output step `to` reads
/// the contiguous window starting at row `to·stride`.
fn conv_pad(x: &[f64], t: usize, c: usize, kernel: usize, stride: usize) -> Vec<f64> {
    let t_out = t.div_ceil(stride);
    let rows = (t_out - 1) * stride + kernel;
    let left = (kernel - 1) / 2;
    let mut padded = vec![0.0; rows.max(left + t) * c];
    padded[left * c..(left + t) * c].copy_from_slice(x);
    padded
}
