use std::sync::atomic::{AtomicU64, Ordering};

use super::layers::{backward_seq, build_seq, forward_seq, spec_of, Cache, Layer, LayerSpec};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Rng;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Per-parameter-tensor gradients, aligned with [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.tensors.iter_mut().flatten().for_each(|x| *x *= k);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.tensors.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flatten().copied().collect()
    }
}

/// Activations retained by [`Network::forward`] for the matching backward.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    caches: Vec<Cache>,
    stamp: (u64, u64),
}

/// A feed-forward stack of layers with owned parameters.
///
/// Every parameter mutation bumps an internal generation counter so that
/// caches produced before the mutation are rejected by `backward`.
#[derive(Debug)]
pub struct Network {
    specs: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    layers: Vec<Layer>,
    id: u64,
    generation: u64,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Network {
            specs: self.specs.clone(),
            input_shape: self.input_shape.clone(),
            output_shape: self.output_shape.clone(),
            layers: self.layers.clone(),
            id: fresh_id(),
            generation: 0,
        }
    }
}

impl Network {
    pub fn new(specs: Vec<LayerSpec>, input_shape: &[usize], rng: &mut Rng) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        let (layers, output_shape) = build_seq(&specs, input_shape, rng)?;
        Ok(Network {
            specs,
            input_shape: input_shape.to_vec(),
            output_shape,
            layers,
            id: fresh_id(),
            generation: 0,
        })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, ForwardCache)> {
        if input.shape() != self.input_shape.as_slice() {
            return Err(Error::invalid(format!(
                "network expects input {:?}, got {:?}",
                self.input_shape,
                input.shape()
            )));
        }
        let (y, caches) = forward_seq(&self.layers, input.clone())?;
        Ok((
            y,
            ForwardCache {
                caches,
                stamp: (self.id, self.generation),
            },
        ))
    }

    pub fn predict(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.forward(input)?.0)
    }

    /// Gradients of `⟨output_grad, output⟩ + Σ l2·w²` with respect to every
    /// parameter, plus the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &Tensor) -> Result<(Gradients, Tensor)> {
        if cache.stamp != (self.id, self.generation) {
            return Err(Error::InvalidState(
                "forward cache is stale: parameters changed since it was produced".into(),
            ));
        }
        if output_grad.shape() != self.output_shape.as_slice() {
            return Err(Error::invalid(format!(
                "output gradient shape {:?} does not match output {:?}",
                output_grad.shape(),
                self.output_shape
            )));
        }
        let mut grads = self.zero_grads();
        let gx = backward_seq(&self.layers, &cache.caches, output_grad.clone(), &mut grads.tensors)?;
        Ok((grads, gx))
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            tensors: self.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        self.layers.iter().for_each(|l| l.params(&mut out));
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.generation += 1;
        let mut out = Vec::new();
        self.layers.iter_mut().for_each(|l| l.params_mut(&mut out));
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params().iter().flat_map(|p| p.iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite parameter".into()));
        }
        let mut it = values.iter();
        for p in self.params_mut() {
            p.iter_mut().for_each(|v| *v = *it.next().unwrap());
        }
        Ok(())
    }

    /// Copy all parameter values from a network of identical architecture.
    pub fn copy_params_from(&mut self, other: &Network) -> Result<()> {
        if self.specs != other.specs || self.input_shape != other.input_shape {
            return Err(Error::invalid("cannot copy parameters between different architectures"));
        }
        let src: Vec<Vec<f64>> = other.params().iter().map(|p| p.to_vec()).collect();
        for (dst, s) in self.params_mut().into_iter().zip(src) {
            dst.copy_from_slice(&s);
        }
        Ok(())
    }

    pub fn l2_penalty(&self) -> f64 {
        self.layers.iter().map(Layer::l2_penalty).sum()
    }

    /// Data-dependent initialization: every top-level `ChannelAffine` layer
    /// is set so that its output over `inputs` has zero mean and unit
    /// variance per channel. Channels with no spread keep `γ = 1`.
    pub fn standardize_affine(&mut self, inputs: &[Tensor]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::invalid("standardization needs at least one input"));
        }
        self.generation += 1;
        let mut acts: Vec<Tensor> = inputs.to_vec();
        for layer in self.layers.iter_mut() {
            if let Layer::ChannelAffine { gamma, beta } = layer {
                let c = gamma.len();
                let mut sum = vec![0.0; c];
                let mut sq = vec![0.0; c];
                let mut n = 0.0;
                for a in &acts {
                    for row in a.data().chunks_exact(c) {
                        for j in 0..c {
                            sum[j] += row[j];
                            sq[j] += row[j] * row[j];
                        }
                        n += 1.0;
                    }
                }
                for j in 0..c {
                    let mean = sum[j] / n;
                    let var = (sq[j] / n - mean * mean).max(0.0);
                    let sd = var.sqrt();
                    gamma[j] = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
                    beta[j] = -mean * gamma[j];
                }
            }
            acts = acts
                .into_iter()
                .map(|a| layer.forward(a).map(|(y, _)| y))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    pub(crate) fn rebuild_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(spec_of).collect()
    }
}
