use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{LayerSpec, Network};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Binary authorized-vs-not discriminator, one sigmoid output.
    Disc,
    /// |T|+1-way softmax; the last class collects outliers.
    Dclass,
    /// One sigmoid head per authorized transmitter on a shared extractor.
    Ova,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Disc => "disc",
            Variant::Dclass => "dclass",
            Variant::Ova => "ova",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    /// `(256, 2)` tensor of (I, Q).
    RawIq,
    /// `(128, 2)` reshaped DFT magnitudes.
    DftMagnitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscriminatorSpec {
    pub variant: Variant,
    pub preprocessing: Preprocessing,
    pub feature_filters: Vec<usize>,
    pub classifier_hidden: Vec<usize>,
    pub kernel: usize,
    /// Stride of each block's entry convolution.
    pub stride: usize,
    pub l2_weight: f64,
    pub n_authorized: usize,
}

impl Default for DiscriminatorSpec {
    fn default() -> Self {
        DiscriminatorSpec {
            variant: Variant::Disc,
            preprocessing: Preprocessing::RawIq,
            feature_filters: vec![16],
            classifier_hidden: vec![64, 64],
            kernel: 1,
            stride: 1,
            l2_weight: 0.001,
            n_authorized: 10,
        }
    }
}

impl DiscriminatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.feature_filters.is_empty() || self.feature_filters.contains(&0) {
            return Err(Error::invalid("feature_filters must be a non-empty list of positive sizes"));
        }
        if self.classifier_hidden.contains(&0) {
            return Err(Error::invalid("classifier_hidden sizes must be positive"));
        }
        if self.kernel == 0 || self.stride == 0 {
            return Err(Error::invalid("kernel and stride must be positive"));
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return Err(Error::invalid("l2_weight must be non-negative"));
        }
        if self.n_authorized == 0 {
            return Err(Error::invalid("n_authorized must be at least 1"));
        }
        Ok(())
    }

    /// Input tensor shape for packets of `packet_len` symbols.
    pub fn input_shape(&self, packet_len: usize) -> [usize; 2] {
        match self.preprocessing {
            Preprocessing::RawIq => [packet_len, 2],
            Preprocessing::DftMagnitude => [packet_len / 2, 2],
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self.variant {
            Variant::Disc => 1,
            Variant::Dclass => self.n_authorized + 1,
            Variant::Ova => self.n_authorized,
        }
    }

    fn classifier_block(&self, outputs: usize, last: LayerSpec) -> Vec<LayerSpec> {
        let mut head = Vec::new();
        for &h in &self.classifier_hidden {
            head.push(LayerSpec::Dense {
                units: h,
                l2: self.l2_weight,
            });
            head.push(LayerSpec::Relu);
        }
        head.push(LayerSpec::Dense {
            units: outputs,
            l2: self.l2_weight,
        });
        head.push(last);
        head
    }

    /// Layer list: per feature block an entry convolution with `stride` and
    /// a conv-relu-conv residual unit; global average pooling and a
    /// per-channel affine standardizer; then the variant's classifier
    /// block(s).
    pub fn layers(&self) -> Result<Vec<LayerSpec>> {
        self.validate()?;
        let mut layers = Vec::new();
        for &f in &self.feature_filters {
            let conv = |stride| LayerSpec::Conv1d {
                filters: f,
                kernel: self.kernel,
                stride,
                l2: 0.0,
            };
            layers.push(conv(self.stride));
            layers.push(LayerSpec::Relu);
            layers.push(LayerSpec::Residual(vec![conv(1), LayerSpec::Relu, conv(1)]));
            layers.push(LayerSpec::Relu);
        }
        layers.push(LayerSpec::GlobalAvgPool);
        layers.push(LayerSpec::ChannelAffine);
        match self.variant {
            Variant::Disc => layers.extend(self.classifier_block(1, LayerSpec::Sigmoid)),
            Variant::Dclass => {
                layers.extend(self.classifier_block(self.n_authorized + 1, LayerSpec::Softmax))
            }
            Variant::Ova => layers.push(LayerSpec::Parallel(
                (0..self.n_authorized)
                    .map(|_| self.classifier_block(1, LayerSpec::Sigmoid))
                    .collect(),
            )),
        }
        Ok(layers)
    }
}

/// Untrained network for `spec` on packets of `packet_len` symbols.
pub fn build_discriminator(spec: &DiscriminatorSpec, packet_len: usize, rng: &mut Rng) -> Result<Network> {
    Network::new(spec.layers()?, &spec.input_shape(packet_len), rng)
}
