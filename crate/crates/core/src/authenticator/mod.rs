//! The defender: deep-learning authenticators that accept or reject a
//! received packet from its transmitter fingerprint.

mod dataset;
mod spec;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use dataset::{build_training_set, AuthDataset, AuthRecord};
pub use spec::{build_discriminator, DiscriminatorSpec, Preprocessing, Variant};

use crate::error::{Error, Result};
use crate::neural::{
    adam_step, bce_grad, bce_loss, cross_entropy, cross_entropy_grad, load_network, save_network,
    AdamState, AnnealSchedule, Network, Tensor,
};
use crate::rng::Rng;
use crate::signal::{dft_magnitude_features, IqSignal};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Network input tensor for one received packet.
///
/// DFT magnitudes are scaled by `1/√N` so both modes see unit-scale values.
pub fn preprocess(signal: &IqSignal, mode: Preprocessing, packet_len: usize) -> Result<Tensor> {
    if signal.len() != packet_len {
        return Err(Error::invalid(format!(
            "expected {packet_len} samples, got {}",
            signal.len()
        )));
    }
    match mode {
        Preprocessing::RawIq => {
            let data = signal.samples().iter().flat_map(|z| [z.re, z.im]).collect();
            Tensor::new(vec![packet_len, 2], data)
        }
        Preprocessing::DftMagnitude => {
            let scale = 1.0 / (packet_len as f64).sqrt();
            let rows = dft_magnitude_features(signal)?;
            let data = rows.iter().flat_map(|r| [r[0] * scale, r[1] * scale]).collect();
            Tensor::new(vec![packet_len / 2, 2], data)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthDecision {
    pub score: f64,
    pub accept: bool,
}

impl AuthDecision {
    pub fn from_score(score: f64, threshold: f64) -> Self {
        AuthDecision {
            score,
            accept: score > threshold,
        }
    }
}

/// Summary of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean data loss of each epoch, excluding the L2 term.
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainedAuthenticator {
    pub spec: DiscriminatorSpec,
    pub threshold: f64,
    pub packet_len: usize,
    network: Network,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    threshold: f64,
    packet_len: usize,
    discriminator: DiscriminatorSpec,
}

impl TrainedAuthenticator {
    pub fn new(spec: DiscriminatorSpec, network: Network, packet_len: usize) -> Result<Self> {
        let expect_in = spec.input_shape(packet_len);
        if network.input_shape() != expect_in || network.output_shape() != [spec.n_outputs()] {
            return Err(Error::invalid("network shape does not match discriminator spec"));
        }
        Ok(TrainedAuthenticator {
            spec,
            threshold: DEFAULT_THRESHOLD,
            packet_len,
            network,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    /// Raw network outputs for one packet.
    pub fn outputs(&self, signal: &IqSignal) -> Result<Vec<f64>> {
        let x = preprocess(signal, self.spec.preprocessing, self.packet_len)?;
        Ok(self.network.predict(&x)?.into_data())
    }

    /// Authorized-ness score in `[0, 1]`.
    pub fn score(&self, signal: &IqSignal) -> Result<f64> {
        let out = self.outputs(signal)?;
        Ok(match self.spec.variant {
            Variant::Disc => out[0],
            Variant::Dclass => 1.0 - out[self.spec.n_authorized],
            Variant::Ova => out.iter().copied().fold(0.0, f64::max),
        })
    }

    /// The 1-bit authentication decision for one packet.
    ///
    /// For dclass the decision accepts when the arg-max class is an
    /// authorized one; for disc and ova it thresholds the score.
    pub fn authenticate(&self, signal: &IqSignal) -> Result<AuthDecision> {
        let out = self.outputs(signal)?;
        let d = match self.spec.variant {
            Variant::Disc => AuthDecision::from_score(out[0], self.threshold),
            Variant::Ova => {
                AuthDecision::from_score(out.iter().copied().fold(0.0, f64::max), self.threshold)
            }
            Variant::Dclass => {
                let outlier = out[self.spec.n_authorized];
                let best_auth = out[..self.spec.n_authorized].iter().copied().fold(0.0, f64::max);
                AuthDecision {
                    score: 1.0 - outlier,
                    accept: best_auth > outlier,
                }
            }
        };
        Ok(d)
    }

    /// Fraction of records whose decision matches their authorized label.
    pub fn accuracy(&self, data: &AuthDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::invalid("cannot evaluate on an empty dataset"));
        }
        let mut hits = 0usize;
        for r in &data.records {
            if self.authenticate(&r.signal)?.accept == r.authorized() {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }

    /// Writes `<stem>.rfnn` and a `<stem>.toml` sidecar holding the spec.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (net_path, side_path) = paths(stem);
        save_network(&net_path, &self.network)?;
        let side = Sidecar {
            threshold: self.threshold,
            packet_len: self.packet_len,
            discriminator: self.spec.clone(),
        };
        let text = toml::to_string(&side).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&side_path, text).map_err(|e| Error::io(side_path.clone(), e))
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (net_path, side_path) = paths(stem);
        let text = std::fs::read_to_string(&side_path).map_err(|e| Error::io(side_path.clone(), e))?;
        let side: Sidecar = toml::from_str(&text).map_err(|e| Error::Config {
            path: side_path.clone(),
            message: e.to_string(),
        })?;
        let mut auth = TrainedAuthenticator::new(side.discriminator, load_network(&net_path)?, side.packet_len)?;
        auth.threshold = side.threshold;
        Ok(auth)
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("rfnn"), stem.with_extension("toml"))
}

/// Fraction of `signals` accepted.
pub fn fooling_rate(auth: &TrainedAuthenticator, signals: &[IqSignal]) -> Result<f64> {
    if signals.is_empty() {
        return Err(Error::invalid("fooling rate needs at least one signal"));
    }
    let mut accepted = 0usize;
    for s in signals {
        if auth.authenticate(s)?.accept {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / signals.len() as f64)
}

/// Loss and output gradient for one record.
fn record_loss(variant: Variant, n_auth: usize, out: &[f64], class: Option<usize>) -> (f64, Vec<f64>) {
    match variant {
        Variant::Disc => {
            let y = if class.is_some() { 1.0 } else { 0.0 };
            (bce_loss(out[0], y), vec![bce_grad(out[0], y)])
        }
        Variant::Dclass => {
            let c = class.unwrap_or(n_auth);
            (cross_entropy(out, c), cross_entropy_grad(out, c))
        }
        Variant::Ova => {
            let mut loss = 0.0;
            let mut g = Vec::with_capacity(out.len());
            for (i, &p) in out.iter().enumerate() {
                let y = if class == Some(i) { 1.0 } else { 0.0 };
                loss += bce_loss(p, y);
                g.push(bce_grad(p, y));
            }
            (loss, g)
        }
    }
}

/// Trains a fresh discriminator with Adam (constant learning rate 0.001)
/// on mini-batches of `batch` records for `epochs` passes.
pub fn train_authenticator(
    data: &AuthDataset,
    spec: &DiscriminatorSpec,
    epochs: usize,
    batch: usize,
    rng: &mut Rng,
) -> Result<(TrainedAuthenticator, TrainReport)> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if batch == 0 {
        return Err(Error::invalid("batch must be positive"));
    }
    let packet_len = data.records[0].signal.len();
    let mut spec = spec.clone();
    spec.n_authorized = data.n_authorized;
    let mut net = build_discriminator(&spec, packet_len, &mut Rng::new(rng.next_seed()))?;
    let inputs = data
        .records
        .iter()
        .map(|r| preprocess(&r.signal, spec.preprocessing, packet_len))
        .collect::<Result<Vec<_>>>()?;
    // Fingerprints differ by ~1% in pooled feature level; standardizing the
    // pooled features over the training set makes that contrast O(1).
    net.standardize_affine(&inputs)?;
    let mut adam = AdamState::for_network(&net);
    let schedule = AnnealSchedule::constant(0.001);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let mut grads = net.zero_grads();
            for &i in chunk {
                let (out, cache) = net.forward(&inputs[i])?;
                let (loss, g) = record_loss(spec.variant, spec.n_authorized, out.data(), data.records[i].class);
                if !loss.is_finite() {
                    return Err(Error::TrainingFailure(format!(
                        "non-finite loss at epoch {epoch}, record {i}"
                    )));
                }
                total += loss;
                let (gi, _) = net.backward(&cache, &Tensor::new(out.shape().to_vec(), g)?)?;
                grads.add_assign(&gi);
            }
            grads.scale(1.0 / chunk.len() as f64);
            if !grads.is_finite() {
                return Err(Error::TrainingFailure(format!(
                    "non-finite gradient at epoch {epoch} (norm {})",
                    grads.norm()
                )));
            }
            adam_step(&mut net, &grads, &mut adam, &schedule)?;
        }
        epoch_losses.push(total / data.len() as f64);
    }
    let auth = TrainedAuthenticator::new(spec, net, packet_len)?;
    Ok((auth, TrainReport { epoch_losses }))
}
