use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{
    adam_step, gated_recurrent_cell, AdamState, AnnealSchedule, ForwardCache, Gradients, LayerSpec,
    LstmParams, Network, Tensor,
};
use crate::rng::Rng;
use crate::signal::IqSignal;

pub const LOG_VAR_MIN: f64 = -10.0;
pub const LOG_VAR_MAX: f64 = 2.0;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// What the policy conditions on at step t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyStateDef {
    /// `[Re z(t), Im z(t)]` only.
    Memoryless,
    /// `[Re z(t), Im z(t)]` plus the recurrent hidden state `H_{t-1}`.
    Recurrent,
}

/// Clamps a raw head output to `[LOG_VAR_MIN, LOG_VAR_MAX]`.
///
/// A hard clamp rather than a sigmoid: once the variance sits at the cap the
/// entropy gradient is exactly zero, so the bonus stops pushing on weights the
/// mean head shares. Variance beyond the cap buys nothing anyway, since draws
/// already land on the clipping box corners.
#[inline]
pub fn squash_log_var(raw: f64) -> f64 {
    raw.clamp(LOG_VAR_MIN, LOG_VAR_MAX)
}

#[inline]
fn squash_slope(raw: f64) -> f64 {
    if raw > LOG_VAR_MIN && raw < LOG_VAR_MAX {
        1.0
    } else {
        0.0
    }
}

fn unsquash_log_var(lv: f64) -> Result<f64> {
    if !(LOG_VAR_MIN..=LOG_VAR_MAX).contains(&lv) {
        return Err(Error::invalid(format!(
            "initial log-variance {lv} must lie in [{LOG_VAR_MIN}, {LOG_VAR_MAX}]"
        )));
    }
    Ok(lv)
}

/// Log-density of a diagonal Gaussian at `a`.
pub fn gaussian_log_prob(a: [f64; 2], mean: [f64; 2], log_var: [f64; 2]) -> f64 {
    (0..2)
        .map(|d| -0.5 * (LN_2PI + log_var[d]) - (a[d] - mean[d]).powi(2) / (2.0 * log_var[d].exp()))
        .sum()
}

/// `½·Σ_d ln(2πe·var_d)`
pub fn gaussian_entropy(log_var: [f64; 2]) -> f64 {
    log_var.iter().map(|lv| 0.5 * (LN_2PI + 1.0 + lv)).sum()
}

/// Per-step Gaussian parameters over a whole packet.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistributions {
    pub means: Vec<[f64; 2]>,
    pub log_vars: Vec<[f64; 2]>,
    /// Unsquashed log-variance head outputs (needed for gradients).
    pub raw_log_vars: Vec<[f64; 2]>,
}

impl StepDistributions {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn sample(&self, t: usize, rng: &mut Rng) -> [f64; 2] {
        let (m, lv) = (self.means[t], self.log_vars[t]);
        [
            m[0] + (0.5 * lv[0]).exp() * rng.normal(),
            m[1] + (0.5 * lv[1]).exp() * rng.normal(),
        ]
    }
}

/// Recurrent state carried between single steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub sample: Complex64,
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Unclipped draw from the step distribution.
    pub action: [f64; 2],
    pub log_prob: f64,
    pub entropy: f64,
    pub mean: [f64; 2],
    pub log_var: [f64; 2],
    /// `(hidden, cell)` after consuming this step's sample.
    pub next_hidden: (Vec<f64>, Vec<f64>),
}

/// Generator G_θ: a per-sample 2-D diagonal Gaussian over distorted IQ
/// values. Head outputs per step are `[μ_re, μ_im, ρ_re, ρ_im]` with
/// `log σ² = squash_log_var(ρ)`.
#[derive(Debug, Clone)]
pub struct GaussianRecurrentPolicy {
    pub state_def: PolicyStateDef,
    pub hidden: usize,
    net: Network,
}

impl GaussianRecurrentPolicy {
    /// Fresh policy whose variance head starts at `init_log_var` for every
    /// input (its weights are zeroed, bias set accordingly).
    pub fn new(state_def: PolicyStateDef, hidden: usize, init_log_var: f64, packet_len: usize, rng: &mut Rng) -> Result<Self> {
        if hidden == 0 || packet_len == 0 {
            return Err(Error::invalid("policy hidden size and packet length must be positive"));
        }
        let rho0 = unsquash_log_var(init_log_var)?;
        let head = LayerSpec::Dense { units: 4, l2: 0.0 };
        let specs = match state_def {
            PolicyStateDef::Recurrent => vec![LayerSpec::GatedRecurrentCell { hidden }, head],
            PolicyStateDef::Memoryless => vec![LayerSpec::Dense { units: hidden, l2: 0.0 }, LayerSpec::Tanh, head],
        };
        let mut net = Network::new(specs, &[packet_len, 2], rng)?;
        {
            let mut params = net.params_mut();
            let n = params.len();
            let (w, b) = params.split_at_mut(n - 1);
            let w = &mut w[n - 2];
            w[2 * hidden..].iter_mut().for_each(|v| *v = 0.0);
            b[0][2] = rho0;
            b[0][3] = rho0;
        }
        Ok(GaussianRecurrentPolicy { state_def, hidden, net })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub(crate) fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    /// Overwrites all parameters (flattened in [`Network::flat_params`] order).
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        self.net.set_flat_params(values)
    }

    pub fn packet_len(&self) -> usize {
        self.net.input_shape()[0]
    }

    fn input(&self, states: &[Complex64]) -> Result<Tensor> {
        if states.len() != self.packet_len() {
            return Err(Error::invalid(format!(
                "policy expects {} states, got {}",
                self.packet_len(),
                states.len()
            )));
        }
        Tensor::new(vec![states.len(), 2], states.iter().flat_map(|z| [z.re, z.im]).collect())
    }

    fn unpack(out: &Tensor) -> Result<StepDistributions> {
        if !out.is_finite() {
            return Err(Error::NumericFailure("policy produced a non-finite output".into()));
        }
        let rows = out.data().chunks_exact(4);
        let mut d = StepDistributions {
            means: Vec::with_capacity(rows.len()),
            log_vars: Vec::with_capacity(rows.len()),
            raw_log_vars: Vec::with_capacity(rows.len()),
        };
        for r in rows {
            d.means.push([r[0], r[1]]);
            d.raw_log_vars.push([r[2], r[3]]);
            d.log_vars.push([squash_log_var(r[2]), squash_log_var(r[3])]);
        }
        Ok(d)
    }

    /// Step distributions for a whole packet in one forward pass. The
    /// state sequence depends only on the undistorted input, never on
    /// sampled actions, so this equals stepping through `policy_step`.
    pub fn distributions(&self, states: &[Complex64]) -> Result<(StepDistributions, ForwardCache)> {
        let (out, cache) = self.net.forward(&self.input(states)?)?;
        Ok((Self::unpack(&out)?, cache))
    }

    /// Parameter gradients given per-step gradients with respect to the
    /// means and the squashed log-variances.
    pub(crate) fn backward(
        &self,
        cache: &ForwardCache,
        dists: &StepDistributions,
        d_mean: &[[f64; 2]],
        d_log_var: &[[f64; 2]],
    ) -> Result<Gradients> {
        let n = dists.len();
        let mut g = Vec::with_capacity(4 * n);
        for t in 0..n {
            let raw = dists.raw_log_vars[t];
            g.extend_from_slice(&[
                d_mean[t][0],
                d_mean[t][1],
                d_log_var[t][0] * squash_slope(raw[0]),
                d_log_var[t][1] * squash_slope(raw[1]),
            ]);
        }
        Ok(self.net.backward(cache, &Tensor::new(vec![n, 4], g)?)?.0)
    }

    fn head(&self, features: &[f64]) -> [f64; 4] {
        let p = self.net.params();
        let (w, b) = (p[p.len() - 2], p[p.len() - 1]);
        let k = features.len();
        let mut out = [0.0; 4];
        for (u, o) in out.iter_mut().enumerate() {
            *o = b[u] + w[u * k..(u + 1) * k].iter().zip(features).map(|(a, x)| a * x).sum::<f64>();
        }
        out
    }

    /// Zero recurrent state for the first sample of a packet.
    pub fn initial_state(&self, sample: Complex64) -> PolicyState {
        let n = if self.state_def == PolicyStateDef::Recurrent { self.hidden } else { 0 };
        PolicyState {
            sample,
            hidden: vec![0.0; n],
            cell: vec![0.0; n],
        }
    }

    /// Features feeding the head for one state, plus the next `(h, c)`.
    fn features(&self, state: &PolicyState) -> Result<(Vec<f64>, (Vec<f64>, Vec<f64>))> {
        let x = [state.sample.re, state.sample.im];
        let p = self.net.params();
        match self.state_def {
            PolicyStateDef::Recurrent => {
                let lstm = LstmParams {
                    input: 2,
                    hidden: self.hidden,
                    w_x: p[0].to_vec(),
                    w_h: p[1].to_vec(),
                    bias: p[2].to_vec(),
                };
                let (h, c) = gated_recurrent_cell(&x, &state.hidden, &state.cell, &lstm)?;
                Ok((h.clone(), (h, c)))
            }
            PolicyStateDef::Memoryless => {
                let (w, b) = (p[0], p[1]);
                let f = (0..self.hidden)
                    .map(|u| (b[u] + w[2 * u] * x[0] + w[2 * u + 1] * x[1]).tanh())
                    .collect();
                Ok((f, (Vec::new(), Vec::new())))
            }
        }
    }

    /// Number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }
}

/// One step `a_t ~ G_θ(s_t)`.
pub fn policy_step(policy: &GaussianRecurrentPolicy, state: &PolicyState, rng: &mut Rng) -> Result<StepOutcome> {
    let (feat, next_hidden) = policy.features(state)?;
    let o = policy.head(&feat);
    if o.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("policy produced a non-finite output".into()));
    }
    let mean = [o[0], o[1]];
    let log_var = [squash_log_var(o[2]), squash_log_var(o[3])];
    let action = [
        mean[0] + (0.5 * log_var[0]).exp() * rng.normal(),
        mean[1] + (0.5 * log_var[1]).exp() * rng.normal(),
    ];
    Ok(StepOutcome {
        action,
        log_prob: gaussian_log_prob(action, mean, log_var),
        entropy: gaussian_entropy(log_var),
        mean,
        log_var,
        next_hidden,
    })
}

/// Component-wise box clip of half-width `ε·|s|` around the input sample.
pub fn clip_action(raw: [f64; 2], sample: Complex64, epsilon: f64) -> [f64; 2] {
    let r = epsilon * sample.norm();
    let s = [sample.re, sample.im];
    [
        (s[0] + r).min(raw[0].max(s[0] - r)),
        (s[1] + r).min(raw[1].max(s[1] - r)),
    ]
}

/// Frozen copy G_β used to complete partial trajectories.
#[derive(Debug, Clone)]
pub struct RolloutPolicy {
    policy: GaussianRecurrentPolicy,
}

impl RolloutPolicy {
    pub fn from_policy(policy: &GaussianRecurrentPolicy) -> Self {
        RolloutPolicy { policy: policy.clone() }
    }

    pub fn policy(&self) -> &GaussianRecurrentPolicy {
        &self.policy
    }

    /// `β ← θ`
    pub fn sync(&mut self, from: &GaussianRecurrentPolicy) -> Result<()> {
        self.policy.net.copy_params_from(&from.net)
    }
}

/// `β ← θ`
pub fn sync_rollout(policy: &GaussianRecurrentPolicy, rollout: &mut RolloutPolicy) -> Result<()> {
    rollout.sync(policy)
}

/// Clipped actions sampled from `policy` for a packet, as a signal.
pub fn sample_distorted(policy: &GaussianRecurrentPolicy, packet: &IqSignal, epsilon: f64, rng: &mut Rng) -> Result<IqSignal> {
    let (d, _) = policy.distributions(packet.samples())?;
    let out = packet
        .samples()
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let a = clip_action(d.sample(t, rng), s, epsilon);
            Complex64::new(a[0], a[1])
        })
        .collect();
    packet.with_samples(out)
}

/// Result of identity pretraining.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainReport {
    pub epoch_losses: Vec<f64>,
    /// RMS of `mean − input` over all of `signals` after training.
    pub final_rms: f64,
}

/// RMS reconstruction error of the policy mean over `signals`.
pub fn mean_reconstruction_rms(policy: &GaussianRecurrentPolicy, signals: &[IqSignal]) -> Result<f64> {
    let mut sq = 0.0;
    let mut n = 0usize;
    for s in signals {
        let (d, _) = policy.distributions(s.samples())?;
        for (m, z) in d.means.iter().zip(s.samples()) {
            sq += (m[0] - z.re).powi(2) + (m[1] - z.im).powi(2);
            n += 1;
        }
    }
    Ok((sq / n as f64).sqrt())
}

/// Trains the mean head to reproduce its input (an autoencoder), so the
/// attack starts from zero distortion. The variance head is untouched.
pub fn pretrain_identity(
    policy: &mut GaussianRecurrentPolicy,
    signals: &[IqSignal],
    epochs: usize,
    learning_rate: f64,
    rng: &mut Rng,
) -> Result<PretrainReport> {
    if signals.is_empty() {
        return Err(Error::invalid("pretraining needs at least one signal"));
    }
    let schedule = AnnealSchedule::constant(learning_rate);
    schedule.validate()?;
    let mut adam = AdamState::for_network(&policy.net);
    let mut order: Vec<usize> = (0..signals.len()).collect();
    let mut epoch_losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for &i in &order {
            let z = signals[i].samples();
            let (d, cache) = policy.distributions(z)?;
            let n = z.len() as f64;
            let mut d_mean = Vec::with_capacity(z.len());
            let mut loss = 0.0;
            for (m, s) in d.means.iter().zip(z) {
                let e = [m[0] - s.re, m[1] - s.im];
                loss += (e[0] * e[0] + e[1] * e[1]) / (2.0 * n);
                d_mean.push([e[0] / n, e[1] / n]);
            }
            if !loss.is_finite() {
                return Err(Error::TrainingFailure(format!("identity pretraining diverged at epoch {epoch}")));
            }
            total += loss;
            let zero = vec![[0.0; 2]; z.len()];
            let g = policy.backward(&cache, &d, &d_mean, &zero)?;
            if !g.is_finite() {
                return Err(Error::TrainingFailure(format!("non-finite pretraining gradient at epoch {epoch}")));
            }
            adam_step(&mut policy.net, &g, &mut adam, &schedule)?;
        }
        epoch_losses.push(total / signals.len() as f64);
    }
    let final_rms = mean_reconstruction_rms(policy, signals)?;
    Ok(PretrainReport { epoch_losses, final_rms })
}
