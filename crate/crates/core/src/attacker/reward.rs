use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::policy::{
    clip_action, gaussian_entropy, gaussian_log_prob, GaussianRecurrentPolicy, RolloutPolicy, StepDistributions,
};
use crate::error::{Error, Result};
use crate::neural::{ForwardCache, Gradients};
use crate::rng::Rng;
use crate::signal::IqSignal;

/// Γ steps of states, actions and (once estimated) rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Undistorted input samples z(t).
    pub states: Vec<Complex64>,
    /// Unclipped draws; log-probabilities refer to these.
    pub raw_actions: Vec<[f64; 2]>,
    /// Clipped actions actually transmitted.
    pub actions: Vec<[f64; 2]>,
    pub log_probs: Vec<f64>,
    pub entropies: Vec<f64>,
    /// Empty until [`estimate_rewards`] fills it.
    pub rewards: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn signal_from(actions: &[[f64; 2]], rate: f64) -> Result<IqSignal> {
        IqSignal::new(actions.iter().map(|a| Complex64::new(a[0], a[1])).collect(), rate)
    }

    /// The transmitted signal A.
    pub fn signal(&self, sample_rate_hz: f64) -> Result<IqSignal> {
        Self::signal_from(&self.actions, sample_rate_hz)
    }
}

/// Samples a trajectory from `dists` for the packet `states`.
pub fn sample_trajectory(states: &[Complex64], dists: &StepDistributions, epsilon: f64, rng: &mut Rng) -> Trajectory {
    let n = states.len();
    let mut tr = Trajectory {
        states: states.to_vec(),
        raw_actions: Vec::with_capacity(n),
        actions: Vec::with_capacity(n),
        log_probs: Vec::with_capacity(n),
        entropies: Vec::with_capacity(n),
        rewards: Vec::new(),
    };
    for (t, &s) in states.iter().enumerate() {
        let raw = dists.sample(t, rng);
        tr.actions.push(clip_action(raw, s, epsilon));
        tr.log_probs.push(gaussian_log_prob(raw, dists.means[t], dists.log_vars[t]));
        tr.entropies.push(gaussian_entropy(dists.log_vars[t]));
        tr.raw_actions.push(raw);
    }
    tr
}

/// `A_t`: the first `t` transmitted actions of `prefix`, the rest drawn
/// (and clipped) from the roll-out distributions.
pub fn complete_with_rollout(
    prefix: &Trajectory,
    t: usize,
    rollout: &StepDistributions,
    epsilon: f64,
    sample_rate_hz: f64,
    rng: &mut Rng,
) -> Result<IqSignal> {
    let n = prefix.len();
    if t == 0 || t > n {
        return Err(Error::invalid(format!("prefix length {t} outside 1..={n}")));
    }
    if rollout.len() != n {
        return Err(Error::invalid("roll-out distributions do not cover the trajectory"));
    }
    let mut a = prefix.actions[..t].to_vec();
    for k in t..n {
        a.push(clip_action(rollout.sample(k, rng), prefix.states[k], epsilon));
    }
    Trajectory::signal_from(&a, sample_rate_hz)
}

/// Per-step rewards from 1-bit feedback: `r_Γ` is the verdict on A itself;
/// for `t < Γ`, `r_t` averages the verdicts on `m` roll-out completions.
pub fn estimate_rewards(
    trajectory: &Trajectory,
    rollout: &RolloutPolicy,
    feedback: &mut dyn FnMut(&IqSignal) -> Result<bool>,
    m: usize,
    sample_rate_hz: f64,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("need at least one Monte-Carlo search"));
    }
    let n = trajectory.len();
    let (dists, _) = rollout.policy().distributions(&trajectory.states)?;
    let mut rewards = Vec::with_capacity(n);
    for t in 1..n {
        let mut hits = 0usize;
        for _ in 0..m {
            let a_t = complete_with_rollout(trajectory, t, &dists, epsilon, sample_rate_hz, rng)?;
            hits += usize::from(feedback(&a_t)?);
        }
        rewards.push(hits as f64 / m as f64);
    }
    rewards.push(if feedback(&trajectory.signal(sample_rate_hz)?)? { 1.0 } else { 0.0 });
    Ok(rewards)
}

/// How the entropy bonus enters the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyCredit {
    /// `r̃_t = r_t + η·H_t` inside the reward-to-go weights, plus the exact
    /// gradient of `η·Σ H_t`.
    RewardToGo,
    /// Only the exact gradient of `η·Σ H_t`; the weights use `r_t` alone.
    /// States never depend on actions here, so the bonus inside the weights
    /// only adds zero-mean noise.
    Direct,
}

/// Discounted reward-to-go `Q_t = Σ_{t'≥t} γ^{t'−t} r̃_{t'}`, one backward pass.
pub fn reward_to_go(rewards: &[f64], bonus: &[f64], gamma: f64) -> Vec<f64> {
    let mut q = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + bonus.get(t).copied().unwrap_or(0.0) + gamma * acc;
        q[t] = acc;
    }
    q
}

/// Score-function weights for each step (reward-to-go minus baseline).
pub fn step_weights(trajectory: &Trajectory, gamma: f64, entropy_coef: f64, credit: EntropyCredit) -> Result<Vec<f64>> {
    if trajectory.rewards.len() != trajectory.len() {
        return Err(Error::InvalidState("trajectory rewards have not been estimated".into()));
    }
    let bonus: Vec<f64> = match credit {
        EntropyCredit::RewardToGo => trajectory.entropies.iter().map(|h| entropy_coef * h).collect(),
        EntropyCredit::Direct => Vec::new(),
    };
    Ok(reward_to_go(&trajectory.rewards, &bonus, gamma))
}

/// `Σ_t w_t·log G_θ(a_t|s_t) + η·Σ_t H(G_θ(·|s_t))` evaluated at the
/// current parameters with the weights held fixed; its gradient is ĝ.
pub fn surrogate_objective(
    policy: &GaussianRecurrentPolicy,
    trajectory: &Trajectory,
    weights: &[f64],
    entropy_coef: f64,
) -> Result<f64> {
    let (d, _) = policy.distributions(&trajectory.states)?;
    let mut j = 0.0;
    for t in 0..trajectory.len() {
        j += weights[t] * gaussian_log_prob(trajectory.raw_actions[t], d.means[t], d.log_vars[t]);
        j += entropy_coef * gaussian_entropy(d.log_vars[t]);
    }
    Ok(j)
}

/// ĝ = Σ_t ∇log G_θ(a_t|s_t)·w_t + η·Σ_t ∇H_t (ascent direction).
///
/// `dists`/`cache` must come from `policy.distributions(&trajectory.states)`
/// at the current parameters.
pub fn policy_gradient(
    policy: &GaussianRecurrentPolicy,
    trajectory: &Trajectory,
    dists: &StepDistributions,
    cache: &ForwardCache,
    weights: &[f64],
    entropy_coef: f64,
) -> Result<Gradients> {
    let n = trajectory.len();
    if weights.len() != n || dists.len() != n {
        return Err(Error::invalid("weights and distributions must cover the trajectory"));
    }
    let mut d_mean = Vec::with_capacity(n);
    let mut d_lv = Vec::with_capacity(n);
    for t in 0..n {
        let (a, m, lv, w) = (trajectory.raw_actions[t], dists.means[t], dists.log_vars[t], weights[t]);
        let mut gm = [0.0; 2];
        let mut gl = [0.0; 2];
        for d in 0..2 {
            let inv_var = (-lv[d]).exp();
            let e = a[d] - m[d];
            gm[d] = -w * e * inv_var;
            gl[d] = -(w * (0.5 * e * e * inv_var - 0.5) + 0.5 * entropy_coef);
        }
        d_mean.push(gm);
        d_lv.push(gl);
    }
    // `backward` works in the descent convention, so negate on the way out.
    let mut g = policy.backward(cache, dists, &d_mean, &d_lv)?;
    g.scale(-1.0);
    if !g.is_finite() {
        return Err(Error::NumericFailure("policy gradient is not finite".into()));
    }
    Ok(g)
}
