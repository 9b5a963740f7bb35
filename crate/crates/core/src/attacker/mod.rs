//! The impersonator: a Gaussian policy over per-sample IQ distortions,
//! trained by policy gradient from 1-bit accept/reject feedback.

mod policy;
mod reward;

use std::cell::Cell;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use policy::{
    clip_action, gaussian_entropy, gaussian_log_prob, mean_reconstruction_rms, policy_step, pretrain_identity,
    sample_distorted, squash_log_var, sync_rollout, GaussianRecurrentPolicy, PolicyState, PolicyStateDef,
    PretrainReport, RolloutPolicy, StepDistributions, StepOutcome, LOG_VAR_MAX, LOG_VAR_MIN,
};
pub use reward::{
    complete_with_rollout, estimate_rewards, policy_gradient, reward_to_go, sample_trajectory, step_weights,
    surrogate_objective, EntropyCredit, Trajectory,
};

use crate::error::{Error, Result};
use crate::neural::{adam_step, AdamState, AnnealSchedule};
use crate::rng::Rng;
use crate::signal::IqSignal;

/// Optional variance-reduction baseline `b(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    #[default]
    None,
    /// Reserved; no learned baseline is implemented and selecting it is an error.
    Learned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    /// Maximum distortion relative to each sample's magnitude.
    pub epsilon: f64,
    pub gamma: f64,
    /// η, weight of the per-step entropy bonus.
    pub entropy_coef: f64,
    pub entropy_credit: EntropyCredit,
    /// Roll-out completions per step (M).
    pub mc_searches: usize,
    /// Outer iterations (K).
    pub iterations: usize,
    /// Generator updates between roll-out synchronizations.
    pub g_steps: usize,
    /// Learning rate as a function of the outer iteration index.
    pub schedule: AnnealSchedule,
    pub baseline: Baseline,
    pub state_def: PolicyStateDef,
    pub hidden: usize,
    /// Initial log-variance of both action components. Just under the cap
    /// so the variance head starts with a live gradient; at the cap most
    /// draws clip to the corners of the distortion box.
    pub init_log_var: f64,
    /// Fresh transmissions per fooling-rate evaluation.
    pub eval_packets: usize,
    pub pretrain_packets: usize,
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            epsilon: 0.2,
            gamma: 1.0,
            entropy_coef: 1000.0,
            entropy_credit: EntropyCredit::Direct,
            mc_searches: 1,
            iterations: 300,
            g_steps: 1,
            schedule: AnnealSchedule::default(),
            baseline: Baseline::None,
            state_def: PolicyStateDef::Recurrent,
            hidden: 100,
            init_log_var: 1.9,
            eval_packets: 100,
            pretrain_packets: 64,
            pretrain_epochs: 30,
            pretrain_lr: 0.003,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma must lie in [0, 1]"));
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return Err(Error::invalid("entropy_coef must be non-negative"));
        }
        if self.mc_searches == 0 || self.g_steps == 0 || self.hidden == 0 || self.eval_packets == 0 {
            return Err(Error::invalid("mc_searches, g_steps, hidden and eval_packets must be positive"));
        }
        if !(LOG_VAR_MIN..=LOG_VAR_MAX).contains(&self.init_log_var) {
            return Err(Error::invalid(format!(
                "init_log_var must lie in [{LOG_VAR_MIN}, {LOG_VAR_MAX}]"
            )));
        }
        if self.baseline == Baseline::Learned {
            return Err(Error::invalid("the learned baseline is not implemented; use baseline = \"none\""));
        }
        self.schedule.validate()
    }

    /// Training feedback queries consumed by one generator update.
    pub fn feedbacks_per_update(&self, packet_len: usize) -> u64 {
        (packet_len.saturating_sub(1) * self.mc_searches + 1) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based outer iteration.
    pub iteration: usize,
    pub fooling_rate: f64,
    /// Cumulative training feedback queries (evaluation queries excluded).
    pub feedback_count: u64,
    /// Cumulative generator gradient updates.
    pub updates: u64,
    /// Mean per-step reward of the iteration's training trajectories.
    pub mean_reward: f64,
    pub wall_seconds: f64,
}

/// Fooling-rate history of one attack.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FoolingCurve {
    /// Fooling rate before any update (the pretrained, near-identity policy).
    pub initial: f64,
    /// One record per completed outer iteration.
    pub records: Vec<IterationRecord>,
}

impl FoolingCurve {
    /// Fooling rates of the completed iterations, in order.
    pub fn rates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fooling_rate).collect()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Callbacks binding the attack to its environment.
pub struct AttackHooks<'a> {
    /// A fresh undistorted adversary packet (the states z).
    pub packet: &'a mut dyn FnMut(&mut Rng) -> Result<IqSignal>,
    /// The 1-bit oracle: transmit the signal and report accept/reject.
    pub feedback: &'a mut dyn FnMut(&IqSignal) -> Result<bool>,
    /// Fooling rate of the current policy on fresh transmissions.
    pub evaluate: &'a mut dyn FnMut(&GaussianRecurrentPolicy, &mut Rng) -> Result<f64>,
    /// Checked after each iteration's record is appended; `true` ends the attack.
    pub stop: Option<&'a mut dyn FnMut(&FoolingCurve) -> bool>,
}

/// Runs the policy-gradient attack loop.
///
/// Each outer iteration performs `g_steps` generator updates, each on one
/// trajectory whose per-step rewards come from the roll-out policy and the
/// feedback oracle, then copies the generator into the roll-out policy and
/// records an evaluation.
pub fn run_attack(
    policy: &mut GaussianRecurrentPolicy,
    rollout: &mut RolloutPolicy,
    config: &AttackConfig,
    hooks: AttackHooks<'_>,
    rng: &mut Rng,
) -> Result<FoolingCurve> {
    config.validate()?;
    let AttackHooks { packet, feedback, evaluate, mut stop } = hooks;
    let start = Instant::now();
    let mut adam = AdamState::for_network(policy.network());
    let feedback_count = Cell::new(0u64);
    let mut updates = 0u64;
    let mut counted = |s: &IqSignal| -> Result<bool> {
        feedback_count.set(feedback_count.get() + 1);
        feedback(s)
    };

    let mut eval_rng = rng.fork(0);
    let mut train_rng = rng.fork(1);
    let mut curve = FoolingCurve {
        initial: evaluate(policy, &mut eval_rng)?,
        records: Vec::with_capacity(config.iterations),
    };

    for i in 1..=config.iterations {
        let lr = AnnealSchedule::constant(config.schedule.lr((i - 1) as u64));
        let mut reward_sum = 0.0;
        let mut reward_n = 0usize;
        for _ in 0..config.g_steps {
            let z = packet(&mut train_rng)?;
            if z.len() != policy.packet_len() {
                return Err(Error::invalid(format!(
                    "packet has {} samples, policy expects {}",
                    z.len(),
                    policy.packet_len()
                )));
            }
            let (dists, cache) = policy.distributions(z.samples())?;
            let mut tr = sample_trajectory(z.samples(), &dists, config.epsilon, &mut train_rng);
            tr.rewards = estimate_rewards(
                &tr,
                rollout,
                &mut counted,
                config.mc_searches,
                z.sample_rate_hz(),
                config.epsilon,
                &mut train_rng,
            )?;
            reward_sum += tr.rewards.iter().sum::<f64>();
            reward_n += tr.rewards.len();
            let w = step_weights(&tr, config.gamma, config.entropy_coef, config.entropy_credit)?;
            let mut g = policy_gradient(policy, &tr, &dists, &cache, &w, config.entropy_coef)?;
            g.scale(-1.0);
            adam_step(policy.network_mut(), &g, &mut adam, &lr)?;
            updates += 1;
        }
        sync_rollout(policy, rollout)?;
        curve.records.push(IterationRecord {
            iteration: i,
            fooling_rate: evaluate(policy, &mut eval_rng)?,
            feedback_count: feedback_count.get(),
            updates,
            mean_reward: reward_sum / reward_n.max(1) as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        if let Some(stop) = stop.as_mut() {
            if stop(&curve) {
                break;
            }
        }
    }
    Ok(curve)
}
