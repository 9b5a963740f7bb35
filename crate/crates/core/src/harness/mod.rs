//! Seeded end-to-end experiments: SNR sweep, ε sweep, transferability, and
//! single attacks, plus CSV export and the text report.

mod config;
mod export;

pub use config::{ConvergenceRule, ExperimentConfig, ExperimentKind};
pub use export::{
    export_csv, format_sig6, read_summary, read_transfer, render_report, write_history, write_summary,
    write_timing, write_transfer, SummaryRow, TransferRow, HISTORY_FILE, SUMMARY_FILE, TIMING_FILE, TRANSFER_FILE,
};

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attacker::{
    pretrain_identity, run_attack, sample_distorted, AttackConfig, AttackHooks, FoolingCurve,
    GaussianRecurrentPolicy, RolloutPolicy,
};
use crate::authenticator::{build_training_set, train_authenticator, TrainedAuthenticator, Variant};
use crate::error::{Error, Result};
use crate::impairments::{sample_population, ChannelKind, Link, Population, TransmitterProfile};
use crate::rng::{derive_seed, Rng};
use crate::signal::IqSignal;

/// Coordinates of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub channel: ChannelKind,
    pub snr_db: f64,
    pub epsilon: f64,
    /// Attacked discriminator, e.g. `disc_1`.
    pub target: String,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ch = match self.channel {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Dynamic => "dynamic",
        };
        write!(
            f,
            "{} seed={} channel={} snr={} eps={} target={}",
            self.experiment.name(),
            self.seed,
            ch,
            self.snr_db,
            self.epsilon,
            self.target
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    /// Held-out authorized-vs-outlier accuracy of the attacked discriminator.
    pub heldout_accuracy: f64,
    pub initial_fooling: f64,
    /// Mean fooling rate over the final convergence window.
    pub final_fooling: f64,
    pub converged: bool,
    /// Generator updates at the iteration where the plateau rule fired (or
    /// the budget ran out).
    pub convergence_updates: u64,
    pub curve: FoolingCurve,
    pub wall_seconds: f64,
}

impl CellResult {
    pub fn feedback_count(&self) -> u64 {
        self.curve.last().map_or(0, |r| r.feedback_count)
    }
}

/// Fooling rates of the generators trained against `train_ids` (rows) on
/// every discriminator in `test_ids` (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl TransferMatrix {
    pub fn get(&self, train_id: &str, test_id: &str) -> Option<f64> {
        let r = self.train_ids.iter().position(|t| t == train_id)?;
        let c = self.test_ids.iter().position(|t| t == test_id)?;
        Some(self.entries[r][c])
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub cells: Vec<CellResult>,
    pub transfers: Vec<TransferMatrix>,
}

impl ExperimentResults {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.transfers.is_empty()
    }
}

/// Number of completed iterations after which the plateau rule first
/// holds. Never fires before `rule.window` iterations.
///
/// A plateau only counts once its mean has risen at least `tolerance` above
/// `initial`: the attack typically sits at its starting rate for tens of
/// iterations before the policy finds the acceptance region, and that flat
/// start is not convergence. Cells that never improve run to the budget.
pub fn convergence_point(initial: f64, rates: &[f64], rule: &ConvergenceRule) -> Option<usize> {
    (rule.window..=rates.len()).find(|&n| {
        let w = &rates[n - rule.window..n];
        plateau(w, rule.tolerance) && w.iter().sum::<f64>() / w.len() as f64 - initial >= rule.tolerance
    })
}

fn plateau(window: &[f64], tolerance: f64) -> bool {
    let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo < tolerance
}

/// Mean of the last `window` fooling rates; the initial rate when no
/// iteration ran.
pub fn final_fooling(curve: &FoolingCurve, window: usize) -> f64 {
    let rates = curve.rates();
    if rates.is_empty() {
        return curve.initial;
    }
    let tail = &rates[rates.len().saturating_sub(window.max(1))..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Prefixes the cell coordinates onto an error message.
fn in_cell(key: &str, e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{key}: {m}")),
        Error::InvalidState(m) => Error::InvalidState(format!("{key}: {m}")),
        Error::TrainingFailure(m) => Error::TrainingFailure(format!("{key}: {m}")),
        Error::NumericFailure(m) => Error::NumericFailure(format!("{key}: {m}")),
        other => other,
    }
}

fn kind_code(kind: ChannelKind) -> u64 {
    match kind {
        ChannelKind::Awgn => 0,
        ChannelKind::Dynamic => 1,
    }
}

fn variant_code(variant: Variant) -> u64 {
    match variant {
        Variant::Disc => 0,
        Variant::Dclass => 1,
        Variant::Ova => 2,
    }
}

// Sub-stream labels for derive_seed.
const POPULATION: u64 = 1;
const DISCRIMINATOR: u64 = 2;
const PRETRAIN: u64 = 3;
const ATTACK: u64 = 4;
const TRANSFER_EVAL: u64 = 5;

/// Link for a channel variant at one SNR.
pub fn link_for(config: &ExperimentConfig, kind: ChannelKind, snr_db: f64) -> Link {
    let mut link = config.link;
    link.channel.kind = kind;
    link.channel.snr_db = snr_db;
    link
}

/// Authorized devices, outliers and the adversary for one seed.
pub fn population_for(config: &ExperimentConfig, seed: u64) -> Result<Population> {
    let mut rng = Rng::new(derive_seed(seed, &[POPULATION]));
    sample_population(config.n_authorized, config.n_outliers, config.guard_band, &mut rng)
}

/// Trains a discriminator of `variant` on `link`; returns it with its
/// held-out accuracy. `replica` distinguishes otherwise identical targets.
pub fn train_target(
    config: &ExperimentConfig,
    population: &Population,
    link: &Link,
    variant: Variant,
    replica: u64,
    seed: u64,
) -> Result<(TrainedAuthenticator, f64)> {
    let mut rng = Rng::new(derive_seed(
        seed,
        &[DISCRIMINATOR, kind_code(link.channel.kind), link.channel.snr_db.to_bits(), variant_code(variant), replica],
    ));
    let data = build_training_set(&population.authorized, &population.outliers, link, config.n_per_tx, &mut rng)?;
    let (train, held_out) = data.split(config.held_out_frac, &mut rng)?;
    let mut spec = config.discriminator.clone();
    spec.variant = variant;
    spec.preprocessing = config.preprocessing_for(link.channel.kind);
    let (auth, _) = train_authenticator(&train, &spec, config.epochs, config.batch, &mut rng)?;
    let acc = if held_out.is_empty() { auth.accuracy(&train)? } else { auth.accuracy(&held_out)? };
    Ok((auth, acc))
}

/// A generator pretrained to reproduce its input. Depends only on the seed
/// and the link's packet format, so one copy serves every cell of a seed.
pub fn pretrained_policy(config: &ExperimentConfig, link: &Link, seed: u64) -> Result<GaussianRecurrentPolicy> {
    let mut rng = Rng::new(derive_seed(seed, &[PRETRAIN]));
    let a = &config.attack;
    let mut policy =
        GaussianRecurrentPolicy::new(a.state_def, a.hidden, a.init_log_var, link.packet_symbols, &mut rng)?;
    if a.pretrain_epochs > 0 {
        let signals = (0..a.pretrain_packets.max(1))
            .map(|_| link.random_packet(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        pretrain_identity(&mut policy, &signals, a.pretrain_epochs, a.pretrain_lr, &mut rng)?;
    }
    Ok(policy)
}

/// Fooling rate of `policy`'s transmissions over `n` fresh packets.
pub fn evaluate_policy(
    policy: &GaussianRecurrentPolicy,
    auth: &TrainedAuthenticator,
    link: &Link,
    adversary: &TransmitterProfile,
    epsilon: f64,
    n: usize,
    rng: &mut Rng,
) -> Result<f64> {
    let mut hits = 0usize;
    for _ in 0..n {
        let z = link.random_packet(rng)?;
        let x = sample_distorted(policy, &z, epsilon, rng)?;
        hits += usize::from(auth.authenticate(&link.transmit(&x, adversary, rng)?)?.accept);
    }
    Ok(hits as f64 / n as f64)
}

/// Attacks one discriminator from a copy of `pretrained` until the plateau
/// rule fires or `budget` iterations pass.
#[allow(clippy::too_many_arguments)]
pub fn attack_cell(
    config: &ExperimentConfig,
    attack: &AttackConfig,
    pretrained: &GaussianRecurrentPolicy,
    auth: &TrainedAuthenticator,
    link: &Link,
    adversary: &TransmitterProfile,
    key: CellKey,
    heldout_accuracy: f64,
) -> Result<(CellResult, GaussianRecurrentPolicy)> {
    let start = Instant::now();
    let label = key.to_string();
    let mut rng = Rng::new(derive_seed(
        key.seed,
        &[
            ATTACK,
            kind_code(key.channel),
            key.snr_db.to_bits(),
            key.epsilon.to_bits(),
            key.target.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64)),
        ],
    ));
    let mut attack = attack.clone();
    attack.epsilon = key.epsilon;
    attack.iterations = config.budget;
    let mut policy = pretrained.clone();
    let mut rollout = RolloutPolicy::from_policy(&policy);
    let mut channel_rng = rng.fork(2);
    let mut packets = |r: &mut Rng| link.random_packet(r);
    let mut feedback = |s: &IqSignal| -> Result<bool> {
        let rx = link.transmit(s, adversary, &mut channel_rng)?;
        Ok(auth.authenticate(&rx)?.accept)
    };
    let (eps, n_eval) = (attack.epsilon, attack.eval_packets);
    let mut evaluate =
        |p: &GaussianRecurrentPolicy, r: &mut Rng| evaluate_policy(p, auth, link, adversary, eps, n_eval, r);
    let rule = config.convergence;
    let mut stop = |c: &FoolingCurve| convergence_point(c.initial, &c.rates(), &rule).is_some();
    let hooks = AttackHooks {
        packet: &mut packets,
        feedback: &mut feedback,
        evaluate: &mut evaluate,
        stop: Some(&mut stop),
    };
    let curve = run_attack(&mut policy, &mut rollout, &attack, hooks, &mut rng).map_err(|e| in_cell(&label, e))?;
    let converged = convergence_point(curve.initial, &curve.rates(), &rule).is_some();
    let result = CellResult {
        key,
        heldout_accuracy,
        initial_fooling: curve.initial,
        final_fooling: final_fooling(&curve, rule.window),
        converged,
        convergence_updates: curve.last().map_or(0, |r| r.updates),
        curve,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((result, policy))
}

/// Receives one line per finished stage.
pub type Progress<'a> = &'a mut dyn FnMut(&str);

fn key(config: &ExperimentConfig, seed: u64, channel: ChannelKind, snr_db: f64, epsilon: f64, target: &str) -> CellKey {
    CellKey {
        experiment: config.experiment,
        seed,
        channel,
        snr_db,
        epsilon,
        target: target.to_string(),
    }
}

/// Per SNR and channel variant: train a disc discriminator, attack it with
/// the configured ε.
pub fn run_snr_sweep(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentResults> {
    config.validate()?;
    let mut out = ExperimentResults::default();
    for &seed in &config.seeds {
        let population = population_for(config, seed)?;
        let pretrained = pretrained_policy(config, &config.link, seed)?;
        for &kind in &config.channel_kinds {
            for &snr in &config.snr_list {
                let k = key(config, seed, kind, snr, config.attack.epsilon, "disc_1");
                let label = k.to_string();
                let link = link_for(config, kind, snr);
                let (auth, acc) =
                    train_target(config, &population, &link, Variant::Disc, 1, seed).map_err(|e| in_cell(&label, e))?;
                let (cell, _) =
                    attack_cell(config, &config.attack, &pretrained, &auth, &link, &population.adversary, k, acc)?;
                progress(&summary_line(&cell));
                out.cells.push(cell);
            }
        }
    }
    Ok(out)
}

/// Per SNR (simple channel only): one discriminator, attacked once per ε.
pub fn run_epsilon_sweep(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentResults> {
    config.validate()?;
    let mut out = ExperimentResults::default();
    for &seed in &config.seeds {
        let population = population_for(config, seed)?;
        let pretrained = pretrained_policy(config, &config.link, seed)?;
        for &snr in &config.snr_list {
            let link = link_for(config, ChannelKind::Awgn, snr);
            let label = key(config, seed, ChannelKind::Awgn, snr, f64::NAN, "disc_1").to_string();
            let (auth, acc) =
                train_target(config, &population, &link, Variant::Disc, 1, seed).map_err(|e| in_cell(&label, e))?;
            for &eps in &config.epsilon_list {
                let k = key(config, seed, ChannelKind::Awgn, snr, eps, "disc_1");
                let (cell, _) =
                    attack_cell(config, &config.attack, &pretrained, &auth, &link, &population.adversary, k, acc)?;
                progress(&summary_line(&cell));
                out.cells.push(cell);
            }
        }
    }
    Ok(out)
}

/// Trains disc/dclass/ova twice each on the same devices, attacks each disc
/// replica, and evaluates every converged generator against all six.
/// Uses the base channel of `config.link` and the first ε of the attack config.
pub fn run_transferability(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentResults> {
    config.validate()?;
    let mut out = ExperimentResults::default();
    let link = config.link;
    let kind = link.channel.kind;
    let snr = link.channel.snr_db;
    for &seed in &config.seeds {
        let population = population_for(config, seed)?;
        let pretrained = pretrained_policy(config, &link, seed)?;
        let mut targets = Vec::new();
        let mut accuracy = Vec::new();
        for variant in [Variant::Disc, Variant::Dclass, Variant::Ova] {
            for replica in 1..=2u64 {
                let id = format!("{}_{replica}", variant.name());
                let label = key(config, seed, kind, snr, config.attack.epsilon, &id).to_string();
                let (auth, acc) = train_target(config, &population, &link, variant, replica, seed)
                    .map_err(|e| in_cell(&label, e))?;
                progress(&format!("{label}: trained, held-out accuracy {}", format_sig6(acc)));
                targets.push((id, auth));
                accuracy.push(acc);
            }
        }
        let test_ids: Vec<String> = targets.iter().map(|(id, _)| id.clone()).collect();
        let mut matrix = TransferMatrix {
            seed,
            train_ids: Vec::new(),
            test_ids: test_ids.clone(),
            entries: Vec::new(),
        };
        for train_idx in [0usize, 1] {
            let (train_id, auth) = &targets[train_idx];
            let k = key(config, seed, kind, snr, config.attack.epsilon, train_id);
            let (cell, policy) = attack_cell(
                config,
                &config.attack,
                &pretrained,
                auth,
                &link,
                &population.adversary,
                k,
                accuracy[train_idx],
            )?;
            progress(&summary_line(&cell));
            let mut row = Vec::with_capacity(targets.len());
            for (_, test) in &targets {
                // the same transmissions for every column of a row
                let mut rng = Rng::new(derive_seed(seed, &[TRANSFER_EVAL, train_idx as u64]));
                row.push(evaluate_policy(
                    &policy,
                    test,
                    &link,
                    &population.adversary,
                    config.attack.epsilon,
                    config.transfer_eval_packets,
                    &mut rng,
                )?);
            }
            matrix.train_ids.push(train_id.clone());
            matrix.entries.push(row);
            out.cells.push(cell);
        }
        out.transfers.push(matrix);
    }
    Ok(out)
}

/// One attack on a disc discriminator over the base link of `config`.
pub fn run_single(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentResults> {
    config.validate()?;
    let mut out = ExperimentResults::default();
    let link = config.link;
    for &seed in &config.seeds {
        let population = population_for(config, seed)?;
        let pretrained = pretrained_policy(config, &link, seed)?;
        let k = key(config, seed, link.channel.kind, link.channel.snr_db, config.attack.epsilon, "disc_1");
        let label = k.to_string();
        let (auth, acc) =
            train_target(config, &population, &link, Variant::Disc, 1, seed).map_err(|e| in_cell(&label, e))?;
        let (cell, _) = attack_cell(config, &config.attack, &pretrained, &auth, &link, &population.adversary, k, acc)?;
        progress(&summary_line(&cell));
        out.cells.push(cell);
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentResults> {
    match config.experiment {
        ExperimentKind::SnrSweep => run_snr_sweep(config, progress),
        ExperimentKind::EpsilonSweep => run_epsilon_sweep(config, progress),
        ExperimentKind::Transferability => run_transferability(config, progress),
        ExperimentKind::Single => run_single(config, progress),
    }
}

fn summary_line(cell: &CellResult) -> String {
    format!(
        "{}: accuracy {} initial {} final {} after {} updates{}",
        cell.key,
        format_sig6(cell.heldout_accuracy),
        format_sig6(cell.initial_fooling),
        format_sig6(cell.final_fooling),
        cell.convergence_updates,
        if cell.converged { "" } else { " (budget)" }
    )
}
