use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacker::AttackConfig;
use crate::authenticator::{DiscriminatorSpec, Preprocessing};
use crate::error::{Error, Result};
use crate::impairments::{ChannelKind, Link, DEFAULT_GUARD_BAND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SnrSweep,
    EpsilonSweep,
    Transferability,
    Single,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SnrSweep => "snr-sweep",
            ExperimentKind::EpsilonSweep => "epsilon-sweep",
            ExperimentKind::Transferability => "transferability",
            ExperimentKind::Single => "single",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "snr-sweep" => Ok(ExperimentKind::SnrSweep),
            "epsilon-sweep" => Ok(ExperimentKind::EpsilonSweep),
            "transferability" => Ok(ExperimentKind::Transferability),
            "single" => Ok(ExperimentKind::Single),
            other => Err(Error::invalid(format!(
                "unknown experiment '{other}' (expected snr-sweep, epsilon-sweep, transferability or single)"
            ))),
        }
    }
}

/// Plateau rule: converged once the last `window` fooling rates span less
/// than `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceRule {
    pub window: usize,
    pub tolerance: f64,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        ConvergenceRule { window: 20, tolerance: 0.02 }
    }
}

/// Everything one experiment run needs. Serialized as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_authorized: usize,
    pub n_outliers: usize,
    /// Minimum unit-gain separation between non-authorized and authorized devices.
    pub guard_band: f64,
    /// Training packets per authorized device.
    pub n_per_tx: usize,
    pub held_out_frac: f64,
    pub epochs: usize,
    pub batch: usize,
    pub snr_list: Vec<f64>,
    pub epsilon_list: Vec<f64>,
    /// Channel variants covered by the SNR sweep.
    pub channel_kinds: Vec<ChannelKind>,
    /// Preprocessing used whenever the channel is dynamic.
    pub dynamic_preprocessing: Preprocessing,
    /// Pulse shaping, sample rate, packet length and the base channel
    /// (its `snr_db` and `kind` are used by `single` and `train-auth`).
    pub link: Link,
    pub attack: AttackConfig,
    pub discriminator: DiscriminatorSpec,
    pub seeds: Vec<u64>,
    /// Maximum attack iterations per cell.
    pub budget: usize,
    pub convergence: ConvergenceRule,
    /// Fresh transmissions per transfer-matrix entry.
    pub transfer_eval_packets: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Single,
            n_authorized: 10,
            n_outliers: 10,
            guard_band: DEFAULT_GUARD_BAND,
            n_per_tx: 500,
            held_out_frac: 0.2,
            epochs: 40,
            batch: 32,
            snr_list: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            epsilon_list: vec![0.1, 0.2, 0.3, 0.4],
            channel_kinds: vec![ChannelKind::Awgn, ChannelKind::Dynamic],
            dynamic_preprocessing: Preprocessing::DftMagnitude,
            link: Link::default(),
            attack: AttackConfig::default(),
            discriminator: DiscriminatorSpec::default(),
            seeds: vec![1],
            budget: 500,
            convergence: ConvergenceRule::default(),
            transfer_eval_packets: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_authorized < 2 {
            return Err(Error::invalid("n_authorized must be at least 2"));
        }
        if self.n_outliers == 0 {
            return Err(Error::invalid("n_outliers must be positive"));
        }
        if self.snr_list.is_empty() || self.epsilon_list.is_empty() || self.seeds.is_empty() || self.channel_kinds.is_empty()
        {
            return Err(Error::invalid("snr_list, epsilon_list, channel_kinds and seeds must be non-empty"));
        }
        if self.snr_list.iter().any(|s| s.is_nan()) {
            return Err(Error::invalid("snr_list contains NaN"));
        }
        if self.epsilon_list.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid("epsilon_list entries must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.held_out_frac) {
            return Err(Error::invalid("held_out_frac must lie in [0, 1)"));
        }
        if self.n_per_tx == 0 || self.epochs == 0 || self.batch == 0 || self.budget == 0 || self.transfer_eval_packets == 0 {
            return Err(Error::invalid("n_per_tx, epochs, batch, budget and transfer_eval_packets must be positive"));
        }
        if self.convergence.window == 0 || !(self.convergence.tolerance > 0.0) {
            return Err(Error::invalid("convergence window and tolerance must be positive"));
        }
        self.link.validate()?;
        self.attack.validate()?;
        self.discriminator.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.message().replace('\n', " "),
        })?;
        cfg.validate().map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    /// Preprocessing for a channel variant.
    pub fn preprocessing_for(&self, kind: ChannelKind) -> Preprocessing {
        match kind {
            ChannelKind::Awgn => self.discriminator.preprocessing,
            ChannelKind::Dynamic => self.dynamic_preprocessing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = ExperimentConfig::from_toml_str("experiment = \"snr-sweep\"\nsnr_list = [20.0]\n").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::SnrSweep);
        assert_eq!(cfg.snr_list, vec![20.0]);
        assert_eq!(cfg.n_authorized, 10);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml_str("n_authorized = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("seeds = []").is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 3").is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            ExperimentKind::SnrSweep,
            ExperimentKind::EpsilonSweep,
            ExperimentKind::Transferability,
            ExperimentKind::Single,
        ] {
            assert_eq!(ExperimentKind::parse(k.name()).unwrap(), k);
        }
        assert!(ExperimentKind::parse("nope").is_err());
    }
}
