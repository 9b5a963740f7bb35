//! Transmitter hardware fingerprints and channel models.

mod channel;
mod population;
mod profile;

pub use channel::{
    add_awgn, apply_cfo, apply_channel, apply_multipath, apply_timing_error, rayleigh_tap,
    sample_channel_realization, ChannelKind, ChannelModel, ChannelRealization, SINC_HALF_LEN,
};
pub use population::{
    gain_separation, sample_population, unit_gain, Population, DEFAULT_GUARD_BAND,
};
pub use profile::{
    apply_pa, sample_profile, sample_transmitter_profiles, TransmitterProfile, KAPPA_RANGE,
    PSI0_LIMIT, PSI0_RANGE, PSI1_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::signal::{
    matched_filter_downsample, pulse_shape, random_qpsk_packet, IqSignal, PulseShapeConfig,
    DEFAULT_SAMPLE_RATE_HZ,
};

/// Symbols per packet (and trajectory length of the attack).
pub const PACKET_SYMBOLS: usize = 256;

/// Everything between a symbol sequence and the receiver's symbol-rate
/// samples: pulse shaping, sample rate, and the propagation channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Link {
    pub pulse: PulseShapeConfig,
    pub channel: ChannelModel,
    /// Waveform (oversampled) rate.
    pub sample_rate_hz: f64,
    pub packet_symbols: usize,
}

impl Default for Link {
    fn default() -> Self {
        Link {
            pulse: PulseShapeConfig::default(),
            channel: ChannelModel::default(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            packet_symbols: PACKET_SYMBOLS,
        }
    }
}

impl Link {
    pub fn new(channel: ChannelModel) -> Self {
        Link {
            channel,
            ..Link::default()
        }
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.pulse.samples_per_symbol as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        self.channel.validate()?;
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::invalid("sample_rate_hz must be positive"));
        }
        if self.packet_symbols == 0 {
            return Err(Error::invalid("packet_symbols must be positive"));
        }
        Ok(())
    }

    /// Random-bit QPSK packet at this link's symbol rate.
    pub fn random_packet(&self, rng: &mut Rng) -> Result<IqSignal> {
        random_qpsk_packet(self.packet_symbols, self.symbol_rate_hz(), rng)
    }

    /// Pulse-shape, amplify through the device PA, propagate through a
    /// freshly drawn channel realization, then matched-filter back to
    /// `packet_symbols` symbol-rate samples. The receiver front end is ideal.
    pub fn transmit(
        &self,
        symbols: &IqSignal,
        profile: &TransmitterProfile,
        rng: &mut Rng,
    ) -> Result<IqSignal> {
        let realization = sample_channel_realization(&self.channel, rng);
        self.transmit_with(symbols, profile, &realization)
    }

    pub fn transmit_with(
        &self,
        symbols: &IqSignal,
        profile: &TransmitterProfile,
        realization: &ChannelRealization,
    ) -> Result<IqSignal> {
        if symbols.len() != self.packet_symbols {
            return Err(Error::invalid(format!(
                "packet must have {} symbols, got {}",
                self.packet_symbols,
                symbols.len()
            )));
        }
        let symbols = IqSignal::new(symbols.samples().to_vec(), self.symbol_rate_hz())?;
        let wave = pulse_shape(&symbols, &self.pulse)?;
        let wave = apply_pa(&wave, profile)?;
        let wave = apply_channel(&wave, &self.channel, realization)?;
        matched_filter_downsample(&wave, &self.pulse, self.packet_symbols)
    }
}
