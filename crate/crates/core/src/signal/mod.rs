//! Baseband signal generation and basic DSP.

mod capture;
mod dft;
mod pulse;

pub use capture::{read_rfsg, write_rfsg, CaptureSet};
pub use dft::{dft_magnitude_features, dft_magnitudes};
pub use pulse::{matched_filter_downsample, pulse_shape, rrc_taps, PulseShapeConfig};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Default waveform sample rate (samples per second).
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1.0e6;

/// A finite, non-empty sequence of complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IqSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl IqSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal must contain at least one sample"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(k) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NumericFailure(format!("non-finite sample at index {k}")));
        }
        Ok(IqSignal {
            samples,
            sample_rate_hz,
        })
    }

    /// Build from interleaved (I, Q) pairs.
    pub fn from_pairs(pairs: &[[f64; 2]], sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            sample_rate_hz,
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same sample rate, new samples. Re-validates finiteness.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz)
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|z| z * alpha).collect())
    }
}

/// A sequence of bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
}

impl BitStream {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bits must be 0 or 1"));
        }
        Ok(BitStream { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn generate_random_bits(n: usize, rng: &mut Rng) -> Result<BitStream> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "bit count must be positive and even, got {n}"
        )));
    }
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word = rng.next_u64();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    Ok(BitStream { bits })
}

/// Gray-coded QPSK: 00→(+1+j)/√2, 01→(−1+j)/√2, 11→(−1−j)/√2, 10→(+1−j)/√2.
pub fn qpsk_modulate(bits: &BitStream, symbol_rate_hz: f64) -> Result<IqSignal> {
    if bits.is_empty() || bits.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "QPSK needs a non-empty even number of bits, got {}",
            bits.len()
        )));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let symbols = bits
        .bits()
        .chunks_exact(2)
        .map(|pair| {
            let re = if pair[1] == 0 { a } else { -a };
            let im = if pair[0] == 0 { a } else { -a };
            Complex64::new(re, im)
        })
        .collect();
    IqSignal::new(symbols, symbol_rate_hz)
}

/// Mean of |sample|².
pub fn measure_power(signal: &IqSignal) -> f64 {
    mean_power(signal.samples())
}

pub(crate) fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Random QPSK packet of `n_symbols` symbols.
pub fn random_qpsk_packet(n_symbols: usize, symbol_rate_hz: f64, rng: &mut Rng) -> Result<IqSignal> {
    let bits = generate_random_bits(2 * n_symbols, rng)?;
    qpsk_modulate(&bits, symbol_rate_hz)
}
