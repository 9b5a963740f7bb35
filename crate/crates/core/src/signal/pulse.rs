//! Root-raised-cosine pulse shaping and the matching receive filter.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IqSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShapeConfig {
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    pub span_symbols: usize,
}

impl Default for PulseShapeConfig {
    fn default() -> Self {
        PulseShapeConfig {
            rolloff: 0.2,
            samples_per_symbol: 4,
            span_symbols: 10,
        }
    }
}

impl PulseShapeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::invalid(format!(
                "rolloff must lie in (0, 1], got {}",
                self.rolloff
            )));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::invalid("samples_per_symbol must be at least 2"));
        }
        if self.span_symbols < 4 || self.span_symbols % 2 != 0 {
            return Err(Error::invalid("span_symbols must be an even integer >= 4"));
        }
        Ok(())
    }

    pub fn tap_count(&self) -> usize {
        self.span_symbols * self.samples_per_symbol + 1
    }

    /// Waveform length produced by [`pulse_shape`] for `n_symbols` symbols.
    pub fn waveform_len(&self, n_symbols: usize) -> usize {
        (n_symbols + self.span_symbols) * self.samples_per_symbol
    }
}

/// Unit-energy RRC impulse response, symmetric about the center tap.
pub fn rrc_taps(config: &PulseShapeConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let alpha = config.rolloff;
    let sps = config.samples_per_symbol as f64;
    let len = config.tap_count();
    let center = (len / 2) as isize;
    let singular = 1.0 / (4.0 * alpha);

    let mut taps: Vec<f64> = (0..len as isize)
        .map(|i| {
            let t = (i - center) as f64 / sps;
            if t == 0.0 {
                1.0 - alpha + 4.0 * alpha / PI
            } else if (t.abs() - singular).abs() < 1e-9 {
                let arg = PI / (4.0 * alpha);
                alpha / 2f64.sqrt()
                    * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos())
            } else {
                let num = (PI * t * (1.0 - alpha)).sin()
                    + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
                let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
                num / den
            }
        })
        .collect();

    // enforce exact symmetry before normalizing
    for k in 0..len / 2 {
        let avg = 0.5 * (taps[k] + taps[len - 1 - k]);
        taps[k] = avg;
        taps[len - 1 - k] = avg;
    }
    let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|h| *h /= norm);
    Ok(taps)
}

/// Zero-stuff by `samples_per_symbol`, then filter with the RRC taps.
///
/// The output is scaled by √sps so a unit-energy constellation gives a
/// unit-power waveform. Length is `(|symbols| + span) · sps`, the full
/// convolution of the stuffed sequence with the taps.
pub fn pulse_shape(symbols: &IqSignal, config: &PulseShapeConfig) -> Result<IqSignal> {
    let taps = rrc_taps(config)?;
    let sps = config.samples_per_symbol;
    let gain = (sps as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); config.waveform_len(symbols.len())];
    for (k, &s) in symbols.samples().iter().enumerate() {
        let base = k * sps;
        let s = s * gain;
        for (i, &h) in taps.iter().enumerate() {
            out[base + i] += s * h;
        }
    }
    IqSignal::new(out, symbols.sample_rate_hz() * sps as f64)
}

/// RRC receive filter followed by symbol-spaced sampling at the combined
/// group delay of the transmit/receive filter pair.
pub fn matched_filter_downsample(
    waveform: &IqSignal,
    config: &PulseShapeConfig,
    n_symbols: usize,
) -> Result<IqSignal> {
    let taps = rrc_taps(config)?;
    let sps = config.samples_per_symbol;
    if n_symbols == 0 {
        return Err(Error::invalid("n_symbols must be positive"));
    }
    let available = waveform.len().saturating_sub(config.span_symbols * sps) / sps;
    if n_symbols > available {
        return Err(Error::invalid(format!(
            "waveform of {} samples holds at most {available} symbols, {n_symbols} requested",
            waveform.len()
        )));
    }
    let w = waveform.samples();
    let delay = config.span_symbols * sps;
    let gain = 1.0 / (sps as f64).sqrt();
    let out = (0..n_symbols)
        .map(|k| {
            let m = delay + k * sps;
            let acc: Complex64 = taps
                .iter()
                .enumerate()
                .filter(|&(i, _)| i <= m && m - i < w.len())
                .map(|(i, &h)| w[m - i] * h)
                .sum();
            acc * gain
        })
        .collect();
    IqSignal::new(out, waveform.sample_rate_hz() / sps as f64)
}
