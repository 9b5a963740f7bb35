//! Propagation channels: AWGN and a dynamic channel with timing error,
//! carrier-frequency offset, multipath fading and noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::signal::{mean_power, IqSignal};

/// Half-length (in samples) of the windowed-sinc fractional-delay kernel.
pub const SINC_HALF_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Dynamic,
}

/// Channel description. `snr_db = +inf` skips the noise stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub snr_db: f64,
    pub cfo_std_hz: f64,
    pub n_taps: usize,
    pub rayleigh_scale: f64,
    pub interp_factor: usize,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel::awgn(20.0)
    }
}

impl ChannelModel {
    pub fn awgn(snr_db: f64) -> Self {
        ChannelModel {
            kind: ChannelKind::Awgn,
            snr_db,
            cfo_std_hz: 1000.0,
            n_taps: 3,
            rayleigh_scale: 0.5,
            interp_factor: 32,
        }
    }

    pub fn dynamic(snr_db: f64) -> Self {
        ChannelModel {
            kind: ChannelKind::Dynamic,
            ..ChannelModel::awgn(snr_db)
        }
    }

    pub fn with_snr(self, snr_db: f64) -> Self {
        ChannelModel { snr_db, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid("snr_db must be a number or +inf"));
        }
        if self.kind == ChannelKind::Dynamic {
            if !(self.cfo_std_hz >= 0.0 && self.cfo_std_hz.is_finite()) {
                return Err(Error::invalid("cfo_std_hz must be non-negative"));
            }
            if self.n_taps == 0 {
                return Err(Error::invalid("n_taps must be at least 1"));
            }
            if !(self.rayleigh_scale > 0.0) {
                return Err(Error::invalid("rayleigh_scale must be positive"));
            }
            if self.interp_factor == 0 {
                return Err(Error::invalid("interp_factor must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Per-packet random draw of the channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub timing_offset: usize,
    pub cfo_hz: f64,
    pub tap_gains: Vec<Complex64>,
    pub noise_seed: u64,
}

impl ChannelRealization {
    /// Realization that leaves a noiseless signal untouched.
    pub fn neutral(noise_seed: u64) -> Self {
        ChannelRealization {
            timing_offset: 0,
            cfo_hz: 0.0,
            tap_gains: vec![Complex64::new(1.0, 0.0)],
            noise_seed,
        }
    }
}

/// Complex Gaussian tap whose magnitude is Rayleigh(scale) and phase uniform.
pub fn rayleigh_tap(scale: f64, rng: &mut Rng) -> Complex64 {
    Complex64::new(scale * rng.normal(), scale * rng.normal())
}

pub fn sample_channel_realization(model: &ChannelModel, rng: &mut Rng) -> ChannelRealization {
    match model.kind {
        ChannelKind::Awgn => ChannelRealization::neutral(rng.next_seed()),
        ChannelKind::Dynamic => {
            let timing_offset = rng.below(model.interp_factor);
            let cfo_hz = model.cfo_std_hz * rng.normal();
            let tap_gains = (0..model.n_taps)
                .map(|_| rayleigh_tap(model.rayleigh_scale, rng))
                .collect();
            ChannelRealization {
                timing_offset,
                cfo_hz,
                tap_gains,
                noise_seed: rng.next_seed(),
            }
        }
    }
}

fn blackman(x: f64, half: f64) -> f64 {
    // window over [-half, half]
    let u = (x + half) / (2.0 * half);
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Band-limited ×`interp_factor` interpolation, advance by `offset` fine
/// samples, then decimate back. Computed directly as a windowed-sinc
/// fractional delay so only the retained samples are evaluated; samples
/// outside the signal are treated as zero.
pub fn apply_timing_error(signal: &IqSignal, offset: usize, interp_factor: usize) -> Result<IqSignal> {
    if interp_factor == 0 || offset >= interp_factor {
        return Err(Error::invalid(format!(
            "timing offset {offset} outside [0, {interp_factor})"
        )));
    }
    if offset == 0 {
        return Ok(signal.clone());
    }
    let frac = offset as f64 / interp_factor as f64;
    let half = SINC_HALF_LEN as isize;
    let win_half = SINC_HALF_LEN as f64 + 1.0;
    // kernel[j] weights x[n + j] for j in -half+1 ..= half
    let kernel: Vec<(isize, f64)> = ((-half + 1)..=half)
        .map(|j| {
            let d = frac - j as f64;
            (j, sinc(d) * blackman(d, win_half))
        })
        .collect();
    let x = signal.samples();
    let n = x.len() as isize;
    let out = (0..n)
        .map(|i| {
            kernel
                .iter()
                .filter_map(|&(j, w)| {
                    let k = i + j;
                    (0..n).contains(&k).then(|| x[k as usize] * w)
                })
                .sum()
        })
        .collect();
    signal.with_samples(out)
}

/// y[k] = z[k]·exp(j·2π·cfo·k / fs).
pub fn apply_cfo(signal: &IqSignal, cfo_hz: f64) -> Result<IqSignal> {
    let w = 2.0 * PI * cfo_hz / signal.sample_rate_hz();
    signal.with_samples(
        signal
            .samples()
            .iter()
            .enumerate()
            .map(|(k, &z)| z * Complex64::from_polar(1.0, w * k as f64))
            .collect(),
    )
}

/// Linear convolution with `tap_gains`, truncated to the input length.
pub fn apply_multipath(signal: &IqSignal, tap_gains: &[Complex64]) -> Result<IqSignal> {
    if tap_gains.is_empty() {
        return Err(Error::invalid("multipath needs at least one tap"));
    }
    if tap_gains.len() > signal.len() {
        return Err(Error::invalid("more multipath taps than signal samples"));
    }
    let x = signal.samples();
    let out = (0..x.len())
        .map(|n| {
            tap_gains
                .iter()
                .enumerate()
                .take(n + 1)
                .map(|(i, &h)| h * x[n - i])
                .sum()
        })
        .collect();
    signal.with_samples(out)
}

/// Complex AWGN with per-sample variance `P / 10^(snr/10)`, P the measured
/// signal power. `snr_db = +inf` returns the input unchanged.
pub fn add_awgn(signal: &IqSignal, snr_db: f64, rng: &mut Rng) -> Result<IqSignal> {
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("snr_db must be finite or +inf"));
    }
    let p = mean_power(signal.samples());
    if p <= 0.0 {
        return Err(Error::invalid("cannot set SNR on a zero-power signal"));
    }
    let sigma = (p / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    signal.with_samples(
        signal
            .samples()
            .iter()
            .map(|&z| z + Complex64::new(sigma * rng.normal(), sigma * rng.normal()))
            .collect(),
    )
}

/// Awgn: noise only. Dynamic: timing → CFO → multipath → noise.
pub fn apply_channel(
    signal: &IqSignal,
    model: &ChannelModel,
    realization: &ChannelRealization,
) -> Result<IqSignal> {
    let mut noise_rng = Rng::new(realization.noise_seed);
    match model.kind {
        ChannelKind::Awgn => add_awgn(signal, model.snr_db, &mut noise_rng),
        ChannelKind::Dynamic => {
            if realization.timing_offset >= model.interp_factor {
                return Err(Error::invalid("realization timing offset exceeds interp factor"));
            }
            let y = apply_timing_error(signal, realization.timing_offset, model.interp_factor)?;
            let y = apply_cfo(&y, realization.cfo_hz)?;
            let y = apply_multipath(&y, &realization.tap_gains)?;
            add_awgn(&y, model.snr_db, &mut noise_rng)
        }
    }
}
