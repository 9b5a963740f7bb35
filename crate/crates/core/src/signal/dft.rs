use rustfft::FftPlanner;

use super::IqSignal;
use crate::error::{Error, Result};

/// |DFT| of the signal, length N.
pub fn dft_magnitudes(signal: &IqSignal) -> Vec<f64> {
    let mut buf = signal.samples().to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

/// DFT magnitudes reshaped row-major into `(N/2) × 2`.
pub fn dft_magnitude_features(signal: &IqSignal) -> Result<Vec<[f64; 2]>> {
    if signal.len() % 2 != 0 {
        return Err(Error::invalid(format!(
            "DFT features need an even length, got {}",
            signal.len()
        )));
    }
    let mags = dft_magnitudes(signal);
    Ok(mags.chunks_exact(2).map(|p| [p[0], p[1]]).collect())
}
