//! Power-amplifier fingerprints.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::signal::IqSignal;

pub const PSI0_LIMIT: f64 = 0.3;
pub const PSI1_LIMIT: f64 = 0.1;

/// Memoryless Volterra PA coefficients of one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterProfile {
    pub id: u32,
    /// 3rd-order coefficient.
    pub psi0: f64,
    /// 5th-order coefficient.
    pub psi1: f64,
}

impl TransmitterProfile {
    pub fn new(id: u32, psi0: f64, psi1: f64) -> Result<Self> {
        if !(psi0.is_finite() && psi0.abs() <= PSI0_LIMIT) {
            return Err(Error::invalid(format!("psi0 {psi0} outside ±{PSI0_LIMIT}")));
        }
        if !(psi1.is_finite() && psi1.abs() <= PSI1_LIMIT) {
            return Err(Error::invalid(format!("psi1 {psi1} outside ±{PSI1_LIMIT}")));
        }
        Ok(TransmitterProfile { id, psi0, psi1 })
    }

    /// Ideal linear amplifier.
    pub fn neutral(id: u32) -> Self {
        TransmitterProfile {
            id,
            psi0: 0.0,
            psi1: 0.0,
        }
    }

    pub fn same_fingerprint(&self, other: &TransmitterProfile) -> bool {
        self.psi0 == other.psi0 && self.psi1 == other.psi1
    }

    #[inline]
    pub fn gain(&self, z: Complex64) -> Complex64 {
        let p = z.norm_sqr();
        z * (1.0 + self.psi0 * p + self.psi1 * p * p)
    }
}

pub const PSI0_RANGE: (f64, f64) = (-0.15, -0.03);
pub const KAPPA_RANGE: (f64, f64) = (0.5, 1.5);

/// One compressive profile: psi0 ~ U(-0.15, -0.03), psi1 = κ·psi0², κ ~ U(0.5, 1.5).
pub fn sample_profile(id: u32, rng: &mut Rng) -> TransmitterProfile {
    let psi0 = rng.uniform_range(PSI0_RANGE.0, PSI0_RANGE.1);
    let kappa = rng.uniform_range(KAPPA_RANGE.0, KAPPA_RANGE.1);
    TransmitterProfile {
        id,
        psi0,
        psi1: kappa * psi0 * psi0,
    }
}

/// `n` pairwise-distinct profiles with ids `0..n`.
pub fn sample_transmitter_profiles(n: usize, rng: &mut Rng) -> Result<Vec<TransmitterProfile>> {
    if n == 0 {
        return Err(Error::invalid("need at least one transmitter profile"));
    }
    let mut out: Vec<TransmitterProfile> = Vec::with_capacity(n);
    while out.len() < n {
        let p = sample_profile(out.len() as u32, rng);
        if !out.iter().any(|q| q.same_fingerprint(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// y = z·(1 + psi0·|z|² + psi1·|z|⁴), per sample.
pub fn apply_pa(signal: &IqSignal, profile: &TransmitterProfile) -> Result<IqSignal> {
    signal.with_samples(signal.samples().iter().map(|&z| profile.gain(z)).collect())
}
