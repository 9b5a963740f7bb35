//! Role assignment for a simulated deployment: authorized devices, known
//! outliers used as training negatives, and the adversary.

use serde::{Deserialize, Serialize};

use super::profile::{sample_profile, sample_transmitter_profiles, TransmitterProfile};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Default minimum unit-amplitude gain separation between any
/// non-authorized device and every authorized one.
pub const DEFAULT_GUARD_BAND: f64 = 0.01;

const OUTER_TRIES: usize = 200;
const INNER_DRAWS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub authorized: Vec<TransmitterProfile>,
    pub outliers: Vec<TransmitterProfile>,
    pub adversary: TransmitterProfile,
}

/// PA gain at unit input amplitude, `1 + psi0 + psi1`: the scalar that
/// dominates the received amplitude level of a unit-power transmission.
pub fn unit_gain(p: &TransmitterProfile) -> f64 {
    1.0 + p.psi0 + p.psi1
}

/// Smallest unit-gain distance from `p` to any of `set`.
pub fn gain_separation(p: &TransmitterProfile, set: &[TransmitterProfile]) -> f64 {
    set.iter()
        .map(|q| (unit_gain(p) - unit_gain(q)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Draws `n_authorized` profiles, then `n_outliers` outliers and one
/// adversary, each at least `guard` away in unit gain from every authorized
/// profile. Ids: authorized `0..n_authorized`, outliers after them, the
/// adversary last.
///
/// Neighbouring fingerprints closer than the receiver's amplitude
/// resolution cannot be told apart, so without the guard band "outlier" and
/// "authorized" would be labels on indistinguishable devices.
pub fn sample_population(n_authorized: usize, n_outliers: usize, guard: f64, rng: &mut Rng) -> Result<Population> {
    if n_authorized == 0 || n_outliers == 0 {
        return Err(Error::invalid("population needs authorized and outlier devices"));
    }
    if !(guard >= 0.0 && guard.is_finite()) {
        return Err(Error::invalid("guard band must be a non-negative number"));
    }
    for _ in 0..OUTER_TRIES {
        let authorized = sample_transmitter_profiles(n_authorized, rng)?;
        let mut others: Vec<TransmitterProfile> = Vec::with_capacity(n_outliers + 1);
        let mut draws = 0;
        while others.len() <= n_outliers && draws < INNER_DRAWS {
            draws += 1;
            let id = (n_authorized + others.len()) as u32;
            let p = sample_profile(id, rng);
            let distinct = !others.iter().any(|q| q.same_fingerprint(&p));
            if distinct && gain_separation(&p, &authorized) >= guard {
                others.push(p);
            }
        }
        if others.len() == n_outliers + 1 {
            let adversary = others.pop().unwrap();
            return Ok(Population {
                authorized,
                outliers: others,
                adversary,
            });
        }
    }
    Err(Error::invalid(format!(
        "could not place {n_outliers} outliers and an adversary outside a {guard} guard band around {n_authorized} authorized devices"
    )))
}
