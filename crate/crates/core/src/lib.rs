//! Simulated RF-fingerprint authentication testbench.
//!
//! Transmitters carry a power-amplifier fingerprint, a deep-learning
//! authenticator accepts or rejects received packets, and an impersonator
//! learns IQ-sample distortions from the authenticator's 1-bit decisions
//! alone.

pub mod attacker;
pub mod authenticator;
pub mod error;
pub mod harness;
pub mod impairments;
pub mod neural;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use rng::Rng;
