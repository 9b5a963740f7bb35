//! Adam with a step-decay learning-rate schedule.

use serde::{Deserialize, Serialize};

use super::network::{Gradients, Network};
use crate::error::{Error, Result};

/// `lr(step) = initial_lr · decay_factor^⌊step / decay_every⌋`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub initial_lr: f64,
    pub decay_factor: f64,
    pub decay_every: u64,
}

impl AnnealSchedule {
    pub fn constant(lr: f64) -> Self {
        AnnealSchedule {
            initial_lr: lr,
            decay_factor: 1.0,
            decay_every: u64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::invalid("initial_lr must be positive"));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::invalid("decay_factor must lie in (0, 1]"));
        }
        if self.decay_every == 0 {
            return Err(Error::invalid("decay_every must be positive"));
        }
        Ok(())
    }

    pub fn lr(&self, step: u64) -> f64 {
        self.initial_lr * self.decay_factor.powf((step / self.decay_every) as f64)
    }
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_lr: 0.001,
            decay_factor: 0.5,
            decay_every: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Completed updates.
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(shapes: &[usize]) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn for_network(net: &Network) -> Self {
        let shapes: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
        Self::new(&shapes)
    }

    /// One bias-corrected Adam update minimizing along `grads`. Returns the
    /// learning rate used.
    pub fn update(
        &mut self,
        params: &mut [&mut [f64]],
        grads: &[Vec<f64>],
        schedule: &AnnealSchedule,
    ) -> Result<f64> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid("adam: parameter/gradient count mismatch"));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::invalid("adam: parameter/gradient shape mismatch"));
            }
        }
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NumericFailure("adam: non-finite gradient".into()));
        }
        let lr = schedule.lr(self.step);
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let mh = m[i] / bc1;
                let vh = v[i] / bc2;
                p[i] -= lr * mh / (vh.sqrt() + self.eps);
            }
        }
        Ok(lr)
    }
}

/// Apply one Adam step to a network.
pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
    schedule: &AnnealSchedule,
) -> Result<f64> {
    let mut params = net.params_mut();
    state.update(&mut params, &grads.tensors, schedule)
}
