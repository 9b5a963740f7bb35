//! Gated recurrent (LSTM) cell: forget/input/output gates with a tanh
//! cell update. Gate order in the stacked weights is input, forget,
//! candidate, output.

use super::tensor::dot;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input: usize,
    pub hidden: usize,
    /// `4H × input`
    pub w_x: Vec<f64>,
    /// `4H × H`
    pub w_h: Vec<f64>,
    /// `4H`
    pub bias: Vec<f64>,
}

/// Post-activation gate values of one step.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub gates: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            input,
            hidden,
            w_x: vec![0.0; 4 * hidden * input],
            w_h: vec![0.0; 4 * hidden * hidden],
            bias: vec![0.0; 4 * hidden],
        }
    }

    fn check(&self, x: &[f64], h: &[f64], c: &[f64]) -> Result<()> {
        if x.len() != self.input || h.len() != self.hidden || c.len() != self.hidden {
            return Err(Error::invalid(format!(
                "LSTM step expects x[{}], h[{}], c[{}]; got x[{}], h[{}], c[{}]",
                self.input,
                self.hidden,
                self.hidden,
                x.len(),
                h.len(),
                c.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn step_cached(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>, StepCache) {
        let hd = self.hidden;
        let mut gates = self.bias.clone();
        for (r, g) in gates.iter_mut().enumerate() {
            let wx = &self.w_x[r * self.input..(r + 1) * self.input];
            let wh = &self.w_h[r * hd..(r + 1) * hd];
            *g += dot(wx, x) + dot(wh, h_prev);
        }
        for k in 0..hd {
            gates[k] = sigmoid(gates[k]);
            gates[hd + k] = sigmoid(gates[hd + k]);
            gates[2 * hd + k] = gates[2 * hd + k].tanh();
            gates[3 * hd + k] = sigmoid(gates[3 * hd + k]);
        }
        let mut c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        for k in 0..hd {
            c[k] = gates[hd + k] * c_prev[k] + gates[k] * gates[2 * hd + k];
            tanh_c[k] = c[k].tanh();
            h[k] = gates[3 * hd + k] * tanh_c[k];
        }
        let cache = StepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            gates,
            tanh_c,
        };
        (h, c, cache)
    }

    /// Backward through one step. Accumulates parameter gradients and
    /// returns (dx, dh_prev, dc_prev).
    pub(crate) fn step_backward(
        &self,
        cache: &StepCache,
        dh: &[f64],
        dc_next: &[f64],
        grads: &mut LstmGrads,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden;
        let g = &cache.gates;
        let mut dz = vec![0.0; 4 * hd];
        let mut dc_prev = vec![0.0; hd];
        for k in 0..hd {
            let (i, f, cand, o) = (g[k], g[hd + k], g[2 * hd + k], g[3 * hd + k]);
            let tc = cache.tanh_c[k];
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            dz[k] = dc * cand * i * (1.0 - i);
            dz[hd + k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz[2 * hd + k] = dc * i * (1.0 - cand * cand);
            dz[3 * hd + k] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] = dc * f;
        }
        let mut dx = vec![0.0; self.input];
        let mut dh_prev = vec![0.0; hd];
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grads.bias[r] += d;
            let wx = &self.w_x[r * self.input..(r + 1) * self.input];
            let gx = &mut grads.w_x[r * self.input..(r + 1) * self.input];
            for j in 0..self.input {
                gx[j] += d * cache.x[j];
                dx[j] += d * wx[j];
            }
            let wh = &self.w_h[r * hd..(r + 1) * hd];
            let gh = &mut grads.w_h[r * hd..(r + 1) * hd];
            for j in 0..hd {
                gh[j] += d * cache.h_prev[j];
                dh_prev[j] += d * wh[j];
            }
        }
        (dx, dh_prev, dc_prev)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LstmGrads {
    pub w_x: Vec<f64>,
    pub w_h: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros_like(p: &LstmParams) -> Self {
        LstmGrads {
            w_x: vec![0.0; p.w_x.len()],
            w_h: vec![0.0; p.w_h.len()],
            bias: vec![0.0; p.bias.len()],
        }
    }
}

/// One recurrence step: returns the new hidden and cell states.
pub fn gated_recurrent_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    params: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check(x, h_prev, c_prev)?;
    let (h, c, _) = params.step_cached(x, h_prev, c_prev);
    Ok((h, c))
}
