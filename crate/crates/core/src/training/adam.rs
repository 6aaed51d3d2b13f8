use crate::diffcore::Tensor;
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, params: &[Tensor]) -> Self {
        let zeros = || params.iter().map(|p| vec![0.0; p.numel()]).collect();
        Adam { lr, step: 0, m: zeros(), v: zeros() }
    }

    /// Steps taken so far (skipped steps excluded).
    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Apply one update. Returns `false` without touching anything when a
    /// gradient entry is not finite.
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<bool> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::shape("adam", format!("{} params, {} grads", params.len(), grads.len())));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.numel() != self.m[i].len() || g.shape() != p.shape() {
                return Err(Error::shape("adam", format!("gradient {:?} for parameter {:?}", g.shape(), p.shape())));
            }
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Ok(false);
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for (((x, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
                *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
                *x -= self.lr * (*mi / c1) / ((*vi / c2).sqrt() + EPSILON);
            }
        }
        Ok(true)
    }
}
