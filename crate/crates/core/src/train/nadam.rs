use alloc::vec::Vec;

use crate::model::{Gradients, ModelParams};
use crate::{Error, Result};

/// Nesterov-accelerated Adam.
///
/// ```text
/// m <- b1 m + (1 - b1) g          v <- b2 v + (1 - b2) g^2
/// m_hat = m / (1 - b1^(t+1))      g_hat = g / (1 - b1^t)
/// v_hat = v / (1 - b2^t)
/// theta <- theta - lr (b1 m_hat + (1 - b1) g_hat) / (sqrt(v_hat) + eps)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Nadam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Number of steps taken so far.
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Nadam {
    pub fn new(params: &ModelParams) -> Self {
        Self::with_constants(params, 0.9, 0.999, 1e-8)
    }

    pub fn with_constants(params: &ModelParams, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|(_, t)| alloc::vec![0.0; t.len()])
            .collect();
        Self { beta1, beta2, epsilon, step: 0, v: zeros.clone(), m: zeros }
    }

    /// Applies one update. Non-finite gradients abort before anything is
    /// modified, naming the offending tensor.
    pub fn update(&mut self, params: &mut ModelParams, grads: &Gradients, lr: f64) -> Result<()> {
        let grads = grads.tensors();
        if grads.len() != self.m.len() {
            return Err(Error::invalid("gradient tensors do not match optimizer state"));
        }
        for (name, g) in &grads {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { tensor: name });
            }
        }

        self.step += 1;
        let t = self.step as f64;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let m_corr = 1.0 / (1.0 - libm::pow(b1, t + 1.0));
        let g_corr = 1.0 / (1.0 - libm::pow(b1, t));
        let v_corr = 1.0 / (1.0 - libm::pow(b2, t));

        let tensors = params.tensors_mut();
        for (((_, theta), (_, g)), (m, v)) in tensors
            .into_iter()
            .zip(&grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if theta.len() != g.len() {
                return Err(Error::invalid("gradient shape does not match parameters"));
            }
            for (((w, &gi), mi), vi) in theta.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                let direction = b1 * (*mi * m_corr) + (1.0 - b1) * (gi * g_corr);
                *w -= lr * direction / (libm::sqrt(*vi * v_corr) + eps);
            }
        }
        Ok(())
    }
}
