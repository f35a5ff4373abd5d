use alloc::vec;
use alloc::vec::Vec;

use crate::model::{self, ModelParams};
use crate::signal::EegWindow;
use crate::{Error, Result};

/// Absolute difference between class-mean hidden activations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HiddenDiff {
    pub hidden: usize,
    pub steps: usize,
    /// `hidden x steps`, `[j * steps + t]`.
    pub per_neuron: Vec<f64>,
    /// Mean over neurons, one value per timestep.
    pub mean_curve: Vec<f64>,
}

impl HiddenDiff {
    /// Timestep (0-based) of the largest mean difference.
    pub fn peak_step(&self) -> usize {
        let mut best = 0;
        for (t, &v) in self.mean_curve.iter().enumerate() {
            if v > self.mean_curve[best] {
                best = t;
            }
        }
        best
    }
}

pub fn hidden_activation_diff(params: &ModelParams, windows: &[EegWindow]) -> Result<HiddenDiff> {
    let (n_h, n_t) = (params.hidden, params.steps);
    let mut sums = [vec![0.0; n_t * n_h], vec![0.0; n_t * n_h]];
    let mut counts = [0usize; 2];
    for w in windows {
        let trace = model::forward(params, w)?;
        let class = usize::from(w.target);
        counts[class] += 1;
        sums[class].iter_mut().zip(&trace.h).for_each(|(s, h)| *s += h);
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::invalid(
            "hidden-activation difference needs target and non-target windows",
        ));
    }
    let mut per_neuron = vec![0.0; n_h * n_t];
    for t in 0..n_t {
        for j in 0..n_h {
            let k = t * n_h + j;
            let target = sums[1][k] / counts[1] as f64;
            let nontarget = sums[0][k] / counts[0] as f64;
            per_neuron[j * n_t + t] = (target - nontarget).abs();
        }
    }
    let mean_curve = (0..n_t)
        .map(|t| (0..n_h).map(|j| per_neuron[j * n_t + t]).sum::<f64>() / n_h as f64)
        .collect();
    Ok(HiddenDiff { hidden: n_h, steps: n_t, per_neuron, mean_curve })
}
