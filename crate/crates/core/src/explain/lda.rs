//! Two-class Fisher LDA with a shrunk pooled covariance, used to compare the
//! separability of last-state and concatenated hidden-state features.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::model::{self, ModelParams};
use crate::signal::{EegWindow, WindowMeta};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureMode {
    /// `h_T`, dimension `hidden`.
    LastState,
    /// `h_1 .. h_T` concatenated, dimension `hidden * steps`.
    ConcatStates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaFit {
    pub direction: Vec<f64>,
    pub fisher_j: f64,
    pub projections: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Projection {
    pub value: f64,
    pub target: bool,
    pub meta: WindowMeta,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparabilityReport {
    pub mode: FeatureMode,
    pub dim: usize,
    pub fisher_j: f64,
    pub shrinkage_gamma: f64,
    pub projections: Vec<Projection>,
}

/// Fits `w = S^-1 (mu_1 - mu_0)` on row-major `features` (`labels.len()` rows
/// of `dim` values) with `S = (1 - gamma) Sigma + gamma (tr Sigma / d) I`,
/// `Sigma` the pooled within-class covariance. Reports
/// `J = (w . dmu)^2 / (w^T S w)`.
pub fn fisher_lda(features: &[f64], dim: usize, labels: &[bool], gamma: f64) -> Result<LdaFit> {
    let n = labels.len();
    if dim == 0 || features.len() != n * dim {
        return Err(Error::invalid(format!(
            "feature buffer of {} values is not {n} rows of {dim}",
            features.len()
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("shrinkage {gamma} outside [0, 1]")));
    }
    let n1 = labels.iter().filter(|&&t| t).count();
    let n0 = n - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::invalid("LDA needs both classes"));
    }

    let mut means = [vec![0.0; dim], vec![0.0; dim]];
    for (row, &t) in features.chunks(dim).zip(labels) {
        means[usize::from(t)].iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    means[0].iter_mut().for_each(|m| *m /= n0 as f64);
    means[1].iter_mut().for_each(|m| *m /= n1 as f64);
    let delta: Vec<f64> = means[1].iter().zip(&means[0]).map(|(a, b)| a - b).collect();

    let project = |w: &[f64]| -> Vec<f64> {
        features
            .chunks(dim)
            .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    };

    if delta.iter().all(|&d| d == 0.0) {
        let direction = vec![0.0; dim];
        let projections = project(&direction);
        return Ok(LdaFit { direction, fisher_j: 0.0, projections });
    }

    let centered = DMatrix::from_fn(n, dim, |r, c| {
        features[r * dim + c] - means[usize::from(labels[r])][c]
    });
    let dof = if n > 2 { n - 2 } else { n } as f64;
    let sigma = centered.tr_mul(&centered) / dof;
    let scale = sigma.trace() / dim as f64;
    let shrunk = &sigma * (1.0 - gamma) + DMatrix::<f64>::identity(dim, dim) * (gamma * scale);

    let max_diag = shrunk.diagonal().max();
    let singular = || {
        Error::Singular(format!(
            "shrunk covariance (gamma={gamma}, d={dim}, n={n}) is not positive definite; use a positive gamma"
        ))
    };
    let chol = shrunk.clone().cholesky().ok_or_else(singular)?;
    let l_min = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if max_diag.is_nan() || max_diag <= 0.0 || l_min <= 1e-12 * max_diag {
        return Err(singular());
    }

    let delta_v = DVector::from_column_slice(&delta);
    let w = chol.solve(&delta_v);
    let between = w.dot(&delta_v);
    let within = w.dot(&(&shrunk * &w));
    let fisher_j = if within > 0.0 { between * between / within } else { 0.0 };
    let direction: Vec<f64> = w.iter().copied().collect();
    let projections = project(&direction);
    Ok(LdaFit { direction, fisher_j, projections })
}

fn features(params: &ModelParams, windows: &[EegWindow], mode: FeatureMode) -> Result<(Vec<f64>, usize)> {
    let (n_h, n_t) = (params.hidden, params.steps);
    let dim = match mode {
        FeatureMode::LastState => n_h,
        FeatureMode::ConcatStates => n_h * n_t,
    };
    let mut out = Vec::with_capacity(windows.len() * dim);
    for w in windows {
        let trace = model::forward(params, w)?;
        match mode {
            FeatureMode::LastState => out.extend_from_slice(trace.hidden_at(n_t - 1)),
            FeatureMode::ConcatStates => out.extend_from_slice(&trace.h),
        }
    }
    Ok((out, dim))
}

/// LDA separability of target vs. non-target hidden representations.
pub fn lda_separability(
    params: &ModelParams,
    windows: &[EegWindow],
    mode: FeatureMode,
    gamma: f64,
) -> Result<SeparabilityReport> {
    let (feats, dim) = features(params, windows, mode)?;
    let labels: Vec<bool> = windows.iter().map(|w| w.target).collect();
    let fit = fisher_lda(&feats, dim, &labels, gamma)?;
    let projections = fit
        .projections
        .iter()
        .zip(windows)
        .map(|(&value, w)| Projection { value, target: w.target, meta: w.meta })
        .collect();
    Ok(SeparabilityReport { mode, dim, fisher_j: fit.fisher_j, shrinkage_gamma: gamma, projections })
}
