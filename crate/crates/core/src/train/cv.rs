use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::loss::{balanced_accuracy, ConfusionCounts};
use super::trainer::{train, EpochRecord, TrainConfig};
use crate::model::ModelParams;
use crate::seed::{self, stream};
use crate::signal::EegWindow;
use crate::{Error, Result};

/// All windows recorded in one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSet {
    pub session: u32,
    pub windows: Vec<EegWindow>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldReport {
    pub fold_index: usize,
    pub test_session: u32,
    pub bac: f64,
    pub recall: f64,
    pub specificity: f64,
    pub confusion: ConfusionCounts,
    pub best_epoch: Option<usize>,
    pub history: Vec<EpochRecord>,
    /// Filled in by whoever persists the model.
    pub model_path: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub report: FoldReport,
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvSummary {
    pub mean_bac: f64,
    /// Sample standard deviation (n - 1); 0 for a single fold.
    pub std_bac: f64,
}

/// Confusion counts of `p >= threshold` predictions.
pub fn evaluate(params: &ModelParams, windows: &[EegWindow], threshold: f64) -> Result<ConfusionCounts> {
    let mut c = ConfusionCounts::default();
    for w in windows {
        let p = crate::model::forward(params, w)?.p;
        c.record(p >= threshold, w.target);
    }
    Ok(c)
}

/// Trains on every session but `fold` and tests on session `fold`.
pub fn run_fold(sessions: &[SessionSet], cfg: &TrainConfig, fold: usize) -> Result<FoldOutcome> {
    if fold >= sessions.len() {
        return Err(Error::invalid(format!("fold {fold} out of range for {} sessions", sessions.len())));
    }
    let fold_seed = seed::mix(cfg.seed, &[stream::FOLD, fold as u64]);
    let fold_cfg = TrainConfig { seed: fold_seed, ..cfg.clone() };
    let train_windows: Vec<EegWindow> = sessions
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != fold)
        .flat_map(|(_, s)| s.windows.iter().cloned())
        .collect();
    let outcome = train(fold_seed, &train_windows, &fold_cfg)?;
    let test = &sessions[fold];
    let confusion = evaluate(&outcome.params, &test.windows, 0.5)?;
    let bac = balanced_accuracy(&confusion).map_err(|e| {
        Error::invalid(format!("test session {} cannot be scored: {e}", test.session))
    })?;
    Ok(FoldOutcome {
        report: FoldReport {
            fold_index: fold,
            test_session: test.session,
            bac: bac.bac,
            recall: bac.recall,
            specificity: bac.specificity,
            confusion,
            best_epoch: outcome.best_epoch,
            history: outcome.history,
            model_path: None,
            seed: fold_seed,
        },
        params: outcome.params,
    })
}

pub fn summarize(reports: &[FoldReport]) -> CvSummary {
    let n = reports.len();
    if n == 0 {
        return CvSummary { mean_bac: f64::NAN, std_bac: f64::NAN };
    }
    let mean = reports.iter().map(|r| r.bac).sum::<f64>() / n as f64;
    let std_bac = if n > 1 {
        let ss: f64 = reports.iter().map(|r| (r.bac - mean) * (r.bac - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    CvSummary { mean_bac: mean, std_bac }
}

/// Leave-one-session-out cross-validation over exactly `k` sessions, folds
/// in session order.
pub fn kfold_cv(
    sessions: &[SessionSet],
    cfg: &TrainConfig,
    k: usize,
) -> Result<(Vec<FoldOutcome>, CvSummary)> {
    if sessions.len() != k {
        return Err(Error::invalid(format!(
            "{k}-fold cross-validation needs {k} sessions, found {}",
            sessions.len()
        )));
    }
    let outcomes = (0..k)
        .map(|fold| run_fold(sessions, cfg, fold))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<FoldReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    Ok((outcomes, summarize(&reports)))
}
