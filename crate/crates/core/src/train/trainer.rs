use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::cv::evaluate;
use super::loss::balanced_accuracy;
use super::nadam::Nadam;
use crate::model::{Gradients, Head, ModelParams, DEFAULT_HIDDEN};
use crate::seed::{self, stream};
use crate::signal::EegWindow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClassWeighting {
    /// Targets weigh 1, non-targets `#targets / #nontargets`.
    InverseFrequency,
    Explicit { target: f64, nontarget: f64 },
}

impl ClassWeighting {
    pub const UNIFORM: Self = ClassWeighting::Explicit { target: 1.0, nontarget: 1.0 };

    /// `(target, nontarget)` weights for the given class counts.
    pub fn weights(&self, n_target: usize, n_nontarget: usize) -> (f64, f64) {
        match *self {
            ClassWeighting::InverseFrequency => (1.0, n_target as f64 / n_nontarget as f64),
            ClassWeighting::Explicit { target, nontarget } => (target, nontarget),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub hidden: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub lambda_input: f64,
    pub lambda_prm: f64,
    pub head: Head,
    pub seed: u64,
    pub val_fraction: f64,
    pub class_weighting: ClassWeighting,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            batch_size: 16,
            learning_rate: 0.0003,
            epochs: 100,
            patience: 10,
            lambda_input: 0.0,
            lambda_prm: 0.0,
            head: Head::Prm,
            seed: 0,
            val_fraction: 0.1,
            class_weighting: ClassWeighting::InverseFrequency,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::invalid("hidden size must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!("learning rate {} must be > 0", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::invalid(format!(
                "validation fraction {} outside [0, 1)",
                self.val_fraction
            )));
        }
        if !(self.lambda_input >= 0.0 && self.lambda_prm >= 0.0) {
            return Err(Error::invalid("regularization strengths must be non-negative"));
        }
        if let ClassWeighting::Explicit { target, nontarget } = self.class_weighting {
            if !(target > 0.0 && nontarget > 0.0) {
                return Err(Error::invalid("class weights must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Sample-weighted mean of the regularized mini-batch losses.
    pub train_loss: f64,
    pub val_bac: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch (initial parameters when no
    /// epoch ran).
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    /// `(target, nontarget)` loss weights used.
    pub class_weights: (f64, f64),
}

/// Stratified holdout: `round(val_fraction * n)` windows of each class, at
/// least one per class when the class has two or more windows. Returns
/// `(train, validation)` indices, each sorted; this is the split [`train`]
/// makes with `cfg.seed`.
pub fn validation_split(windows: &[EegWindow], val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed, &[stream::SPLIT]);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..windows.len()).filter(|&i| windows[i].target == class).collect();
        idx.shuffle(&mut rng);
        let mut n_val = libm::round(val_fraction * idx.len() as f64) as usize;
        if val_fraction > 0.0 && idx.len() >= 2 {
            n_val = n_val.clamp(1, idx.len() - 1);
        } else {
            n_val = 0;
        }
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Mini-batch Nadam training with class-weighted cross-entropy, L1 penalties
/// and early stopping on validation balanced accuracy.
///
/// `model_seed` fixes the initialization; `cfg.seed` fixes the validation
/// split and the per-epoch shuffles. A validation set lacking either class
/// (tiny datasets, `val_fraction = 0`) disables early stopping and the
/// training-set BAC is recorded instead.
pub fn train(model_seed: u64, windows: &[EegWindow], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n_target = windows.iter().filter(|w| w.target).count();
    if n_target == 0 || n_target == windows.len() {
        return Err(Error::invalid(format!(
            "training needs both classes, got {n_target} targets among {} windows",
            windows.len()
        )));
    }
    let (steps, channels) = (windows[0].steps, windows[0].channels);
    if windows.iter().any(|w| w.steps != steps || w.channels != channels) {
        return Err(Error::invalid("training windows differ in shape"));
    }

    let (train_idx, val_idx) = validation_split(windows, cfg.val_fraction, cfg.seed);
    let val: Vec<EegWindow> = val_idx.iter().map(|&i| windows[i].clone()).collect();
    let val_usable = val.iter().any(|w| w.target) && val.iter().any(|w| !w.target);
    let monitor: Vec<EegWindow> = if val_usable {
        val
    } else {
        train_idx.iter().map(|&i| windows[i].clone()).collect()
    };

    let train_targets = train_idx.iter().filter(|&&i| windows[i].target).count();
    let class_weights = cfg
        .class_weighting
        .weights(train_targets, train_idx.len() - train_targets);

    let mut params = ModelParams::init(model_seed, channels, cfg.hidden, steps, cfg.head)?;
    let mut best = params.clone();
    let mut best_bac = f64::NEG_INFINITY;
    let mut best_epoch = None;
    let mut since_best = 0;
    let mut history = Vec::new();

    let mut opt = Nadam::new(&params);
    let mut grads = Gradients::zeros_like(&params);
    let mut order = train_idx.clone();
    let mut rng = seed::rng(cfg.seed, &[stream::SHUFFLE]);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            let mut data_loss = 0.0;
            for &i in batch {
                let w = &windows[i];
                let trace = params.forward(&w.data)?;
                let cw = if w.target { class_weights.0 } else { class_weights.1 };
                data_loss += params.accumulate_data_gradient(&trace, &w.data, w.target, cw, scale, &mut grads)?;
            }
            let penalty = grads.add_l1(&params, cfg.lambda_input, cfg.lambda_prm);
            opt.update(&mut params, &grads, cfg.learning_rate)?;
            loss_sum += data_loss + penalty * batch.len() as f64;
        }
        let train_loss = loss_sum / order.len() as f64;
        let val_bac = balanced_accuracy(&evaluate(&params, &monitor, 0.5)?)?.bac;
        history.push(EpochRecord { epoch, train_loss, val_bac });

        if val_bac > best_bac {
            best_bac = val_bac;
            best = params.clone();
            best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if val_usable && since_best >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome { params: best, history, best_epoch, class_weights })
}
