use alloc::format;

use crate::model::cross_entropy;
use crate::{Error, Result};

/// `(1/N) * sum_i w_i * XE(t_i, p_i)` with probabilities clamped to
/// `[1e-12, 1 - 1e-12]`.
pub fn weighted_cross_entropy(probs: &[f64], labels: &[bool], weights: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::invalid("cross-entropy of an empty batch"));
    }
    if probs.len() != labels.len() || probs.len() != weights.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} probs, {} labels, {} weights",
            probs.len(),
            labels.len(),
            weights.len()
        )));
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((&p, &t), &w)| w * cross_entropy(p, t))
        .sum();
    Ok(total / probs.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bac {
    pub bac: f64,
    pub recall: f64,
    pub specificity: f64,
}

/// Mean of recall and specificity.
pub fn balanced_accuracy(c: &ConfusionCounts) -> Result<Bac> {
    if c.tp + c.fn_ == 0 || c.tn + c.fp == 0 {
        return Err(Error::invalid(format!(
            "balanced accuracy needs both classes present, got {c:?}"
        )));
    }
    let recall = c.tp as f64 / (c.tp + c.fn_) as f64;
    let specificity = c.tn as f64 / (c.tn + c.fp) as f64;
    Ok(Bac { bac: (recall + specificity) / 2.0, recall, specificity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_examples() {
        let v = weighted_cross_entropy(&[0.5], &[true], &[1.0]).unwrap();
        assert!((v - core::f64::consts::LN_2).abs() < 1e-6);
        let v = weighted_cross_entropy(&[1.0 - 1e-12], &[true], &[1.0]).unwrap();
        assert!(v <= 1.1e-12);
        let v = weighted_cross_entropy(&[0.5, 0.5], &[true, false], &[1.0, 0.2]).unwrap();
        assert!((v - 0.415888).abs() < 1e-6);
        // Saturated predictions stay finite.
        assert!(weighted_cross_entropy(&[0.0], &[true], &[1.0]).unwrap().is_finite());
    }

    #[test]
    fn cross_entropy_rejects_bad_shapes() {
        assert!(weighted_cross_entropy(&[], &[], &[]).is_err());
        assert!(weighted_cross_entropy(&[0.5], &[true, false], &[1.0]).is_err());
    }

    #[test]
    fn balanced_accuracy_examples() {
        let c = ConfusionCounts { tp: 20, fn_: 0, tn: 100, fp: 0 };
        assert_eq!(balanced_accuracy(&c).unwrap().bac, 1.0);
        let b = balanced_accuracy(&ConfusionCounts { tp: 3, fn_: 1, tn: 10, fp: 10 }).unwrap();
        assert!((b.recall - 0.75).abs() < 1e-12);
        assert!((b.specificity - 0.5).abs() < 1e-12);
        assert!((b.bac - 0.625).abs() < 1e-12);
        let chance = ConfusionCounts { tp: 20, fn_: 0, tn: 0, fp: 100 };
        assert_eq!(balanced_accuracy(&chance).unwrap().bac, 0.5);
        assert!(balanced_accuracy(&ConfusionCounts { tp: 0, fn_: 0, tn: 3, fp: 1 }).is_err());
        assert!(balanced_accuracy(&ConfusionCounts { tp: 1, fn_: 0, tn: 0, fp: 0 }).is_err());
    }

    #[test]
    fn record_tallies_each_cell() {
        let mut c = ConfusionCounts::default();
        c.record(true, true);
        c.record(true, false);
        c.record(false, false);
        c.record(false, true);
        c.record(false, true);
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 2 });
        assert_eq!(c.total(), 5);
    }
}
