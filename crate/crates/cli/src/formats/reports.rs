//! Tabular and JSON reports. Timesteps are numbered from 1 in every file.

use std::fmt::Write as _;

use anyhow::Result;
use p300_core::explain::{AttributionMap, HiddenDiff, RelevanceVector, SeparabilityReport};
use p300_core::signal::CHANNEL_NAMES;
use p300_core::train::{CvSummary, EpochRecord, FoldReport};
use serde::Serialize;

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_bac\n");
    for r in history {
        let _ = writeln!(out, "{},{},{}", r.epoch, r.train_loss, r.val_bac);
    }
    out
}

#[derive(Serialize)]
struct FoldsFile<'a> {
    subject: u32,
    folds: &'a [FoldReport],
    mean_bac: f64,
    std_bac: f64,
}

pub fn folds_json(subject: u32, reports: &[FoldReport], summary: &CvSummary) -> Result<String> {
    let file = FoldsFile { subject, folds: reports, mean_bac: summary.mean_bac, std_bac: summary.std_bac };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn electrode_name(i: usize) -> String {
    CHANNEL_NAMES.get(i).map_or_else(|| format!("ch{}", i + 1), |s| s.to_string())
}

pub fn relevance_csv(r: &RelevanceVector) -> String {
    let mut out = String::from("electrode,relevance\n");
    for (i, v) in r.per_electrode.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", electrode_name(i));
    }
    out
}

pub fn profile_csv(abs_weights: &[f64]) -> String {
    let mut out = String::from("timestep,abs_weight\n");
    for (t, v) in abs_weights.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", t + 1);
    }
    out
}

/// `corner,1,2,..` header, then one labeled row per matrix row.
pub fn matrix_csv(corner: &str, row_labels: &[String], cols: usize, values: &[f64]) -> String {
    let mut out = String::from(corner);
    for t in 1..=cols {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (label, row) in row_labels.iter().zip(values.chunks(cols)) {
        out.push_str(label);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn electrode_labels(n: usize) -> Vec<String> {
    (0..n).map(electrode_name).collect()
}

pub fn attribution_csv(map: &AttributionMap) -> String {
    matrix_csv("electrode", &electrode_labels(map.electrodes), map.steps, &map.values)
}

pub fn neuron_labels(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("h{j}")).collect()
}

pub fn hidden_diff_csv(d: &HiddenDiff) -> String {
    matrix_csv("neuron", &neuron_labels(d.hidden), d.steps, &d.per_neuron)
}

pub fn mean_curve_csv(d: &HiddenDiff) -> String {
    let mut out = String::from("timestep,mean_abs_diff\n");
    for (t, v) in d.mean_curve.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", t + 1);
    }
    out
}

pub fn projections_csv(r: &SeparabilityReport) -> String {
    let mut out = String::from("subject,session,run,trial,image_id,label,projection\n");
    for p in &r.projections {
        let m = &p.meta;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.subject,
            m.session,
            m.run,
            m.trial,
            m.image_id,
            u8::from(p.target),
            p.value
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_layout() {
        let csv = matrix_csv("electrode", &["Fp1".into(), "AF3".into()], 2, &[1.0, -0.5, 0.0, 2.25]);
        assert_eq!(csv, "electrode,1,2\nFp1,1,-0.5\nAF3,0,2.25\n");
    }

    #[test]
    fn history_layout() {
        let h = [EpochRecord { epoch: 1, train_loss: 0.5, val_bac: 0.75 }];
        assert_eq!(history_csv(&h), "epoch,train_loss,val_bac\n1,0.5,0.75\n");
    }
}
