use std::path::PathBuf;

use p300_core::explain::{hidden_activation_diff, lda_separability, FeatureMode};

use super::{HiddenDiffArgs, LdaArgs};
use crate::atomic::Staging;
use crate::dataset::{flatten, load_sessions};
use crate::error::{CliError, CliResult};
use crate::formats::{hidden_diff_csv, mean_curve_csv, neuron_labels, pretty_json, projections_csv, read_model};
use crate::svg::{bar_chart_svg, heatmap_svg, Heatmap};

fn mode_name(m: FeatureMode) -> &'static str {
    match m {
        FeatureMode::LastState => "last_state",
        FeatureMode::ConcatStates => "concat_states",
    }
}

pub fn lda(args: LdaArgs) -> CliResult<Vec<PathBuf>> {
    if !(0.0..=1.0).contains(&args.gamma) {
        return Err(CliError::usage(format!("--gamma must lie in [0, 1], got {}", args.gamma)));
    }
    let model = read_model(&args.model)?;
    let windows = flatten(load_sessions(&args.data, &args.band.bandpass(), args.select.selection())?);
    let mut staging = Staging::new();
    for mode in args.mode.modes() {
        let report = lda_separability(&model.params, &windows, mode, args.gamma)?;
        let name = mode_name(mode);
        log::info!("{name}: J = {}", report.fisher_j);
        staging.write_str(args.out.join(format!("separability_{name}.json")), &pretty_json(&report)?)?;
        staging.write_str(args.out.join(format!("projections_{name}.csv")), &projections_csv(&report))?;
    }
    Ok(staging.commit()?)
}

pub fn hidden_diff(args: HiddenDiffArgs) -> CliResult<Vec<PathBuf>> {
    let model = read_model(&args.model)?;
    let windows = flatten(load_sessions(&args.data, &args.band.bandpass(), args.select.selection())?);
    let diff = hidden_activation_diff(&model.params, &windows)?;
    let mut staging = Staging::new();
    if args.format.csv() {
        staging.write_str(args.out.join("hidden_diff.csv"), &hidden_diff_csv(&diff))?;
        staging.write_str(args.out.join("hidden_diff_mean.csv"), &mean_curve_csv(&diff))?;
    }
    if args.format.svg() {
        let cols: Vec<String> = (1..=diff.steps).map(|t| t.to_string()).collect();
        let rows = neuron_labels(diff.hidden);
        let svg = heatmap_svg(&Heatmap {
            title: "|mean target - mean non-target| hidden activation",
            row_labels: &rows,
            col_labels: &cols,
            values: &diff.per_neuron,
            signed: false,
        })?;
        staging.write_str(args.out.join("hidden_diff.svg"), &svg)?;
        let svg = bar_chart_svg("Mean absolute activation difference", &cols, &diff.mean_curve, "mean over units")?;
        staging.write_str(args.out.join("hidden_diff_mean.svg"), &svg)?;
    }
    Ok(staging.commit()?)
}
