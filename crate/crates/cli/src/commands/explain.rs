use std::path::PathBuf;

use anyhow::anyhow;
use p300_core::explain::{average_relevance, global_relevance, local_relevance, prm_profile, AttributionMap, ClassFilter};
use p300_core::Head;

use super::{ExplainArgs, Format};
use crate::atomic::Staging;
use crate::dataset::{flatten, load_sessions};
use crate::error::{CliError, CliResult};
use crate::formats::{attribution_csv, electrode_labels, profile_csv, read_model, relevance_csv};
use crate::svg::{bar_chart_svg, heatmap_svg, Heatmap};

fn emit_map(staging: &mut Staging, out: &std::path::Path, stem: &str, title: &str, map: &AttributionMap, format: Format) -> CliResult<()> {
    if format.csv() {
        staging.write_str(out.join(format!("{stem}.csv")), &attribution_csv(map))?;
    }
    if format.svg() {
        let rows = electrode_labels(map.electrodes);
        let cols: Vec<String> = (1..=map.steps).map(|t| t.to_string()).collect();
        let svg = heatmap_svg(&Heatmap { title, row_labels: &rows, col_labels: &cols, values: &map.values, signed: true })?;
        staging.write_str(out.join(format!("{stem}.svg")), &svg)?;
    }
    Ok(())
}

fn class_name(c: ClassFilter) -> &'static str {
    match c {
        ClassFilter::Target => "target",
        ClassFilter::NonTarget => "nontarget",
        ClassFilter::All => "all",
    }
}

pub fn run(args: ExplainArgs) -> CliResult<Vec<PathBuf>> {
    if args.window.is_some() && args.data.is_none() {
        return Err(CliError::usage("--window requires --data"));
    }
    let model = read_model(&args.model)?;
    let params = &model.params;
    let mut staging = Staging::new();

    let relevance = global_relevance(params, args.normalize);
    if args.format.csv() {
        staging.write_str(args.out.join("relevance.csv"), &relevance_csv(&relevance))?;
    }
    if args.format.svg() {
        let y = if args.normalize { "normalized relevance" } else { "sum |W_xh|" };
        let svg = bar_chart_svg("Global electrode relevance", &electrode_labels(params.inputs), &relevance.per_electrode, y)?;
        staging.write_str(args.out.join("relevance.svg"), &svg)?;
    }

    if params.head == Head::Prm {
        let profile = prm_profile(params)?;
        if args.format.csv() {
            staging.write_str(args.out.join("prm_profile.csv"), &profile_csv(&profile))?;
        }
        if args.format.svg() {
            let labels: Vec<String> = (1..=profile.len()).map(|t| t.to_string()).collect();
            let svg = bar_chart_svg("PRM weight magnitude per timestep", &labels, &profile, "|w_p|")?;
            staging.write_str(args.out.join("prm_profile.svg"), &svg)?;
        }
    }

    if let Some(data) = &args.data {
        let windows = flatten(load_sessions(data, &args.band.bandpass(), args.select.selection())?);
        let filter: ClassFilter = args.class.into();
        let mut map = average_relevance(params, &windows, filter)?;
        if args.normalize {
            map = map.normalized();
        }
        let name = class_name(filter);
        emit_map(
            &mut staging,
            &args.out,
            &format!("attribution_{name}"),
            &format!("Mean gradient×input relevance ({name} windows)"),
            &map,
            args.format,
        )?;
        if let Some(k) = args.window {
            let w = windows.get(k).ok_or_else(|| {
                CliError::Data(anyhow!("--window {k} is out of range: {} windows selected", windows.len()))
            })?;
            let mut map = local_relevance(params, w)?;
            if args.normalize {
                map = map.normalized();
            }
            let m = &w.meta;
            let title = format!(
                "Gradient×input, subject {} session {} run {} trial {} image {} (label {})",
                m.subject,
                m.session,
                m.run,
                m.trial,
                m.image_id,
                w.label()
            );
            emit_map(&mut staging, &args.out, &format!("attribution_window{k}"), &title, &map, args.format)?;
        }
    }
    Ok(staging.commit()?)
}
