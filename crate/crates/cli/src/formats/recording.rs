//! Recording and schedule CSV files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use p300_core::signal::{channel_index, Recording, StimulusEvent, StimulusSchedule, CHANNELS, CHANNEL_NAMES};

/// `time_s,<32 channel names>`, one row per sample; values keep six decimals.
pub fn recording_csv(rec: &Recording) -> String {
    let mut out = String::with_capacity(rec.n_samples() * CHANNELS * 12);
    out.push_str("time_s");
    for name in &rec.channel_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for n in 0..rec.n_samples() {
        let _ = write!(out, "{}", n as f64 / rec.sample_rate_hz);
        for v in rec.row(n) {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))
}

/// Reads a recording CSV. Columns may come in any order but must cover the
/// standard montage; they are reordered to it. The sampling rate is taken
/// from the `time_s` spacing and snapped to an integer when within 1e-6.
pub fn read_recording(path: &Path) -> Result<Recording> {
    let ctx = || format!("{}", path.display());
    let mut rdr = reader(path)?;
    let header = rdr.headers().with_context(ctx)?.clone();
    if header.get(0) != Some("time_s") {
        bail!("{}: first column must be time_s", path.display());
    }
    if header.len() != CHANNELS + 1 {
        bail!("{}: expected {} channel columns, found {}", path.display(), CHANNELS, header.len() - 1);
    }
    let mut column_of = vec![usize::MAX; CHANNELS];
    for (col, name) in header.iter().enumerate().skip(1) {
        let ch = channel_index(name)
            .ok_or_else(|| anyhow!("{}: unknown channel {name:?}", path.display()))?;
        if column_of[ch] != usize::MAX {
            bail!("{}: channel {name} appears twice", path.display());
        }
        column_of[ch] = col;
    }

    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.with_context(ctx)?;
        let parse = |col: usize| -> Result<f64> {
            let field = record.get(col).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                anyhow!("{}: row {}: {:?} in column {} is not a number", path.display(), line + 2, field, header.get(col).unwrap_or("?"))
            })
        };
        times.push(parse(0)?);
        for &col in &column_of {
            samples.push(parse(col)?);
        }
    }
    if times.len() < 2 {
        bail!("{}: need at least two samples to infer the sampling rate", path.display());
    }
    let span = times[times.len() - 1] - times[0];
    if span.is_nan() || span <= 0.0 {
        bail!("{}: time_s must increase", path.display());
    }
    let mut fs = (times.len() - 1) as f64 / span;
    if (fs - fs.round()).abs() <= 1e-6 * fs {
        fs = fs.round();
    }
    let names = CHANNEL_NAMES.iter().map(|s| s.to_string()).collect();
    Recording::with_names(fs, names, samples).with_context(ctx)
}

pub fn schedule_csv(schedule: &StimulusSchedule) -> String {
    let mut out = String::from("onset_s,image_id,is_target,run,trial\n");
    for e in &schedule.events {
        let _ = writeln!(out, "{},{},{},{},{}", e.onset_s, e.image_id, u8::from(e.is_target), e.run, e.trial);
    }
    out
}

pub fn read_schedule(path: &Path) -> Result<StimulusSchedule> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .with_context(|| format!("{}", path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["onset_s", "image_id", "is_target", "run", "trial"] {
        bail!("{}: header must be onset_s,image_id,is_target,run,trial", path.display());
    }
    let mut events = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.with_context(|| format!("{}", path.display()))?;
        let row = line + 2;
        let bad = |what: &str| anyhow!("{}: row {row}: bad {what}", path.display());
        let onset_s: f64 = record[0].parse().map_err(|_| bad("onset_s"))?;
        let image_id: u8 = record[1].parse().map_err(|_| bad("image_id"))?;
        let is_target = match &record[2] {
            "0" => false,
            "1" => true,
            _ => return Err(bad("is_target (must be 0 or 1)")),
        };
        let run: u32 = record[3].parse().map_err(|_| bad("run"))?;
        let trial: u32 = record[4].parse().map_err(|_| bad("trial"))?;
        if !onset_s.is_finite() {
            return Err(bad("onset_s"));
        }
        events.push(StimulusEvent { onset_s, image_id, is_target, run, trial });
    }
    Ok(StimulusSchedule::new(events))
}
