//! Window datasets as NDJSON, one window per line.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use p300_core::signal::{EegWindow, WindowMeta};
use serde::Deserialize;

/// Nine significant digits.
fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.8e}");
}

pub fn window_line(w: &EegWindow) -> String {
    let m = &w.meta;
    let mut out = String::with_capacity(w.data.len() * 16 + 128);
    let _ = write!(
        out,
        "{{\"subject\":{},\"session\":{},\"run\":{},\"trial\":{},\"image_id\":{},\"label\":{},\"data\":[",
        m.subject,
        m.session,
        m.run,
        m.trial,
        m.image_id,
        w.label()
    );
    for (t, row) in w.data.chunks(w.channels).enumerate() {
        if t > 0 {
            out.push(',');
        }
        out.push('[');
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            num(&mut out, v);
        }
        out.push(']');
    }
    out.push_str("]}\n");
    out
}

pub fn windows_ndjson(windows: &[EegWindow]) -> String {
    windows.iter().map(window_line).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowRecord {
    subject: u32,
    session: u32,
    run: u32,
    trial: u32,
    image_id: u8,
    label: u8,
    data: Vec<Vec<f64>>,
}

pub fn parse_window(line: &str) -> Result<EegWindow> {
    let r: WindowRecord = serde_json::from_str(line)?;
    let target = match r.label {
        0 => false,
        1 => true,
        other => return Err(anyhow!("label {other} is not 0 or 1")),
    };
    let steps = r.data.len();
    let channels = r.data.first().map_or(0, Vec::len);
    if r.data.iter().any(|row| row.len() != channels) {
        return Err(anyhow!("ragged data rows"));
    }
    let meta = WindowMeta { subject: r.subject, session: r.session, run: r.run, trial: r.trial, image_id: r.image_id };
    Ok(EegWindow::with_shape(steps, channels, r.data.concat(), target, meta)?)
}

pub fn read_windows(path: &Path) -> Result<Vec<EegWindow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_window(l).with_context(|| format!("{}: line {}", path.display(), k + 1)))
        .collect()
}
