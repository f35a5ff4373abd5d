//! Data directories: either window NDJSON files (`*.ndjson`) or raw
//! `subNN_sesNN_recording.csv` / `subNN_sesNN_schedule.csv` pairs. Window
//! files take precedence when both are present.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use p300_core::signal::{design_bandpass, preprocess_recording, EegWindow};

use crate::formats::{read_recording, read_schedule, read_windows};

/// Bandpass used when windows have to be cut from raw recordings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandpass {
    pub low_hz: f64,
    pub high_hz: f64,
    pub prototype_order: usize,
}

impl Default for Bandpass {
    fn default() -> Self {
        Self { low_hz: 1.0, high_hz: 12.0, prototype_order: 3 }
    }
}

pub fn session_stem(subject: u32, session: u32) -> String {
    format!("sub{subject:02}_ses{session:02}")
}

/// Parses `subNN_sesNN_<kind>.<ext>` into `(subject, session, kind)`.
pub fn parse_stem(file_name: &str) -> Option<(u32, u32, &str)> {
    let rest = file_name.strip_prefix("sub")?;
    let (subject, rest) = rest.split_once("_ses")?;
    let (session, rest) = rest.split_once('_')?;
    let kind = rest.split('.').next()?;
    Some((subject.parse().ok()?, session.parse().ok()?, kind))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSession {
    pub subject: u32,
    pub session: u32,
    pub recording: PathBuf,
    pub schedule: PathBuf,
}

#[derive(Debug, Default)]
pub struct DataDir {
    pub window_files: Vec<PathBuf>,
    pub raw: Vec<RawSession>,
}

pub fn scan(dir: &Path) -> Result<DataDir> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read data directory {}", dir.display()))?;
    let mut names: Vec<PathBuf> = Vec::new();
    for e in entries {
        let e = e.with_context(|| format!("cannot list {}", dir.display()))?;
        if e.file_type().map(|t| t.is_file()).unwrap_or(false) {
            names.push(e.path());
        }
    }
    names.sort();

    let mut out = DataDir::default();
    let mut recordings = BTreeMap::new();
    let mut schedules = BTreeMap::new();
    for path in names {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
        if name.starts_with('.') {
            continue;
        }
        if name.ends_with(".ndjson") {
            out.window_files.push(path);
        } else if let Some((subject, session, kind)) = parse_stem(&name).filter(|_| name.ends_with(".csv")) {
            match kind {
                "recording" => {
                    recordings.insert((subject, session), path);
                }
                "schedule" => {
                    schedules.insert((subject, session), path);
                }
                _ => {}
            }
        }
    }
    for ((subject, session), recording) in recordings {
        let Some(schedule) = schedules.remove(&(subject, session)) else {
            bail!("{} has no matching schedule file", recording.display());
        };
        out.raw.push(RawSession { subject, session, recording, schedule });
    }
    if let Some(path) = schedules.values().next() {
        bail!("{} has no matching recording file", path.display());
    }
    Ok(out)
}

pub fn preprocess_session(raw: &RawSession, band: &Bandpass) -> Result<Vec<EegWindow>> {
    let rec = read_recording(&raw.recording)?;
    let schedule = read_schedule(&raw.schedule)?;
    if let Err(e) = schedule.validate(0.4, 1.0 / rec.sample_rate_hz) {
        log::warn!("{}: {e}", raw.schedule.display());
    }
    let cascade = design_bandpass(band.low_hz, band.high_hz, rec.sample_rate_hz, band.prototype_order)
        .with_context(|| format!("cannot design the bandpass for {}", raw.recording.display()))?;
    preprocess_recording(&rec, &schedule, &cascade, raw.subject, raw.session)
        .with_context(|| format!("cannot cut windows from {}", raw.recording.display()))
}

/// Optional subject/session restriction.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Selection {
    pub subject: Option<u32>,
    pub session: Option<u32>,
}

impl Selection {
    pub fn accepts(&self, subject: u32, session: u32) -> bool {
        self.subject.is_none_or(|s| s == subject) && self.session.is_none_or(|s| s == session)
    }
}

/// Windows grouped by `(subject, session)`, each group in file order.
pub type Sessions = BTreeMap<(u32, u32), Vec<EegWindow>>;

pub fn load_sessions(dir: &Path, band: &Bandpass, sel: Selection) -> Result<Sessions> {
    let data = scan(dir)?;
    let mut sessions = Sessions::new();
    if !data.window_files.is_empty() {
        for path in &data.window_files {
            for w in read_windows(path)? {
                if sel.accepts(w.meta.subject, w.meta.session) {
                    sessions.entry((w.meta.subject, w.meta.session)).or_default().push(w);
                }
            }
        }
    } else if !data.raw.is_empty() {
        for raw in data.raw.iter().filter(|r| sel.accepts(r.subject, r.session)) {
            log::info!("preprocessing {}", raw.recording.display());
            sessions.insert((raw.subject, raw.session), preprocess_session(raw, band)?);
        }
    } else {
        bail!("{} contains neither window files (*.ndjson) nor recording/schedule CSV pairs", dir.display());
    }
    if sessions.is_empty() {
        bail!("no windows in {} match the requested subject/session", dir.display());
    }
    Ok(sessions)
}

pub fn flatten(sessions: Sessions) -> Vec<EegWindow> {
    sessions.into_values().flatten().collect()
}
