use std::path::PathBuf;

use p300_core::synth::{generate_session, subject_profile, SubjectProfile, SynthConfig};
use serde::Serialize;

use super::{read_json_config, SynthArgs};
use crate::atomic::Staging;
use crate::dataset::session_stem;
use crate::error::{CliError, CliResult};
use crate::formats::{pretty_json, recording_csv, schedule_csv};

#[derive(Serialize)]
struct SessionEntry {
    session: u32,
    recording: String,
    schedule: String,
    n_events: usize,
    n_targets: usize,
}

#[derive(Serialize)]
struct SubjectEntry {
    subject: u32,
    profile: SubjectProfile,
    sessions: Vec<SessionEntry>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    config: &'a SynthConfig,
    subjects: Vec<SubjectEntry>,
}

pub fn config_from(args: &SynthArgs) -> CliResult<SynthConfig> {
    let mut cfg: SynthConfig = match &args.config {
        Some(path) => {
            let cfg: SynthConfig = read_json_config(path)?;
            cfg.validate().map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
            cfg
        }
        None => SynthConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.subjects {
        cfg.subjects = v;
    }
    if let Some(v) = args.sessions {
        cfg.sessions_per_subject = v;
    }
    if let Some(v) = args.runs {
        cfg.runs_per_session = v;
    }
    if let Some(v) = args.trials {
        cfg.trials_per_run = v;
    }
    if let Some(v) = args.sample_rate {
        cfg.sample_rate_hz = v;
    }
    if let Some(v) = args.noise_std {
        cfg.overrides.noise_std_uv = Some(v);
    }
    if args.late_distractor {
        cfg.late_distractor = true;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn run(args: SynthArgs) -> CliResult<Vec<PathBuf>> {
    let cfg = config_from(&args)?;
    let mut staging = Staging::new();
    let mut subjects = Vec::new();
    for subject in 1..=cfg.subjects {
        let profile = subject_profile(&cfg, subject)?;
        let mut sessions = Vec::new();
        for session in 1..=cfg.sessions_per_subject {
            log::info!("generating subject {subject} session {session}");
            let (rec, schedule) = generate_session(&profile, &cfg, subject, session)?;
            let stem = session_stem(subject, session);
            let recording = format!("{stem}_recording.csv");
            let schedule_name = format!("{stem}_schedule.csv");
            staging.write_str(args.out.join(&recording), &recording_csv(&rec))?;
            staging.write_str(args.out.join(&schedule_name), &schedule_csv(&schedule))?;
            sessions.push(SessionEntry {
                session,
                recording,
                schedule: schedule_name,
                n_events: schedule.len(),
                n_targets: schedule.n_targets(),
            });
        }
        subjects.push(SubjectEntry { subject, profile, sessions });
    }
    let manifest = Manifest { schema: "p300-synth/1", config: &cfg, subjects };
    staging.write_str(args.out.join("manifest.json"), &pretty_json(&manifest)?)?;
    Ok(staging.commit()?)
}
