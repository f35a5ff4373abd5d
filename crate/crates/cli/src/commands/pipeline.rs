use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::anyhow;
use p300_core::seed;
use p300_core::train::{
    balanced_accuracy, evaluate, run_fold, summarize, ConfusionCounts, FoldOutcome, FoldReport, SessionSet,
    TrainConfig,
};
use p300_core::signal::EegWindow;
use serde::Serialize;

use super::{read_json_config, EvalArgs, PreprocessArgs, TrainArgs};
use crate::atomic::Staging;
use crate::dataset::{flatten, load_sessions, session_stem, Selection};
use crate::error::{CliError, CliResult};
use crate::formats::{folds_json, history_csv, model_json, pretty_json, read_model, windows_ndjson};

pub fn preprocess(args: PreprocessArgs) -> CliResult<Vec<PathBuf>> {
    let sessions = load_sessions(&args.data, &args.band.bandpass(), args.select.selection())?;
    let mut staging = Staging::new();
    for ((subject, session), windows) in &sessions {
        let path = args.out.join(format!("{}_windows.ndjson", session_stem(*subject, *session)));
        staging.write_str(path, &windows_ndjson(windows))?;
    }
    Ok(staging.commit()?)
}

/// Defaults, then the config file, then flags.
pub fn train_config(args: &TrainArgs) -> CliResult<TrainConfig> {
    let mut cfg: TrainConfig = match &args.config {
        Some(path) => {
            let cfg: TrainConfig = read_json_config(path)?;
            cfg.validate().map_err(|e| anyhow!("invalid config {}: {e}", path.display()))?;
            cfg
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.head {
        cfg.head = v.into();
    }
    if let Some(v) = args.lambda_input {
        cfg.lambda_input = v;
    }
    if let Some(v) = args.lambda_prm {
        cfg.lambda_prm = v;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.patience {
        cfg.patience = v;
    }
    if let Some(v) = args.hidden {
        cfg.hidden = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = args.val_fraction {
        cfg.val_fraction = v;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

/// Seed used for every fold of `subject`.
pub fn subject_seed(seed: u64, subject: u32) -> u64 {
    seed::mix(seed, &[u64::from(subject)])
}

struct Job {
    subject_slot: usize,
    fold: usize,
}

/// Runs `(subject, fold)` jobs on up to `jobs` threads; results come back in
/// job order regardless of scheduling.
fn run_jobs(
    subjects: &[(u32, Vec<SessionSet>, TrainConfig)],
    jobs: &[Job],
    threads: usize,
) -> Result<Vec<FoldOutcome>, p300_core::Error> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<FoldOutcome, p300_core::Error>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::SeqCst);
        let Some(job) = jobs.get(k) else { break };
        let (subject, sessions, cfg) = &subjects[job.subject_slot];
        log::info!("subject {subject}: fold {} started", job.fold);
        let r = run_fold(sessions, cfg, job.fold);
        if let Ok(o) = &r {
            log::info!("subject {subject}: fold {} BAC {:.4}", job.fold, o.report.bac);
        }
        results.lock().expect("worker panicked")[k] = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 1..threads.min(jobs.len()) {
            s.spawn(worker);
        }
        worker();
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job runs"))
        .collect()
}

#[derive(Serialize)]
struct SubjectSummary {
    subject: u32,
    mean_bac: f64,
    std_bac: f64,
}

#[derive(Serialize)]
struct Summary {
    folds: usize,
    config: TrainConfig,
    subjects: Vec<SubjectSummary>,
    mean_bac: f64,
    std_bac: f64,
}

pub fn train(args: TrainArgs) -> CliResult<Vec<PathBuf>> {
    let cfg = train_config(&args)?;
    if args.folds < 2 {
        return Err(CliError::usage(format!("--folds must be at least 2, got {}", args.folds)));
    }
    if args.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let sel = Selection { subject: args.subject, session: None };
    let sessions = load_sessions(&args.data, &args.band.bandpass(), sel)?;

    let mut subjects: Vec<(u32, Vec<SessionSet>, TrainConfig)> = Vec::new();
    for ((subject, session), windows) in sessions {
        if subjects.last().is_none_or(|s| s.0 != subject) {
            let seed = subject_seed(cfg.seed, subject);
            subjects.push((subject, Vec::new(), TrainConfig { seed, ..cfg.clone() }));
        }
        subjects.last_mut().expect("pushed above").1.push(SessionSet { session, windows });
    }
    // Check every subject before spending time on training.
    for (subject, sets, _) in &subjects {
        if sets.len() != args.folds {
            return Err(CliError::Data(anyhow!(
                "subject {subject}: {}-fold cross-validation needs {} sessions, found {} in {}",
                args.folds,
                args.folds,
                sets.len(),
                args.data.display()
            )));
        }
    }

    let jobs: Vec<Job> = (0..subjects.len())
        .flat_map(|s| (0..args.folds).map(move |fold| Job { subject_slot: s, fold }))
        .collect();
    let outcomes = run_jobs(&subjects, &jobs, args.jobs)?;

    let mut staging = Staging::new();
    let mut summaries = Vec::new();
    for (slot, (subject, sets, sub_cfg)) in subjects.iter().enumerate() {
        let mut reports: Vec<FoldReport> = Vec::new();
        for (job, outcome) in jobs.iter().zip(&outcomes).filter(|(j, _)| j.subject_slot == slot) {
            let stem = format!("sub{subject:02}_fold{}", job.fold);
            let model_name = format!("{stem}_model.json");
            let mut report = outcome.report.clone();
            report.model_path = Some(model_name.clone());
            let mut meta = serde_json::Map::new();
            meta.insert("subject".into(), (*subject).into());
            meta.insert("fold_index".into(), job.fold.into());
            meta.insert("test_session".into(), report.test_session.into());
            meta.insert(
                "train_sessions".into(),
                sets.iter().filter(|s| s.session != report.test_session).map(|s| s.session).collect::<Vec<_>>().into(),
            );
            meta.insert("seed".into(), report.seed.into());
            meta.insert("best_epoch".into(), serde_json::to_value(report.best_epoch).map_err(anyhow::Error::from)?);
            meta.insert("epochs_run".into(), report.history.len().into());
            meta.insert("config".into(), serde_json::to_value(sub_cfg).map_err(anyhow::Error::from)?);
            staging.write_str(args.out.join(&model_name), &model_json(&outcome.params, meta)?)?;
            staging.write_str(args.out.join(format!("{stem}_history.csv")), &history_csv(&report.history))?;
            reports.push(report);
        }
        let summary = summarize(&reports);
        staging.write_str(
            args.out.join(format!("sub{subject:02}_folds.json")),
            &folds_json(*subject, &reports, &summary)?,
        )?;
        summaries.push(SubjectSummary { subject: *subject, mean_bac: summary.mean_bac, std_bac: summary.std_bac });
    }
    let n = summaries.len() as f64;
    let mean = summaries.iter().map(|s| s.mean_bac).sum::<f64>() / n;
    let std = if summaries.len() > 1 {
        (summaries.iter().map(|s| (s.mean_bac - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let summary = Summary { folds: args.folds, config: cfg, subjects: summaries, mean_bac: mean, std_bac: std };
    staging.write_str(args.out.join("summary.json"), &pretty_json(&summary)?)?;
    Ok(staging.commit()?)
}

#[derive(Serialize)]
struct EvalReport {
    model: String,
    n_windows: usize,
    threshold: f64,
    confusion: ConfusionCounts,
    bac: f64,
    recall: f64,
    specificity: f64,
}

fn predictions_csv(params: &p300_core::ModelParams, windows: &[EegWindow]) -> CliResult<String> {
    let mut out = String::from("subject,session,run,trial,image_id,label,p\n");
    for w in windows {
        let p = p300_core::model::forward(params, w)?.p;
        let m = &w.meta;
        let _ = writeln!(out, "{},{},{},{},{},{},{p}", m.subject, m.session, m.run, m.trial, m.image_id, w.label());
    }
    Ok(out)
}

pub fn eval(args: EvalArgs) -> CliResult<Vec<PathBuf>> {
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(CliError::usage(format!("--threshold must lie in (0, 1), got {}", args.threshold)));
    }
    let model = read_model(&args.model)?;
    let windows = flatten(load_sessions(&args.data, &args.band.bandpass(), args.select.selection())?);
    let confusion = evaluate(&model.params, &windows, args.threshold)?;
    let bac = balanced_accuracy(&confusion)
        .map_err(|e| CliError::Data(anyhow!("cannot score {}: {e}", args.data.display())))?;
    let report = EvalReport {
        model: args.model.display().to_string(),
        n_windows: windows.len(),
        threshold: args.threshold,
        confusion,
        bac: bac.bac,
        recall: bac.recall,
        specificity: bac.specificity,
    };
    let mut staging = Staging::new();
    staging.write_str(args.out.join("eval.json"), &pretty_json(&report)?)?;
    staging.write_str(args.out.join("predictions.csv"), &predictions_csv(&model.params, &windows)?)?;
    Ok(staging.commit()?)
}
