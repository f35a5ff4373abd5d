//! Subcommand definitions and dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use p300_core::explain::{ClassFilter, FeatureMode};
use p300_core::Head;
use serde::de::DeserializeOwned;

use crate::dataset::{Bandpass, Selection};
use crate::error::{CliError, CliResult};

mod explain;
mod lda;
mod pipeline;
mod synth;

#[derive(Debug, Parser)]
#[command(name = "p300", version, about = "P300 detection with Elman networks and a post-recurrent module")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic oddball-paradigm recordings.
    Synth(SynthArgs),
    /// Filter, decimate and cut recordings into window files.
    Preprocess(PreprocessArgs),
    /// Session-level K-fold cross-validation.
    Train(TrainArgs),
    /// Score a saved model on a data directory.
    Eval(EvalArgs),
    /// Electrode relevance, PRM profile and gradient×input maps.
    Explain(ExplainArgs),
    /// LDA separability of hidden-state features.
    Lda(LdaArgs),
    /// Class difference of mean hidden activations.
    HiddenDiff(HiddenDiffArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeadArg {
    Last,
    Prm,
}

impl From<HeadArg> for Head {
    fn from(h: HeadArg) -> Self {
        match h {
            HeadArg::Last => Head::LastStep,
            HeadArg::Prm => Head::Prm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Target,
    Nontarget,
    All,
}

impl From<ClassArg> for ClassFilter {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Target => ClassFilter::Target,
            ClassArg::Nontarget => ClassFilter::NonTarget,
            ClassArg::All => ClassFilter::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Last,
    Concat,
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<FeatureMode> {
        match self {
            ModeArg::Last => vec![FeatureMode::LastState],
            ModeArg::Concat => vec![FeatureMode::ConcatStates],
            ModeArg::Both => vec![FeatureMode::LastState, FeatureMode::ConcatStates],
        }
    }
}

/// Filter used when windows are cut from raw recordings.
#[derive(Debug, Clone, Args)]
pub struct BandArgs {
    /// Lower cutoff (Hz).
    #[arg(long, default_value_t = 1.0)]
    pub low_hz: f64,
    /// Upper cutoff (Hz).
    #[arg(long, default_value_t = 12.0)]
    pub high_hz: f64,
    /// Butterworth prototype order; the bandpass has twice this order.
    #[arg(long, default_value_t = 3)]
    pub filter_order: usize,
}

impl BandArgs {
    pub fn bandpass(&self) -> Bandpass {
        Bandpass { low_hz: self.low_hz, high_hz: self.high_hz, prototype_order: self.filter_order }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    /// Only use this subject.
    #[arg(long)]
    pub subject: Option<u32>,
    /// Only use this session.
    #[arg(long)]
    pub session: Option<u32>,
}

impl SelectArgs {
    pub fn selection(&self) -> Selection {
        Selection { subject: self.subject, session: self.session }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON synthesis config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub subjects: Option<u32>,
    /// Sessions per subject.
    #[arg(long)]
    pub sessions: Option<u32>,
    /// Runs per session.
    #[arg(long)]
    pub runs: Option<u32>,
    /// Trials per run.
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Broadband noise standard deviation (µV) for every subject.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Add a late bump after non-target stimuli.
    #[arg(long)]
    pub late_distractor: bool,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory with recording/schedule CSVs or window NDJSON files.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub band: BandArgs,
    #[command(flatten)]
    pub select: SelectArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON training config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,
    #[arg(long)]
    pub lambda_input: Option<f64>,
    #[arg(long)]
    pub lambda_prm: Option<f64>,
    /// Number of folds; each subject needs exactly this many sessions.
    #[arg(long, default_value_t = 4)]
    pub folds: usize,
    /// Folds trained concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Recurrent layer width.
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    /// Only cross-validate this subject.
    #[arg(long)]
    pub subject: Option<u32>,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Decision threshold on p.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Windows for gradient×input maps; without it only weight-based
    /// artifacts are written.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Windows averaged into the attribution map.
    #[arg(long, value_enum, default_value_t = ClassArg::Target)]
    pub class: ClassArg,
    /// Also write the map of the window at this 0-based position.
    #[arg(long)]
    pub window: Option<usize>,
    /// Scale maps so the largest magnitude is 1.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct LdaArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Covariance shrinkage in [0, 1].
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct HiddenDiffArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

pub(crate) fn read_json_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(anyhow::anyhow!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(anyhow::anyhow!("invalid config {}: {e}", path.display())))
}

pub fn dispatch(cli: Cli) -> CliResult<Vec<PathBuf>> {
    match cli.command {
        Command::Synth(a) => synth::run(a),
        Command::Preprocess(a) => pipeline::preprocess(a),
        Command::Train(a) => pipeline::train(a),
        Command::Eval(a) => pipeline::eval(a),
        Command::Explain(a) => explain::run(a),
        Command::Lda(a) => lda::lda(a),
        Command::HiddenDiff(a) => lda::hidden_diff(a),
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match dispatch(cli) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "usage error",
                CliError::Data(_) => "error",
            };
            eprintln!("{kind}: {e}");
            e.exit_code()
        }
    }
}
