use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::filter::{filtfilt, BiquadCascade};
use super::montage::{CHANNELS, CHANNEL_NAMES};
use super::{MODEL_RATE_HZ, STEPS};
use crate::{Error, Result};

/// Distinct images flashed per trial; exactly one is the target.
pub const IMAGES_PER_TRIAL: usize = 6;

/// Continuous multichannel EEG, time-major (`samples[n * CHANNELS + c]`), µV.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub sample_rate_hz: f64,
    pub channel_names: Vec<String>,
    samples: Vec<f64>,
}

impl Recording {
    /// Builds a recording with the standard montage labels.
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        let names = CHANNEL_NAMES.iter().map(|s| s.to_string()).collect();
        Self::with_names(sample_rate_hz, names, samples)
    }

    pub fn with_names(
        sample_rate_hz: f64,
        channel_names: Vec<String>,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if channel_names.len() != CHANNELS {
            return Err(Error::invalid(format!(
                "recording needs {CHANNELS} channels, got {}",
                channel_names.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!("bad sample rate {sample_rate_hz}")));
        }
        if samples.is_empty() || !samples.len().is_multiple_of(CHANNELS) {
            return Err(Error::invalid(format!(
                "sample buffer of length {} is not a non-empty multiple of {CHANNELS}",
                samples.len()
            )));
        }
        Ok(Self { sample_rate_hz, channel_names, samples })
    }

    /// Assembles a recording from per-channel sequences of equal length.
    pub fn from_channels(sample_rate_hz: f64, channels: &[Vec<f64>]) -> Result<Self> {
        if channels.len() != CHANNELS {
            return Err(Error::invalid(format!(
                "recording needs {CHANNELS} channels, got {}",
                channels.len()
            )));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("channels differ in length"));
        }
        let mut samples = Vec::with_capacity(n * CHANNELS);
        for t in 0..n {
            samples.extend(channels.iter().map(|c| c[t]));
        }
        Self::new(sample_rate_hz, samples)
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len() / CHANNELS
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.samples[n * CHANNELS..(n + 1) * CHANNELS]
    }

    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.samples.iter().skip(c).step_by(CHANNELS).copied().collect()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StimulusEvent {
    pub onset_s: f64,
    /// 1..=6
    pub image_id: u8,
    pub is_target: bool,
    pub run: u32,
    pub trial: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StimulusSchedule {
    pub events: Vec<StimulusEvent>,
}

impl StimulusSchedule {
    pub fn new(events: Vec<StimulusEvent>) -> Self {
        Self { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn n_targets(&self) -> usize {
        self.events.iter().filter(|e| e.is_target).count()
    }

    /// Checks the oddball-paradigm structure: strictly increasing onsets,
    /// each trial shows every image once with exactly one target, and
    /// consecutive onsets within a run are `isi_s` apart within `tolerance_s`.
    pub fn validate(&self, isi_s: f64, tolerance_s: f64) -> Result<()> {
        for (i, pair) in self.events.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.onset_s <= a.onset_s {
                return Err(Error::invalid(format!(
                    "event {}: onset {} does not follow {}",
                    i + 1,
                    b.onset_s,
                    a.onset_s
                )));
            }
            if a.run == b.run && ((b.onset_s - a.onset_s) - isi_s).abs() > tolerance_s {
                return Err(Error::invalid(format!(
                    "event {}: spacing {} s deviates from the ISI {isi_s} s",
                    i + 1,
                    b.onset_s - a.onset_s
                )));
            }
        }
        let mut start = 0;
        while start < self.events.len() {
            let key = (self.events[start].run, self.events[start].trial);
            let end = start
                + self.events[start..]
                    .iter()
                    .take_while(|e| (e.run, e.trial) == key)
                    .count();
            let trial = &self.events[start..end];
            let mut seen = [false; IMAGES_PER_TRIAL];
            for e in trial {
                let id = e.image_id as usize;
                if !(1..=IMAGES_PER_TRIAL).contains(&id) || seen[id - 1] {
                    return Err(Error::invalid(format!(
                        "run {} trial {}: image {} out of range or repeated",
                        key.0, key.1, e.image_id
                    )));
                }
                seen[id - 1] = true;
            }
            let targets = trial.iter().filter(|e| e.is_target).count();
            if trial.len() != IMAGES_PER_TRIAL || targets != 1 {
                return Err(Error::invalid(format!(
                    "run {} trial {}: {} images with {targets} targets",
                    key.0,
                    key.1,
                    trial.len()
                )));
            }
            start = end;
        }
        Ok(())
    }
}

/// Provenance of a window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowMeta {
    pub subject: u32,
    pub session: u32,
    pub run: u32,
    pub trial: u32,
    pub image_id: u8,
}

/// One labeled window: `steps` rows of `channels` electrodes, time-major.
///
/// Windows cut from recordings are always 32 × 32; other shapes exist for
/// small test models.
#[derive(Debug, Clone, PartialEq)]
pub struct EegWindow {
    pub steps: usize,
    pub channels: usize,
    pub data: Vec<f64>,
    pub target: bool,
    pub meta: WindowMeta,
}

impl EegWindow {
    /// A standard 32 × 32 window.
    pub fn new(data: Vec<f64>, target: bool, meta: WindowMeta) -> Result<Self> {
        Self::with_shape(STEPS, CHANNELS, data, target, meta)
    }

    pub fn with_shape(
        steps: usize,
        channels: usize,
        data: Vec<f64>,
        target: bool,
        meta: WindowMeta,
    ) -> Result<Self> {
        if data.len() != steps * channels || steps == 0 || channels == 0 {
            return Err(Error::invalid(format!(
                "window data has {} values, expected {steps}x{channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("window contains non-finite values"));
        }
        Ok(Self { steps, channels, data, target, meta })
    }

    pub fn label(&self) -> u8 {
        u8::from(self.target)
    }

    pub fn at(&self, step: usize, channel: usize) -> f64 {
        self.data[step * self.channels + channel]
    }
}

/// Keeps every `factor`-th sample, starting with the first.
pub fn decimate(x: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be at least 1"));
    }
    Ok(x.iter().step_by(factor).copied().collect())
}

/// Cuts one `STEPS`-sample window per event from a recording at the model
/// rate. The window starts at `round(onset_s * 32)`.
pub fn extract_windows(
    recording: &Recording,
    schedule: &StimulusSchedule,
    subject: u32,
    session: u32,
) -> Result<Vec<EegWindow>> {
    if recording.sample_rate_hz != MODEL_RATE_HZ {
        return Err(Error::invalid(format!(
            "window extraction expects a {MODEL_RATE_HZ} Hz recording, got {}",
            recording.sample_rate_hz
        )));
    }
    let n = recording.n_samples();
    schedule
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let start = libm::round(e.onset_s * MODEL_RATE_HZ);
            if !(start >= 0.0 && start as usize + STEPS <= n) {
                return Err(Error::invalid(format!(
                    "event {i} (onset {} s) needs samples {start}..{} but the recording has {n}",
                    e.onset_s,
                    start + STEPS as f64
                )));
            }
            let start = start as usize;
            let data = recording.samples()[start * CHANNELS..(start + STEPS) * CHANNELS].to_vec();
            let meta = WindowMeta { subject, session, run: e.run, trial: e.trial, image_id: e.image_id };
            EegWindow::new(data, e.is_target, meta)
        })
        .collect()
}

/// Filters every channel with `cascade`, decimates to 32 Hz and extracts the
/// stimulus windows.
pub fn preprocess_recording(
    recording: &Recording,
    schedule: &StimulusSchedule,
    cascade: &BiquadCascade,
    subject: u32,
    session: u32,
) -> Result<Vec<EegWindow>> {
    let ratio = recording.sample_rate_hz / MODEL_RATE_HZ;
    let factor = libm::round(ratio);
    if factor < 2.0 || (ratio - factor).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "sample rate {} Hz is not an integer multiple (>= 2x) of {MODEL_RATE_HZ} Hz",
            recording.sample_rate_hz
        )));
    }
    if (cascade.meta.sample_rate_hz - recording.sample_rate_hz).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "filter designed for {} Hz applied to a {} Hz recording",
            cascade.meta.sample_rate_hz, recording.sample_rate_hz
        )));
    }
    let factor = factor as usize;
    let channels = (0..CHANNELS)
        .map(|c| decimate(&filtfilt(cascade, &recording.channel(c))?, factor))
        .collect::<Result<Vec<_>>>()?;
    let low_rate = Recording::from_channels(MODEL_RATE_HZ, &channels)?;
    extract_windows(&low_rate, schedule, subject, session)
}
