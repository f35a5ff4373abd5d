//! Seeded oddball-paradigm recordings with a known P300 ground truth.
//!
//! The waveform model is deliberately minimal: white noise, a 10 Hz
//! background rhythm with a random phase per channel, and a Gaussian
//! deflection after each target stimulus projected onto the electrodes by
//! per-subject gains. Optionally, a weaker late bump (750-900 ms) follows
//! every non-target stimulus.
//!
//! Generation is deterministic in `(cfg.seed, subject, session)`; see
//! [`crate::seed`] for the stream derivation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::seed::{self, stream};
use crate::signal::{
    channel_index, Recording, StimulusEvent, StimulusSchedule, CHANNELS, IMAGES_PER_TRIAL,
};
use crate::{Error, Result};

/// Gaussian FWHM to standard deviation.
const FWHM_PER_SIGMA: f64 = 2.355;
const LEAD_IN_S: f64 = 1.0;
const RUN_GAP_S: f64 = 2.0;
const TAIL_S: f64 = 1.0;
const ALPHA_HZ: f64 = 10.0;

/// Electrodes carrying the deflection unless overridden.
pub const DEFAULT_ACTIVE_ELECTRODES: [&str; 6] = ["Pz", "P3", "P4", "Cz", "O1", "O2"];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubjectProfile {
    pub p300_latency_ms: f64,
    pub latency_jitter_ms: f64,
    pub p300_amplitude_uv: f64,
    /// Relative standard deviation of the per-event amplitude.
    pub amplitude_jitter: f64,
    /// Full width at half maximum.
    pub p300_width_ms: f64,
    pub electrode_gains: Vec<f64>,
    pub noise_std_uv: f64,
    pub background_alpha_uv: f64,
}

impl SubjectProfile {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.p300_latency_ms,
            self.latency_jitter_ms,
            self.p300_amplitude_uv,
            self.amplitude_jitter,
            self.p300_width_ms,
            self.noise_std_uv,
            self.background_alpha_uv,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.electrode_gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("subject profile contains non-finite values"));
        }
        if self.latency_jitter_ms < 0.0 || self.amplitude_jitter < 0.0 || self.noise_std_uv < 0.0 {
            return Err(Error::invalid("standard deviations must be non-negative"));
        }
        if self.p300_width_ms <= 0.0 {
            return Err(Error::invalid("P300 width must be positive"));
        }
        if self.electrode_gains.len() != CHANNELS {
            return Err(Error::invalid(format!(
                "expected {CHANNELS} electrode gains, got {}",
                self.electrode_gains.len()
            )));
        }
        if self.electrode_gains.iter().any(|g| !(0.0..=1.0).contains(g))
            || !self.electrode_gains.iter().any(|&g| g > 0.0)
        {
            return Err(Error::invalid("electrode gains must lie in [0, 1] with one positive"));
        }
        Ok(())
    }

    /// Electrode with the largest gain.
    pub fn peak_electrode(&self) -> usize {
        let mut best = 0;
        for (i, &g) in self.electrode_gains.iter().enumerate() {
            if g > self.electrode_gains[best] {
                best = i;
            }
        }
        best
    }
}

/// Fixed values replacing the sampled ones in [`sample_subject`].
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ProfileOverrides {
    pub p300_latency_ms: Option<f64>,
    pub latency_jitter_ms: Option<f64>,
    pub p300_amplitude_uv: Option<f64>,
    pub amplitude_jitter: Option<f64>,
    pub p300_width_ms: Option<f64>,
    /// Column indices of the electrodes carrying the deflection.
    pub active_electrodes: Option<Vec<usize>>,
    pub noise_std_uv: Option<f64>,
    pub background_alpha_uv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthConfig {
    pub subjects: u32,
    pub sessions_per_subject: u32,
    pub runs_per_session: u32,
    pub trials_per_run: u32,
    pub isi_ms: f64,
    pub flash_ms: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
    /// Adds a late bump after every non-target stimulus.
    pub late_distractor: bool,
    /// Applied to every sampled subject.
    pub overrides: ProfileOverrides,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 1,
            sessions_per_subject: 4,
            runs_per_session: 6,
            trials_per_run: 20,
            isi_ms: 400.0,
            flash_ms: 100.0,
            sample_rate_hz: 512.0,
            seed: 0,
            late_distractor: false,
            overrides: ProfileOverrides::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subjects == 0
            || self.sessions_per_subject == 0
            || self.runs_per_session == 0
            || self.trials_per_run == 0
        {
            return Err(Error::invalid("synthesis counts must be at least 1"));
        }
        if !(self.flash_ms > 0.0 && self.isi_ms >= self.flash_ms) {
            return Err(Error::invalid(format!(
                "need 0 < flash ({}) <= ISI ({})",
                self.flash_ms, self.isi_ms
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 64.0) {
            return Err(Error::invalid(format!("sample rate {} must exceed 64 Hz", self.sample_rate_hz)));
        }
        Ok(())
    }
}

/// Gaussian bump sampled at `sample_rate_hz` over `[0, duration_ms)`.
///
/// The bump is centered on the sample nearest `latency_ms`, so that sample
/// holds exactly `amplitude_uv`.
pub fn p300_template(
    latency_ms: f64,
    amplitude_uv: f64,
    width_ms: f64,
    sample_rate_hz: f64,
    duration_ms: f64,
) -> Result<Vec<f64>> {
    let positive = latency_ms > 0.0 && width_ms > 0.0 && sample_rate_hz > 0.0 && duration_ms > 0.0;
    if !positive || amplitude_uv.is_nan() || amplitude_uv < 0.0 || !duration_ms.is_finite() {
        return Err(Error::invalid("template arguments must be positive"));
    }
    if latency_ms >= duration_ms {
        return Err(Error::invalid(format!(
            "latency {latency_ms} ms outside the {duration_ms} ms template"
        )));
    }
    let n = libm::ceil(duration_ms * sample_rate_hz / 1000.0) as usize;
    let center = libm::round(latency_ms * sample_rate_hz / 1000.0);
    let sigma = width_ms / FWHM_PER_SIGMA;
    Ok((0..n)
        .map(|k| {
            let dt = (k as f64 - center) * 1000.0 / sample_rate_hz;
            amplitude_uv * libm::exp(-dt * dt / (2.0 * sigma * sigma))
        })
        .collect())
}

/// Draws a subject: latency U(280, 420) ms, amplitude U(5, 15) µV, gains
/// U(0.5, 1) on the active electrodes and U(0, 0.1) elsewhere.
pub fn sample_subject(seed: u64, overrides: &ProfileOverrides) -> Result<SubjectProfile> {
    let mut rng = seed::rng(seed, &[stream::SUBJECT]);
    let latency = rng.random_range(280.0..420.0);
    let amplitude = rng.random_range(5.0..15.0);
    let active: Vec<usize> = match &overrides.active_electrodes {
        Some(a) => a.clone(),
        None => DEFAULT_ACTIVE_ELECTRODES
            .iter()
            .filter_map(|n| channel_index(n))
            .collect(),
    };
    if active.iter().any(|&i| i >= CHANNELS) || active.is_empty() {
        return Err(Error::invalid("active electrode indices must be in 0..32 and non-empty"));
    }
    let gains = (0..CHANNELS)
        .map(|i| {
            if active.contains(&i) {
                rng.random_range(0.5..=1.0)
            } else {
                rng.random_range(0.0..=0.1)
            }
        })
        .collect();
    let profile = SubjectProfile {
        p300_latency_ms: overrides.p300_latency_ms.unwrap_or(latency),
        latency_jitter_ms: overrides.latency_jitter_ms.unwrap_or(20.0),
        p300_amplitude_uv: overrides.p300_amplitude_uv.unwrap_or(amplitude),
        amplitude_jitter: overrides.amplitude_jitter.unwrap_or(0.2),
        p300_width_ms: overrides.p300_width_ms.unwrap_or(150.0),
        electrode_gains: gains,
        noise_std_uv: overrides.noise_std_uv.unwrap_or(DEFAULT_NOISE_STD_UV),
        background_alpha_uv: overrides.background_alpha_uv.unwrap_or(DEFAULT_ALPHA_UV),
    };
    profile.validate()?;
    Ok(profile)
}

/// Broadband noise level before filtering.
pub const DEFAULT_NOISE_STD_UV: f64 = 24.0;
pub const DEFAULT_ALPHA_UV: f64 = 4.0;

/// Profile of subject `subject` under `cfg`.
pub fn subject_profile(cfg: &SynthConfig, subject: u32) -> Result<SubjectProfile> {
    sample_subject(seed::mix(cfg.seed, &[stream::SUBJECT, u64::from(subject)]), &cfg.overrides)
}

fn schedule<R: Rng>(cfg: &SynthConfig, rng: &mut R) -> StimulusSchedule {
    let isi = cfg.isi_ms / 1000.0;
    let per_run = cfg.trials_per_run as usize * IMAGES_PER_TRIAL;
    let run_span = per_run as f64 * isi;
    let mut events = Vec::with_capacity(cfg.runs_per_session as usize * per_run);
    for run in 0..cfg.runs_per_session {
        let target = rng.random_range(1..=IMAGES_PER_TRIAL as u8);
        let start = LEAD_IN_S + run as f64 * (run_span + RUN_GAP_S);
        let mut k = 0;
        for trial in 0..cfg.trials_per_run {
            let mut order: Vec<u8> = (1..=IMAGES_PER_TRIAL as u8).collect();
            order.shuffle(rng);
            for image_id in order {
                events.push(StimulusEvent {
                    onset_s: start + k as f64 * isi,
                    image_id,
                    is_target: image_id == target,
                    run: run + 1,
                    trial: trial + 1,
                });
                k += 1;
            }
        }
    }
    StimulusSchedule::new(events)
}

fn add_bump(buf: &mut [f64], onset_sample: usize, template: &[f64], gains: &[f64]) {
    for (k, &v) in template.iter().enumerate() {
        let n = onset_sample + k;
        if n * CHANNELS >= buf.len() {
            break;
        }
        let row = &mut buf[n * CHANNELS..(n + 1) * CHANNELS];
        for (x, g) in row.iter_mut().zip(gains) {
            *x += g * v;
        }
    }
}

/// One session's continuous recording and stimulus schedule.
pub fn generate_session(
    profile: &SubjectProfile,
    cfg: &SynthConfig,
    subject: u32,
    session: u32,
) -> Result<(Recording, StimulusSchedule)> {
    profile.validate()?;
    cfg.validate()?;
    let fs = cfg.sample_rate_hz;
    let mut rng = seed::rng(cfg.seed, &[stream::SESSION, u64::from(subject), u64::from(session)]);

    let schedule = schedule(cfg, &mut rng);
    let last = schedule.events.last().map_or(0.0, |e| e.onset_s);
    let n = libm::ceil((last + 1.0 + TAIL_S) * fs) as usize;
    let mut samples = vec![0.0; n * CHANNELS];

    let phases: Vec<f64> = (0..CHANNELS).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    if profile.background_alpha_uv != 0.0 {
        for (t, row) in samples.chunks_mut(CHANNELS).enumerate() {
            let w = 2.0 * PI * ALPHA_HZ * t as f64 / fs;
            for (x, ph) in row.iter_mut().zip(&phases) {
                *x += profile.background_alpha_uv * libm::sin(w + ph);
            }
        }
    }

    let latency_dist = Normal::new(profile.p300_latency_ms, profile.latency_jitter_ms)
        .map_err(|e| Error::invalid(format!("latency distribution: {e}")))?;
    let sigma = profile.p300_width_ms / FWHM_PER_SIGMA;
    for e in &schedule.events {
        let onset = libm::round(e.onset_s * fs) as usize;
        if e.is_target {
            // Keep the bump inside the first second after onset.
            let latency = latency_dist.sample(&mut rng).clamp(sigma, 1000.0 - sigma);
            let z: f64 = StandardNormal.sample(&mut rng);
            let amplitude = (profile.p300_amplitude_uv * (1.0 + profile.amplitude_jitter * z)).max(0.0);
            if amplitude > 0.0 {
                let t = p300_template(latency, amplitude, profile.p300_width_ms, fs, 1000.0)?;
                add_bump(&mut samples, onset, &t, &profile.electrode_gains);
            }
        } else if cfg.late_distractor {
            let latency = rng.random_range(750.0..900.0);
            let amplitude = 0.5 * profile.p300_amplitude_uv;
            if amplitude > 0.0 {
                let t = p300_template(latency, amplitude, profile.p300_width_ms, fs, 1000.0)?;
                add_bump(&mut samples, onset, &t, &profile.electrode_gains);
            }
        }
    }

    if profile.noise_std_uv > 0.0 {
        for x in samples.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += profile.noise_std_uv * z;
        }
    }

    Ok((Recording::new(fs, samples)?, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_peak_and_tails() {
        let t = p300_template(300.0, 10.0, 150.0, 512.0, 1000.0).unwrap();
        assert_eq!(t.len(), 512);
        let argmax = (0..t.len()).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap();
        assert_eq!(argmax, 154);
        assert_eq!(t[154], 10.0);
        assert!(t[0] < 0.01 * 10.0);
        let zero = p300_template(300.0, 0.0, 150.0, 512.0, 1000.0).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert!(p300_template(1200.0, 1.0, 150.0, 512.0, 1000.0).is_err());
        assert!(p300_template(300.0, 1.0, 0.0, 512.0, 1000.0).is_err());
    }

    #[test]
    fn subjects_are_seeded() {
        let none = ProfileOverrides::default();
        assert_eq!(sample_subject(3, &none).unwrap(), sample_subject(3, &none).unwrap());
        let (a, b) = (sample_subject(3, &none).unwrap(), sample_subject(4, &none).unwrap());
        assert!(a.p300_latency_ms != b.p300_latency_ms || a.electrode_gains != b.electrode_gains);
        let fixed = ProfileOverrides { p300_latency_ms: Some(300.0), ..none };
        assert_eq!(sample_subject(3, &fixed).unwrap().p300_latency_ms, 300.0);
    }

    #[test]
    fn sampled_ranges() {
        for seed in 0..20 {
            let p = sample_subject(seed, &ProfileOverrides::default()).unwrap();
            assert!((280.0..420.0).contains(&p.p300_latency_ms));
            assert!((5.0..15.0).contains(&p.p300_amplitude_uv));
            for (i, &g) in p.electrode_gains.iter().enumerate() {
                let active = DEFAULT_ACTIVE_ELECTRODES.iter().any(|n| channel_index(n) == Some(i));
                if active {
                    assert!((0.5..=1.0).contains(&g));
                } else {
                    assert!(g <= 0.1);
                }
            }
        }
    }

    fn small_cfg() -> SynthConfig {
        SynthConfig { runs_per_session: 2, trials_per_run: 3, ..SynthConfig::default() }
    }

    #[test]
    fn silent_profile_gives_silent_recording() {
        let mut p = sample_subject(1, &ProfileOverrides::default()).unwrap();
        p.p300_amplitude_uv = 0.0;
        p.noise_std_uv = 0.0;
        p.background_alpha_uv = 0.0;
        let (rec, sched) = generate_session(&p, &small_cfg(), 1, 1).unwrap();
        assert!(rec.samples().iter().all(|&v| v == 0.0));
        assert_eq!(sched.len(), 36);
    }

    #[test]
    fn session_is_deterministic_and_well_formed() {
        let cfg = small_cfg();
        let p = subject_profile(&cfg, 1).unwrap();
        let a = generate_session(&p, &cfg, 1, 2).unwrap();
        let b = generate_session(&p, &cfg, 1, 2).unwrap();
        assert_eq!(a, b);
        let c = generate_session(&p, &cfg, 1, 3).unwrap();
        assert_ne!(a.1, c.1);
        a.1.validate(0.4, 1.0 / 512.0).unwrap();
        assert_eq!(a.1.n_targets() * 6, a.1.len());
        let last = a.1.events.last().unwrap().onset_s;
        assert!(a.0.duration_s() >= last + 1.0);
    }

    #[test]
    fn default_session_layout() {
        let cfg = SynthConfig::default();
        let p = subject_profile(&cfg, 0).unwrap();
        let (rec, sched) = generate_session(&p, &cfg, 0, 0).unwrap();
        assert_eq!(sched.len(), 720);
        assert_eq!(sched.n_targets(), 120);
        assert_eq!(rec.sample_rate_hz, 512.0);
        assert!(rec.duration_s() >= sched.events[719].onset_s + 1.0);
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(SynthConfig { subjects: 0, ..SynthConfig::default() }.validate().is_err());
        assert!(SynthConfig { isi_ms: 50.0, ..SynthConfig::default() }.validate().is_err());
        assert!(SynthConfig { sample_rate_hz: 64.0, ..SynthConfig::default() }.validate().is_err());
    }
}
