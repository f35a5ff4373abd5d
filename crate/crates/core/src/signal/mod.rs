//! EEG preprocessing: zero-phase bandpass filtering, decimation to the model
//! rate and extraction of labeled stimulus-locked windows.

mod filter;
mod montage;
mod window;

pub use filter::{design_bandpass, filtfilt, Biquad, BiquadCascade, DesignMeta};
pub use montage::{channel_index, CHANNELS, CHANNEL_NAMES};
pub use window::{
    decimate, extract_windows, preprocess_recording, EegWindow, Recording, StimulusEvent,
    StimulusSchedule, WindowMeta, IMAGES_PER_TRIAL,
};

/// Sampling rate the network consumes, in Hz.
pub const MODEL_RATE_HZ: f64 = 32.0;
/// Timesteps per window: one second at [`MODEL_RATE_HZ`].
pub const STEPS: usize = 32;
