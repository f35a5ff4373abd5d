//! Elman recurrent networks with a post-recurrent module (PRM) for P300
//! detection in EEG windows.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole numeric
//! pipeline:
//!
//! * [`signal`]: Butterworth bandpass design, zero-phase filtering,
//!   decimation and window extraction.
//! * [`synth`]: seeded oddball-paradigm recordings with known P300 ground
//!   truth.
//! * [`model`]: the Elman network, both prediction heads, exact
//!   backpropagation through time and the input Jacobian.
//! * [`train`]: weighted cross-entropy, balanced accuracy, Nadam, mini-batch
//!   training with early stopping and session-level K-fold validation.
//! * [`explain`]: electrode relevance, PRM weight profiles, gradient×input
//!   maps, hidden-activation differences and shrinkage LDA separability.
//!
//! File formats, SVG rendering and the command-line front end live in the
//! `p300-cli` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod explain;
pub mod model;
pub mod seed;
pub mod signal;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use model::{ForwardTrace, Gradients, Head, ModelParams};
pub use signal::{
    BiquadCascade, EegWindow, Recording, StimulusEvent, StimulusSchedule, WindowMeta, CHANNELS,
    CHANNEL_NAMES, MODEL_RATE_HZ, STEPS,
};
