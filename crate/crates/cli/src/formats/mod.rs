//! On-disk formats.

mod model;
mod recording;
mod reports;
mod windows;

pub use model::{model_json, parse_model, read_model, to_json_full_precision, SavedModel, MODEL_SCHEMA};
pub use recording::{read_recording, read_schedule, recording_csv, schedule_csv};
pub use reports::*;
pub use windows::{parse_window, read_windows, window_line, windows_ndjson};
