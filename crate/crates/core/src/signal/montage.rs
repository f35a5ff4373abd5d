/// Number of electrodes in the 10-20 montage used throughout.
pub const CHANNELS: usize = 32;

/// Electrode labels in recording column order.
pub const CHANNEL_NAMES: [&str; CHANNELS] = [
    "Fp1", "AF3", "F7", "F3", "FC1", "FC5", "T7", "C3", "CP1", "CP5", "P7", "P3", "Pz", "PO3",
    "O1", "Oz", "O2", "PO4", "P4", "P8", "CP6", "CP2", "C4", "T8", "FC6", "FC2", "F4", "F8",
    "AF4", "Fp2", "Fz", "Cz",
];

/// Column index of an electrode label (case-insensitive).
pub fn channel_index(name: &str) -> Option<usize> {
    CHANNEL_NAMES
        .iter()
        .position(|c| c.eq_ignore_ascii_case(name))
}
