//! Butterworth bandpass design and zero-phase filtering with second-order
//! sections.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// One second-order section in transposed direct form II, `a0` normalized to 1:
///
/// `y[n] = b0*x[n] + b1*x[n-1] + b2*x[n-2] - a1*y[n-1] - a2*y[n-2]`
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Frequency response at `z` (on the unit circle for a spectrum).
    pub fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let zi2 = zi * zi;
        (self.b0 + zi * self.b1 + zi2 * self.b2) / (1.0 + zi * self.a1 + zi2 * self.a2)
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    /// DC gain, `H(1)`.
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// State reached after an infinitely long constant input of `level`.
    fn steady_state(&self, level: f64) -> [f64; 2] {
        let out = self.dc_gain() * level;
        [out - self.b0 * level, self.b2 * level - self.a2 * out]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignMeta {
    pub low_hz: f64,
    pub high_hz: f64,
    pub sample_rate_hz: f64,
    pub prototype_order: usize,
}

/// Cascade of biquads realizing a bandpass of order `2 * prototype_order`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub meta: DesignMeta,
}

impl BiquadCascade {
    /// Order of the realized transfer function.
    pub fn overall_order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Samples of odd reflection added at each end by [`filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.overall_order() + 1)
    }

    /// Single-pass complex response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * freq_hz / self.meta.sample_rate_hz);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z))
    }

    /// Single-pass magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    /// Largest pole modulus; below 1 for a stable cascade.
    pub fn max_pole_modulus(&self) -> f64 {
        self.poles().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Causal single pass with zero initial state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.run(&mut y, 0.0);
        y
    }

    /// Filters `x` in place, starting every section at the steady state of a
    /// constant input equal to `initial_level`.
    fn run(&self, x: &mut [f64], initial_level: f64) {
        let mut level = initial_level;
        for s in &self.sections {
            let [mut z1, mut z2] = s.steady_state(level);
            level *= s.dc_gain();
            for v in x.iter_mut() {
                let input = *v;
                let out = s.b0 * input + z1;
                z1 = s.b1 * input - s.a1 * out + z2;
                z2 = s.b2 * input - s.a2 * out;
                *v = out;
            }
        }
    }
}

/// Designs a Butterworth bandpass with cutoffs `low_hz`, `high_hz`.
///
/// The analog lowpass prototype of order `prototype_order` is moved to the
/// prewarped band with the lowpass-to-bandpass substitution and mapped to the
/// z-plane with the bilinear transform. Every section carries a conjugate (or
/// real) pole pair and one zero at each of `z = 1` and `z = -1`, so the
/// cascade has `prototype_order` sections and blocks DC exactly.
pub fn design_bandpass(
    low_hz: f64,
    high_hz: f64,
    sample_rate_hz: f64,
    prototype_order: usize,
) -> Result<BiquadCascade> {
    if !(low_hz.is_finite() && high_hz.is_finite() && sample_rate_hz.is_finite()) {
        return Err(Error::invalid("filter frequencies must be finite"));
    }
    if !(0.0 < low_hz && low_hz < high_hz && high_hz < sample_rate_hz / 2.0) {
        return Err(Error::invalid(alloc::format!(
            "bandpass needs 0 < low < high < fs/2, got low={low_hz} high={high_hz} fs={sample_rate_hz}"
        )));
    }
    if prototype_order == 0 {
        return Err(Error::invalid("prototype order must be at least 1"));
    }

    let n = prototype_order;
    let fs2 = 2.0 * sample_rate_hz;
    let w_low = fs2 * libm::tan(PI * low_hz / sample_rate_hz);
    let w_high = fs2 * libm::tan(PI * high_hz / sample_rate_hz);
    let bandwidth = w_high - w_low;
    let center_sq = w_low * w_high;

    let mut analog_poles = Vec::with_capacity(2 * n);
    for k in 0..n {
        let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let half = Complex64::from_polar(1.0, theta) * (bandwidth / 2.0);
        let root = (half * half - center_sq).sqrt();
        analog_poles.push(half + root);
        analog_poles.push(half - root);
    }

    // The analog bandpass has gain bandwidth^n, n zeros at s = 0 and n at
    // infinity; the latter land on z = -1.
    let mut gain = Complex64::new(libm::pow(bandwidth * fs2, n as f64), 0.0);
    for p in &analog_poles {
        gain /= fs2 - p;
    }
    let gain = gain.re;

    let digital: Vec<Complex64> = analog_poles
        .iter()
        .map(|p| (fs2 + p) / (fs2 - p))
        .collect();

    let mut denominators = Vec::with_capacity(n);
    let mut reals = Vec::new();
    for z in &digital {
        if z.im.abs() <= 1e-12 * z.norm().max(1.0) {
            reals.push(z.re);
        } else if z.im > 0.0 {
            denominators.push((-2.0 * z.re, z.norm_sqr()));
        }
    }
    reals.sort_by(f64::total_cmp);
    for pair in reals.chunks(2) {
        match *pair {
            [r1, r2] => denominators.push((-(r1 + r2), r1 * r2)),
            _ => return Err(Error::invalid("unpaired real pole in bandpass design")),
        }
    }
    if denominators.len() != n {
        return Err(Error::invalid("pole pairing produced an unexpected section count"));
    }

    let per_section = libm::pow(gain.abs(), 1.0 / n as f64);
    let sections = denominators
        .into_iter()
        .enumerate()
        .map(|(i, (a1, a2))| {
            let g = if i == 0 && gain < 0.0 { -per_section } else { per_section };
            Biquad { b0: g, b1: 0.0, b2: -g, a1, a2 }
        })
        .collect();

    Ok(BiquadCascade {
        sections,
        meta: DesignMeta { low_hz, high_hz, sample_rate_hz, prototype_order },
    })
}

/// Zero-phase forward-backward filtering.
///
/// The input is extended at both ends by an odd reflection of
/// [`BiquadCascade::pad_len`] samples; each pass starts from the steady state
/// matching its first sample. Forward-then-backward and backward-then-forward
/// differ only in their edge transients, so both are run and averaged, which
/// makes reversing the input reverse the output exactly. The effective
/// magnitude response is `|H|^2`.
pub fn filtfilt(cascade: &BiquadCascade, x: &[f64]) -> Result<Vec<f64>> {
    let pad = cascade.pad_len();
    if x.len() <= pad {
        return Err(Error::invalid(alloc::format!(
            "sequence of length {} is too short for filtfilt padding of {pad}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("filtfilt input contains non-finite values"));
    }

    let first = x[0];
    let last = x[x.len() - 1];
    let mut ext = Vec::with_capacity(x.len() + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * last - x[x.len() - 1 - i]));

    let mut rev = ext.clone();
    rev.reverse();
    forward_backward(cascade, &mut ext);
    forward_backward(cascade, &mut rev);
    Ok((pad..pad + x.len())
        .map(|k| 0.5 * (ext[k] + rev[rev.len() - 1 - k]))
        .collect())
}

fn forward_backward(cascade: &BiquadCascade, buf: &mut [f64]) {
    let level = buf[0];
    cascade.run(buf, level);
    buf.reverse();
    let level = buf[0];
    cascade.run(buf, level);
    buf.reverse();
}
