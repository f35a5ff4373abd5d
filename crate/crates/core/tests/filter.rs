//! Zero-phase filtering properties.

use p300_core::signal::{design_bandpass, filtfilt};
use proptest::prelude::*;
use std::f64::consts::PI;

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * scale)
}

fn band_from(low: f64) -> impl Strategy<Value = (f64, f64, f64, usize)> {
    (prop_oneof![Just(128.0), Just(512.0), Just(2048.0)], low..4.0, 8.0f64..30.0, 1usize..=4)
        .prop_map(|(fs, lo, hi, order)| (lo, hi, fs, order))
}

fn band() -> impl Strategy<Value = (f64, f64, f64, usize)> {
    band_from(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn reversal_commutes_with_filtfilt(
        (lo, hi, fs, order) in band(),
        x in prop::collection::vec(-100.0f64..100.0, 200..600),
    ) {
        let c = design_bandpass(lo, hi, fs, order).unwrap();
        let fwd = filtfilt(&c, &x).unwrap();
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let mut back = filtfilt(&c, &rev).unwrap();
        back.reverse();
        prop_assert!(close(&fwd, &back, 1e-9));
    }

    #[test]
    fn filtfilt_is_linear(
        (lo, hi, fs, order) in band(),
        x in prop::collection::vec(-50.0f64..50.0, 300),
        y in prop::collection::vec(-50.0f64..50.0, 300),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let c = design_bandpass(lo, hi, fs, order).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = filtfilt(&c, &mix).unwrap();
        let fx = filtfilt(&c, &x).unwrap();
        let fy = filtfilt(&c, &y).unwrap();
        let rhs: Vec<f64> = fx.iter().zip(&fy).map(|(u, v)| a * u + b * v).collect();
        prop_assert!(close(&lhs, &rhs, 1e-9));
    }

    // A 10 s record only settles to 1e-6 for low cutoffs of about 1 Hz and up.
    #[test]
    fn designs_are_stable_with_decaying_impulse_response((lo, hi, fs, order) in band_from(1.0)) {
        let c = design_bandpass(lo, hi, fs, order).unwrap();
        prop_assert!(c.max_pole_modulus() < 1.0);
        prop_assert_eq!(c.sections.len(), order);
        let n = (10.0 * fs) as usize;
        let mut impulse = vec![0.0; n];
        impulse[0] = 1.0;
        let h = c.filter(&impulse);
        let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = h[n - n / 10..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(tail < 1e-6 * peak, "tail {tail} peak {peak}");
    }
}

#[test]
fn six_hz_sine_passes_without_lag() {
    let fs = 512.0;
    let x: Vec<f64> = (0..(8.0 * fs) as usize).map(|n| (2.0 * PI * 6.0 * n as f64 / fs).sin()).collect();
    let c = design_bandpass(1.0, 12.0, fs, 3).unwrap();
    let y = filtfilt(&c, &x).unwrap();
    let mid = &y[y.len() / 4..3 * y.len() / 4];
    let amp = mid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((0.95..=1.05).contains(&amp), "amplitude {amp}");
    let lag = (-20i64..=20)
        .max_by(|&a, &b| {
            let xc = |l: i64| -> f64 {
                (1000..3000).map(|n| x[n] * y[(n as i64 + l) as usize]).sum()
            };
            xc(a).total_cmp(&xc(b))
        })
        .unwrap();
    assert_eq!(lag, 0);
}

#[test]
fn constant_is_rejected_by_60_db() {
    let fs = 2048.0;
    let c = design_bandpass(1.0, 12.0, fs, 3).unwrap();
    let x = vec![5.0; 8192];
    let y = filtfilt(&c, &x).unwrap();
    let worst = y[2048..6144].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-3 * 5.0, "residual {worst}");
}
