//! Explainability artifacts against independent oracles and seeded
//! experiments.

use p300_core::explain::{average_relevance, fisher_lda, hidden_activation_diff, local_relevance, ClassFilter};
use p300_core::model::Head;
use p300_core::signal::{design_bandpass, preprocess_recording, EegWindow, WindowMeta};
use p300_core::synth::{generate_session, subject_profile, SubjectProfile, SynthConfig, DEFAULT_ACTIVE_ELECTRODES};
use p300_core::train::{train, TrainConfig};
use p300_core::{signal::channel_index, ModelParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const STEP: f64 = 1e-4;

#[test]
fn local_relevance_is_input_times_difference_quotient() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (steps, channels) = (7, 4);
        let p = ModelParams::init(seed, channels, 5, steps, if seed % 2 == 0 { Head::Prm } else { Head::LastStep }).unwrap();
        let data: Vec<f64> = (0..steps * channels).map(|_| rng.random_range(-1.5..1.5)).collect();
        let w = EegWindow::with_shape(steps, channels, data.clone(), true, WindowMeta::default()).unwrap();
        let map = local_relevance(&p, &w).unwrap();
        let mut y = data.clone();
        let mut quotient = |k: usize, h: f64| {
            y[k] = data[k] + h;
            let up = p.forward(&y).unwrap().p;
            y[k] = data[k] - h;
            let down = p.forward(&y).unwrap().p;
            y[k] = data[k];
            (up - down) / (2.0 * h)
        };
        for t in 0..steps {
            for i in 0..channels {
                let k = t * channels + i;
                // Richardson-refined central difference.
                let g = (4.0 * quotient(k, STEP / 2.0) - quotient(k, STEP)) / 3.0;
                let (a, n) = (map.get(i, t), data[k] * g);
                if a.abs() + n.abs() >= 1e-8 {
                    let e = (a - n).abs() / a.abs().max(n.abs());
                    assert!(e < 1e-5, "seed {seed} ({i},{t}): {a} vs {n}");
                }
            }
        }
    }
}

#[test]
fn lda_on_exchangeable_classes_stays_inside_the_permutation_null() {
    let (n, dim) = (80, 4);
    let mut inside = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut labels: Vec<bool> = (0..n).map(|k| k % 4 == 0).collect();
        labels.shuffle(&mut rng);
        let observed = fisher_lda(&feats, dim, &labels, 0.1).unwrap().fisher_j;
        let mut null: Vec<f64> = (0..100)
            .map(|_| {
                labels.shuffle(&mut rng);
                fisher_lda(&feats, dim, &labels, 0.1).unwrap().fisher_j
            })
            .collect();
        null.sort_by(f64::total_cmp);
        if observed < null[94] {
            inside += 1;
        }
    }
    // 95% expected; 16 of 20 leaves room for sampling error.
    assert!(inside >= 16, "{inside}/20 below the 95th percentile");
}

struct Trained {
    profile: SubjectProfile,
    params: ModelParams,
    test: Vec<EegWindow>,
}

fn trained(seed: u64, lambda_input: f64) -> Trained {
    let cfg = SynthConfig { seed, runs_per_session: 3, ..SynthConfig::default() };
    let profile = subject_profile(&cfg, 0).unwrap();
    let cascade = design_bandpass(1.0, 12.0, cfg.sample_rate_hz, 3).unwrap();
    let windows = |session| {
        let (rec, sched) = generate_session(&profile, &cfg, 0, session).unwrap();
        preprocess_recording(&rec, &sched, &cascade, 0, session).unwrap()
    };
    let train_set: Vec<EegWindow> = (0..2).flat_map(windows).collect();
    let tc = TrainConfig { hidden: 16, epochs: 20, learning_rate: 0.003, lambda_input, seed, ..TrainConfig::default() };
    let params = train(seed, &train_set, &tc).unwrap().params;
    let test = windows(2);
    Trained { profile, params, test }
}

#[test]
fn target_relevance_concentrates_on_injected_electrodes() {
    let injected: Vec<usize> = DEFAULT_ACTIVE_ELECTRODES.iter().map(|n| channel_index(n).unwrap()).collect();
    let mut hits = 0;
    for seed in 0..10 {
        let t = trained(seed, 0.1);
        let map = average_relevance(&t.params, &t.test, ClassFilter::Target).unwrap();
        let row_sum = |i: usize| map.row(i).iter().sum::<f64>().abs();
        let top = (0..map.electrodes).max_by(|&a, &b| row_sum(a).total_cmp(&row_sum(b))).unwrap();
        if injected.contains(&top) {
            hits += 1;
        }
    }
    assert!(hits >= 6, "top electrode injected in {hits}/10 seeds");
}

#[test]
fn hidden_difference_peaks_after_the_response_onset() {
    let mut hits = 0;
    for seed in 0..10 {
        let t = trained(seed, 0.0);
        let diff = hidden_activation_diff(&t.params, &t.test).unwrap();
        let onset = (t.profile.p300_latency_ms * 32.0 / 1000.0).round() as usize;
        if diff.peak_step() + 3 >= onset {
            hits += 1;
        }
    }
    assert!(hits >= 6, "late peak in {hits}/10 seeds");
}

