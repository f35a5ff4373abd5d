//! Analytic gradients and input Jacobians against central differences.

#[path = "support/fd_oracle.rs"]
mod fd_oracle;

use fd_oracle::*;
use p300_core::model::{Head, ModelParams};
use proptest::prelude::*;

fn head_strategy() -> impl Strategy<Value = Head> {
    prop_oneof![Just(Head::LastStep), Just(Head::Prm)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn parameter_gradients_match_central_differences(
        seed in any::<u64>(),
        hidden in 2usize..=8,
        steps in 3usize..=8,
        inputs in 2usize..=6,
        head in head_strategy(),
        target in any::<bool>(),
        cw in prop_oneof![Just(1.0), Just(0.2)],
        l_in in prop_oneof![Just(0.0), Just(0.01), Just(0.1)],
        l_prm in prop_oneof![Just(0.0), Just(0.01), Just(0.1)],
    ) {
        let (p, x) = random_case(seed, hidden, steps, inputs, head);
        let err = max_param_error(&p, &x, target, cw, l_in, l_prm);
        prop_assert!(err < 1e-5, "max relative error {err}");
    }

    #[test]
    fn input_jacobian_matches_central_differences(
        seed in any::<u64>(),
        hidden in 2usize..=8,
        steps in 3usize..=8,
        inputs in 2usize..=6,
        head in head_strategy(),
    ) {
        let (p, x) = random_case(seed, hidden, steps, inputs, head);
        let err = max_input_error(&p, &x);
        prop_assert!(err < 1e-5, "max relative error {err}");
    }

    #[test]
    fn activations_stay_bounded(seed in any::<u64>(), head in head_strategy(), scale in 0.1f64..50.0) {
        let (p, x) = random_case(seed, 6, 8, 4, head);
        let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let tr = p.forward(&x).unwrap();
        prop_assert!(tr.h.iter().all(|h| h.abs() <= 1.0));
        prop_assert!(tr.y.iter().all(|&y| (0.0..=1.0).contains(&y)));
        prop_assert!((0.0..=1.0).contains(&tr.p));
        if head == Head::LastStep {
            prop_assert_eq!(tr.p, tr.y[7]);
        }
    }

    /// A PRM head that only looks at the last output agrees in sign with the
    /// last-step prediction.
    #[test]
    fn prm_with_last_weight_only_matches_last_step(seed in any::<u64>()) {
        let (mut p, x) = random_case(seed, 5, 6, 3, Head::Prm);
        let s = 50.0;
        p.w_p.iter_mut().for_each(|w| *w = 0.0);
        p.w_p[5] = s;
        p.b_p = -s / 2.0;
        let tr = p.forward(&x).unwrap();
        let y_t = tr.y[5];
        prop_assume!((y_t - 0.5).abs() > 1e-9);
        prop_assert_eq!(tr.p > 0.5, y_t > 0.5);
    }

    /// Without recurrence, y_t only sees x_t.
    #[test]
    fn outputs_are_time_local_without_recurrence(seed in any::<u64>(), t in 0usize..6, shift in 1usize..6, delta in -3.0f64..3.0) {
        let t2 = (t + shift) % 6;
        let (mut p, x) = random_case(seed, 4, 6, 3, Head::Prm);
        p.w_hh.iter_mut().for_each(|w| *w = 0.0);
        let before = p.forward(&x).unwrap();
        let mut y = x.clone();
        y[t2 * 3 + 1] += delta;
        let after = p.forward(&y).unwrap();
        prop_assert_eq!(before.y[t], after.y[t]);
        // Jacobian entries for step t depend on x_t alone (through dp/dy_t).
        let j1 = p.input_jacobian(&x).unwrap();
        let j2 = p.input_jacobian(&y).unwrap();
        let ratio = |j: &[f64], tr: &p300_core::ForwardTrace| -> Vec<f64> {
            let dp_dy = tr.p * (1.0 - tr.p) * p.w_p[t];
            (0..3).map(|i| j[t * 3 + i] / dp_dy).collect()
        };
        for (a, b) in ratio(&j1, &before).iter().zip(ratio(&j2, &after)) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
        }
    }
}

#[test]
fn zero_weight_subgradient_is_zero() {
    let mut p = ModelParams::init(3, 2, 3, 4, Head::Prm).unwrap();
    p.w_xh[0] = 0.0;
    p.w_p[1] = 0.0;
    let x = vec![0.3; 8];
    let tr = p.forward(&x).unwrap();
    let plain = p.backward(&tr, &x, true, 1.0, 0.0, 0.0).unwrap();
    let reg = p.backward(&tr, &x, true, 1.0, 0.1, 0.01).unwrap();
    assert_eq!(plain.w_xh[0], reg.w_xh[0]);
    assert_eq!(plain.w_p[1], reg.w_p[1]);
    assert!((reg.w_xh[1] - plain.w_xh[1] - 0.1 * p.w_xh[1].signum()).abs() < 1e-15);
}


proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn complex_mirror_reproduces_the_forward_pass(
        seed in any::<u64>(),
        hidden in 2usize..=8,
        steps in 3usize..=8,
        inputs in 2usize..=6,
        head in head_strategy(),
    ) {
        let (p, x) = random_case(seed, hidden, steps, inputs, head);
        let real = p.forward(&x).unwrap().p;
        let mirrored = ComplexModel::new(&p).prob(&complex_input(&x));
        prop_assert_eq!(mirrored.im, 0.0);
        prop_assert!((mirrored.re - real).abs() <= 1e-14);
    }
}
