//! Finite-difference oracle for gradients and input Jacobians, shared by the
//! gradient property tests and the acceptance suite.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use p300_core::model::{cross_entropy, Head, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-4;

/// Loss recomputed from the forward pass only.
pub fn loss(p: &ModelParams, x: &[f64], target: bool, cw: f64, l_in: f64, l_prm: f64) -> f64 {
    let prob = p.forward(x).unwrap().p;
    cw * cross_entropy(prob, target)
        + l_in * p.w_xh.iter().map(|w| w.abs()).sum::<f64>()
        + l_prm * p.w_p.iter().map(|w| w.abs()).sum::<f64>()
}

/// Central difference at `STEP` with one Richardson refinement (`STEP / 2`),
/// cancelling the `h^2` truncation term that otherwise dominates on entries
/// with gradients near `1e-5`.
pub fn central(mut f: impl FnMut(f64) -> f64) -> f64 {
    let d = |h: f64, f: &mut dyn FnMut(f64) -> f64| (f(h) - f(-h)) / (2.0 * h);
    let coarse = d(STEP, &mut f);
    let fine = d(STEP / 2.0, &mut f);
    (4.0 * fine - coarse) / 3.0
}

pub fn rel_err(a: f64, n: f64) -> Option<f64> {
    (a.abs() + n.abs() >= 1e-8).then(|| (a - n).abs() / a.abs().max(n.abs()))
}

/// Complex-step reference: `Im f(v + ih) / h` has no subtractive
/// cancellation, so it stays accurate on entries whose gradient is so small
/// that the difference quotient drowns in round-off.
pub const CSTEP: f64 = 1e-30;

/// Complex mirror of the forward pass, parameters flattened in `tensors()`
/// order.
pub struct ComplexModel {
    inputs: usize,
    hidden: usize,
    steps: usize,
    head: Head,
    tensors: Vec<(&'static str, Vec<C>)>,
}

impl ComplexModel {
    pub fn new(p: &ModelParams) -> Self {
        let tensors =
            p.tensors().into_iter().map(|(n, t)| (n, t.iter().map(|&v| C::new(v, 0.0)).collect())).collect();
        Self { inputs: p.inputs, hidden: p.hidden, steps: p.steps, head: p.head, tensors }
    }

    fn get(&self, name: &str) -> &[C] {
        &self.tensors.iter().find(|(n, _)| *n == name).unwrap().1
    }

    fn slot(&mut self, name: &str, k: usize) -> &mut C {
        &mut self.tensors.iter_mut().find(|(n, _)| *n == name).unwrap().1[k]
    }

    pub fn prob(&self, x: &[C]) -> C {
        let sigmoid = |z: C| C::new(1.0, 0.0) / (C::new(1.0, 0.0) + (-z).exp());
        let (n_in, n_h) = (self.inputs, self.hidden);
        let (w_xh, w_hh, b_h, w_hy) = (self.get("W_xh"), self.get("W_hh"), self.get("b_h"), self.get("w_hy"));
        let b_y = self.get("b_y")[0];
        let mut prev = vec![C::new(0.0, 0.0); n_h];
        let mut y = Vec::with_capacity(self.steps);
        for t in 0..self.steps {
            let cur: Vec<C> = (0..n_h)
                .map(|j| {
                    let mut a = b_h[j];
                    for i in 0..n_in {
                        a += x[t * n_in + i] * w_xh[i * n_h + j];
                    }
                    for k in 0..n_h {
                        a += w_hh[j * n_h + k] * prev[k];
                    }
                    a.tanh()
                })
                .collect();
            let z: C = cur.iter().zip(w_hy).map(|(h, w)| h * w).sum();
            y.push(sigmoid(z + b_y));
            prev = cur;
        }
        match self.head {
            Head::LastStep => y[self.steps - 1],
            Head::Prm => {
                let z: C = y.iter().zip(self.get("w_p")).map(|(v, w)| v * w).sum();
                sigmoid(z + self.get("b_p")[0])
            }
        }
    }

    pub fn data_loss(&self, x: &[C], target: bool, cw: f64) -> C {
        let p = self.prob(x);
        let one = C::new(1.0, 0.0);
        cw * if target { -p.ln() } else { -(one - p).ln() }
    }
}

pub fn complex_input(x: &[f64]) -> Vec<C> {
    x.iter().map(|&v| C::new(v, 0.0)).collect()
}

/// Error of the analytic value against the difference quotient, falling
/// back to the complex-step reference when the quotient itself misses it.
pub fn checked_err(analytic: f64, numeric: f64, reference: impl FnOnce() -> f64) -> Option<f64> {
    let e = rel_err(analytic, numeric)?;
    if e < 1e-5 {
        return Some(e);
    }
    let exact = reference();
    let quotient_off = rel_err(exact, numeric).unwrap_or(0.0) >= 1e-5;
    let analytic_off = rel_err(analytic, exact).unwrap_or(0.0);
    Some(if quotient_off { analytic_off } else { e })
}

pub fn random_case(seed: u64, hidden: usize, steps: usize, inputs: usize, head: Head) -> (ModelParams, Vec<f64>) {
    let mut p = ModelParams::init(seed, inputs, hidden, steps, head).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    // Non-zero biases so every path is exercised.
    p.b_h.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    p.b_y = rng.random_range(-0.5..0.5);
    p.b_p = rng.random_range(-0.5..0.5);
    let x = (0..steps * inputs).map(|_| rng.random_range(-1.5..1.5)).collect();
    (p, x)
}

pub fn entry<'a>(q: &'a mut ModelParams, name: &str, k: usize) -> &'a mut f64 {
    let (_, t) = q.tensors_mut().into_iter().find(|(n, _)| *n == name).unwrap();
    &mut t[k]
}

/// Largest relative error over every parameter entry.
pub fn max_param_error(p: &ModelParams, x: &[f64], target: bool, cw: f64, l_in: f64, l_prm: f64) -> f64 {
    let trace = p.forward(x).unwrap();
    let g = p.backward(&trace, x, target, cw, l_in, l_prm).unwrap();
    let analytic: Vec<(&str, Vec<f64>)> = g.tensors().into_iter().map(|(n, t)| (n, t.to_vec())).collect();
    let mut worst = 0.0f64;
    let mut q = p.clone();
    let mut cm = ComplexModel::new(p);
    let cx = complex_input(x);
    let names: Vec<&str> = analytic.iter().map(|(n, _)| *n).collect();
    for (name, grad) in &analytic {
        for (k, &analytic_k) in grad.iter().enumerate() {
            let original = *entry(&mut q, name, k);
            // The L1 kink is not differentiable; stay clear of it.
            let l1_entry = (*name == "W_xh" && l_in > 0.0) || (*name == "w_p" && l_prm > 0.0);
            if l1_entry && original.abs() < 10.0 * STEP {
                continue;
            }
            let numeric = central(|h| {
                *entry(&mut q, name, k) = original + h;
                loss(&q, x, target, cw, l_in, l_prm)
            });
            *entry(&mut q, name, k) = original;
            let reference = || {
                *cm.slot(name, k) += C::new(0.0, CSTEP);
                let d = cm.data_loss(&cx, target, cw).im / CSTEP;
                *cm.slot(name, k) -= C::new(0.0, CSTEP);
                let penalty = match *name {
                    "W_xh" => l_in,
                    "w_p" => l_prm,
                    _ => 0.0,
                };
                d + penalty * original.signum()
            };
            if let Some(e) = checked_err(analytic_k, numeric, reference) {
                worst = worst.max(e);
            }
        }
    }
    assert!(names.contains(&"W_hh"));
    worst
}

pub fn max_input_error(p: &ModelParams, x: &[f64]) -> f64 {
    let jac = p.input_jacobian(x).unwrap();
    let mut worst = 0.0f64;
    let mut y = x.to_vec();
    let cm = ComplexModel::new(p);
    let mut cx = complex_input(x);
    for k in 0..x.len() {
        let numeric = central(|h| {
            y[k] = x[k] + h;
            p.forward(&y).unwrap().p
        });
        y[k] = x[k];
        let reference = || {
            cx[k].im = CSTEP;
            let d = cm.prob(&cx).im / CSTEP;
            cx[k].im = 0.0;
            d
        };
        if let Some(e) = checked_err(jac[k], numeric, reference) {
            worst = worst.max(e);
        }
    }
    worst
}
