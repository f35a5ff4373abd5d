//! Elman recurrent network with a per-timestep sigmoid output and two
//! prediction heads.
//!
//! ```text
//! h_t = tanh(W_xh^T x_t + W_hh h_{t-1} + b_h)      h_0 = 0
//! y_t = sigmoid(w_hy . h_t + b_y)
//! p   = y_T                                         (LastStep)
//! p   = sigmoid(w_p . y_{1..T} + b_p)               (Prm)
//! ```
//!
//! Gradients are derived by hand and accumulated in a single reverse sweep
//! shared by [`backward`] and [`input_jacobian`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::seed::{self, stream};
use crate::signal::{EegWindow, CHANNELS, STEPS};
use crate::{Error, Result};

/// Default recurrent layer width.
pub const DEFAULT_HIDDEN: usize = 50;

/// Probability clamp applied inside the loss only.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Head {
    /// Prediction is the output of the final timestep.
    #[cfg_attr(feature = "serde", serde(rename = "last"))]
    LastStep,
    /// Logistic regression over all per-timestep outputs.
    Prm,
}

/// All learnable tensors.
///
/// `w_xh` is `inputs x hidden` (`[i * hidden + j]` connects input `i` to
/// unit `j`); `w_hh` is `hidden x hidden` (`[j * hidden + k]` feeds
/// `h_{t-1}[k]` into unit `j`). `w_p` has `steps` entries for the PRM head
/// and is empty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub inputs: usize,
    pub hidden: usize,
    pub steps: usize,
    pub head: Head,
    pub w_xh: Vec<f64>,
    pub w_hh: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_hy: Vec<f64>,
    pub b_y: f64,
    pub w_p: Vec<f64>,
    pub b_p: f64,
}

/// `dL/dtheta` with the same layout as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_xh: Vec<f64>,
    pub w_hh: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_hy: Vec<f64>,
    pub b_y: f64,
    pub w_p: Vec<f64>,
    pub b_p: f64,
    pub loss: f64,
}

/// Activations kept from a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub steps: usize,
    pub hidden: usize,
    /// `steps x hidden`
    pub h: Vec<f64>,
    /// Pre-tanh activations, `steps x hidden`.
    pub pre_h: Vec<f64>,
    pub y: Vec<f64>,
    pub p: f64,
}

impl ForwardTrace {
    pub fn hidden_at(&self, t: usize) -> &[f64] {
        &self.h[t * self.hidden..(t + 1) * self.hidden]
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn glorot<R: Rng>(rng: &mut R, len: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    (0..len).map(|_| rng.random_range(-limit..=limit)).collect()
}

/// Glorot-uniform weights and zero biases for a standard 32 x 32 input.
pub fn init_params(seed: u64, hidden: usize, head: Head) -> Result<ModelParams> {
    ModelParams::init(seed, CHANNELS, hidden, STEPS, head)
}

impl ModelParams {
    pub fn zeros(inputs: usize, hidden: usize, steps: usize, head: Head) -> Self {
        Self {
            inputs,
            hidden,
            steps,
            head,
            w_xh: vec![0.0; inputs * hidden],
            w_hh: vec![0.0; hidden * hidden],
            b_h: vec![0.0; hidden],
            w_hy: vec![0.0; hidden],
            b_y: 0.0,
            w_p: match head {
                Head::LastStep => Vec::new(),
                Head::Prm => vec![0.0; steps],
            },
            b_p: 0.0,
        }
    }

    pub fn init(seed: u64, inputs: usize, hidden: usize, steps: usize, head: Head) -> Result<Self> {
        if inputs == 0 || hidden == 0 || steps == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        let mut rng = seed::rng(seed, &[stream::INIT]);
        let mut p = Self::zeros(inputs, hidden, steps, head);
        p.w_xh = glorot(&mut rng, inputs * hidden, inputs, hidden);
        p.w_hh = glorot(&mut rng, hidden * hidden, hidden, hidden);
        p.w_hy = glorot(&mut rng, hidden, hidden, 1);
        if head == Head::Prm {
            p.w_p = glorot(&mut rng, steps, steps, 1);
        }
        Ok(p)
    }

    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        let (i, h, t) = (self.inputs, self.hidden, self.steps);
        let prm_len = if self.head == Head::Prm { t } else { 0 };
        let shapes_ok = i > 0
            && h > 0
            && t > 0
            && self.w_xh.len() == i * h
            && self.w_hh.len() == h * h
            && self.b_h.len() == h
            && self.w_hy.len() == h
            && self.w_p.len() == prm_len;
        if !shapes_ok {
            return Err(Error::invalid(format!(
                "parameter shapes inconsistent with inputs={i} hidden={h} steps={t} head={:?}",
                self.head
            )));
        }
        for (name, values) in self.tensors() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { tensor: name });
            }
        }
        Ok(())
    }

    /// Named views of every tensor, biases as length-1 slices. `w_p` and
    /// `b_p` are omitted for the last-step head.
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut v: Vec<(&'static str, &[f64])> = vec![
            ("W_xh", &self.w_xh),
            ("W_hh", &self.w_hh),
            ("b_h", &self.b_h),
            ("w_hy", &self.w_hy),
            ("b_y", core::slice::from_ref(&self.b_y)),
        ];
        if self.head == Head::Prm {
            v.push(("w_p", &self.w_p));
            v.push(("b_p", core::slice::from_ref(&self.b_p)));
        }
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let prm = self.head == Head::Prm;
        let mut v: Vec<(&'static str, &mut [f64])> = vec![
            ("W_xh", &mut self.w_xh),
            ("W_hh", &mut self.w_hh),
            ("b_h", &mut self.b_h),
            ("w_hy", &mut self.w_hy),
            ("b_y", core::slice::from_mut(&mut self.b_y)),
        ];
        if prm {
            v.push(("w_p", &mut self.w_p));
            v.push(("b_p", core::slice::from_mut(&mut self.b_p)));
        }
        v
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.steps * self.inputs {
            return Err(Error::invalid(format!(
                "input has {} values, model expects {}x{}",
                x.len(),
                self.steps,
                self.inputs
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("input contains non-finite values"));
        }
        Ok(())
    }

    /// Runs the network over a time-major `steps x inputs` sequence.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let (n_in, n_h, n_t) = (self.inputs, self.hidden, self.steps);
        let mut h = vec![0.0; n_t * n_h];
        let mut pre_h = vec![0.0; n_t * n_h];
        let mut y = vec![0.0; n_t];

        for t in 0..n_t {
            let (done, rest) = h.split_at_mut(t * n_h);
            let prev = if t > 0 { &done[(t - 1) * n_h..] } else { &[][..] };
            let pre = &mut pre_h[t * n_h..(t + 1) * n_h];
            pre.copy_from_slice(&self.b_h);
            for (i, &xi) in x[t * n_in..(t + 1) * n_in].iter().enumerate() {
                if xi != 0.0 {
                    let row = &self.w_xh[i * n_h..(i + 1) * n_h];
                    for (a, &w) in pre.iter_mut().zip(row) {
                        *a += xi * w;
                    }
                }
            }
            if t > 0 {
                for (j, a) in pre.iter_mut().enumerate() {
                    let row = &self.w_hh[j * n_h..(j + 1) * n_h];
                    *a += row.iter().zip(prev).map(|(w, v)| w * v).sum::<f64>();
                }
            }
            let cur = &mut rest[..n_h];
            for (o, &a) in cur.iter_mut().zip(pre.iter()) {
                *o = libm::tanh(a);
            }
            let z: f64 = self.w_hy.iter().zip(cur.iter()).map(|(w, v)| w * v).sum::<f64>();
            y[t] = sigmoid(z + self.b_y);
        }

        let p = match self.head {
            Head::LastStep => y[n_t - 1],
            Head::Prm => {
                let z: f64 = self.w_p.iter().zip(&y).map(|(w, v)| w * v).sum();
                sigmoid(z + self.b_p)
            }
        };
        Ok(ForwardTrace { steps: n_t, hidden: n_h, h, pre_h, y, p })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.p)
    }

    fn check_trace(&self, trace: &ForwardTrace, x: &[f64]) -> Result<()> {
        self.check_input(x)?;
        if trace.steps != self.steps
            || trace.hidden != self.hidden
            || trace.h.len() != self.steps * self.hidden
            || trace.y.len() != self.steps
        {
            return Err(Error::invalid("forward trace does not match the model"));
        }
        Ok(())
    }

    /// Reverse sweep seeded with `d_logit`, the derivative of the objective
    /// with respect to the final pre-sigmoid logit. Parameter gradients are
    /// added to `grads` scaled by `scale`; input gradients are written to
    /// `dx` (time-major) when requested.
    fn reverse_sweep(
        &self,
        trace: &ForwardTrace,
        x: &[f64],
        d_logit: f64,
        scale: f64,
        mut grads: Option<&mut Gradients>,
        mut dx: Option<&mut [f64]>,
    ) {
        let (n_in, n_h, n_t) = (self.inputs, self.hidden, self.steps);

        // Loss signal reaching each per-step logit z_t = w_hy . h_t + b_y.
        let mut dz = vec![0.0; n_t];
        match self.head {
            Head::LastStep => dz[n_t - 1] = d_logit,
            Head::Prm => {
                for ((d, &w), &y) in dz.iter_mut().zip(&self.w_p).zip(&trace.y) {
                    *d = d_logit * w * y * (1.0 - y);
                }
                if let Some(g) = grads.as_deref_mut() {
                    for (gw, &y) in g.w_p.iter_mut().zip(&trace.y) {
                        *gw += scale * d_logit * y;
                    }
                    g.b_p += scale * d_logit;
                }
            }
        }

        let mut carry = vec![0.0; n_h];
        let mut da = vec![0.0; n_h];
        for t in (0..n_t).rev() {
            let h_t = trace.hidden_at(t);
            for j in 0..n_h {
                let dh = carry[j] + dz[t] * self.w_hy[j];
                da[j] = dh * (1.0 - h_t[j] * h_t[j]);
            }

            if let Some(g) = grads.as_deref_mut() {
                if dz[t] != 0.0 {
                    let s = scale * dz[t];
                    for (gw, &v) in g.w_hy.iter_mut().zip(h_t) {
                        *gw += s * v;
                    }
                    g.b_y += s;
                }
                for (gb, &a) in g.b_h.iter_mut().zip(&da) {
                    *gb += scale * a;
                }
                for (i, &xi) in x[t * n_in..(t + 1) * n_in].iter().enumerate() {
                    if xi != 0.0 {
                        let s = scale * xi;
                        let row = &mut g.w_xh[i * n_h..(i + 1) * n_h];
                        for (gw, &a) in row.iter_mut().zip(&da) {
                            *gw += s * a;
                        }
                    }
                }
                if t > 0 {
                    let h_prev = trace.hidden_at(t - 1);
                    for (j, &a) in da.iter().enumerate() {
                        let s = scale * a;
                        let row = &mut g.w_hh[j * n_h..(j + 1) * n_h];
                        for (gw, &v) in row.iter_mut().zip(h_prev) {
                            *gw += s * v;
                        }
                    }
                }
            }

            if let Some(dx) = dx.as_deref_mut() {
                for (i, out) in dx[t * n_in..(t + 1) * n_in].iter_mut().enumerate() {
                    let row = &self.w_xh[i * n_h..(i + 1) * n_h];
                    *out = row.iter().zip(&da).map(|(w, a)| w * a).sum();
                }
            }

            if t > 0 {
                carry.iter_mut().for_each(|c| *c = 0.0);
                for (j, &a) in da.iter().enumerate() {
                    let row = &self.w_hh[j * n_h..(j + 1) * n_h];
                    for (c, &w) in carry.iter_mut().zip(row) {
                        *c += a * w;
                    }
                }
            }
        }
    }

    /// Adds `scale * d/dtheta [class_weight * XE(target, p)]` to `grads` and
    /// returns that data loss. Regularization is not included; see
    /// [`Gradients::add_l1`].
    pub fn accumulate_data_gradient(
        &self,
        trace: &ForwardTrace,
        x: &[f64],
        target: bool,
        class_weight: f64,
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<f64> {
        self.check_trace(trace, x)?;
        let t = if target { 1.0 } else { 0.0 };
        // d/dz of XE(t, sigmoid(z)) is p - t.
        let d_logit = class_weight * (trace.p - t);
        self.reverse_sweep(trace, x, d_logit, scale, Some(grads), None);
        Ok(class_weight * cross_entropy(trace.p, target))
    }

    /// Exact gradient of
    /// `class_weight * XE(target, p) + lambda_input * |W_xh|_1 + lambda_prm * |w_p|_1`.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        x: &[f64],
        target: bool,
        class_weight: f64,
        lambda_input: f64,
        lambda_prm: f64,
    ) -> Result<Gradients> {
        let mut g = Gradients::zeros_like(self);
        let data = self.accumulate_data_gradient(trace, x, target, class_weight, 1.0, &mut g)?;
        g.loss = data + g.add_l1(self, lambda_input, lambda_prm);
        Ok(g)
    }

    /// `dp/dx`, time-major like the input.
    pub fn input_jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward(x)?;
        let mut dx = vec![0.0; x.len()];
        let d_logit = trace.p * (1.0 - trace.p);
        self.reverse_sweep(&trace, x, d_logit, 0.0, None, Some(&mut dx));
        Ok(dx)
    }

    fn check_window(&self, window: &EegWindow) -> Result<()> {
        if window.steps != self.steps || window.channels != self.inputs {
            return Err(Error::invalid(format!(
                "window is {}x{}, model expects {}x{}",
                window.steps, window.channels, self.steps, self.inputs
            )));
        }
        Ok(())
    }
}

/// Clamped binary cross-entropy of a single prediction.
pub fn cross_entropy(p: f64, target: bool) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if target {
        -libm::log(p)
    } else {
        -libm::log(1.0 - p)
    }
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            w_xh: vec![0.0; params.w_xh.len()],
            w_hh: vec![0.0; params.w_hh.len()],
            b_h: vec![0.0; params.b_h.len()],
            w_hy: vec![0.0; params.w_hy.len()],
            b_y: 0.0,
            w_p: vec![0.0; params.w_p.len()],
            b_p: 0.0,
            loss: 0.0,
        }
    }

    pub fn clear(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
        self.loss = 0.0;
    }

    /// Adds the L1 subgradients (`sign(0) = 0`) and returns the penalty.
    pub fn add_l1(&mut self, params: &ModelParams, lambda_input: f64, lambda_prm: f64) -> f64 {
        let mut penalty = 0.0;
        if lambda_input != 0.0 {
            for (g, &w) in self.w_xh.iter_mut().zip(&params.w_xh) {
                *g += lambda_input * sign(w);
                penalty += lambda_input * w.abs();
            }
        }
        if lambda_prm != 0.0 {
            for (g, &w) in self.w_p.iter_mut().zip(&params.w_p) {
                *g += lambda_prm * sign(w);
                penalty += lambda_prm * w.abs();
            }
        }
        penalty
    }

    /// Same order and names as [`ModelParams::tensors`].
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut v: Vec<(&'static str, &[f64])> = vec![
            ("W_xh", &self.w_xh),
            ("W_hh", &self.w_hh),
            ("b_h", &self.b_h),
            ("w_hy", &self.w_hy),
            ("b_y", core::slice::from_ref(&self.b_y)),
        ];
        if !self.w_p.is_empty() {
            v.push(("w_p", &self.w_p));
            v.push(("b_p", core::slice::from_ref(&self.b_p)));
        }
        v
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("W_xh", &mut self.w_xh[..]),
            ("W_hh", &mut self.w_hh[..]),
            ("b_h", &mut self.b_h[..]),
            ("w_hy", &mut self.w_hy[..]),
            ("b_y", core::slice::from_mut(&mut self.b_y)),
            ("w_p", &mut self.w_p[..]),
            ("b_p", core::slice::from_mut(&mut self.b_p)),
        ]
    }
}

pub fn forward(params: &ModelParams, window: &EegWindow) -> Result<ForwardTrace> {
    params.check_window(window)?;
    params.forward(&window.data)
}

pub fn backward(
    params: &ModelParams,
    trace: &ForwardTrace,
    window: &EegWindow,
    class_weight: f64,
    lambda_input: f64,
    lambda_prm: f64,
) -> Result<Gradients> {
    params.check_window(window)?;
    params.backward(trace, &window.data, window.target, class_weight, lambda_input, lambda_prm)
}

/// `dp/dx` as a time-major `steps x channels` matrix.
pub fn input_jacobian(params: &ModelParams, window: &EegWindow) -> Result<Vec<f64>> {
    params.check_window(window)?;
    params.input_jacobian(&window.data)
}
