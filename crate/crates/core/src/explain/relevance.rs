use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{self, Head, ModelParams};
use crate::signal::{EegWindow, WindowMeta};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Normalization {
    Raw,
    MaxAbsOne,
}

/// Signed relevance per electrode and timestep, electrode-major
/// (`values[i * steps + t]`).
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMap {
    pub electrodes: usize,
    pub steps: usize,
    pub values: Vec<f64>,
    /// Source window; `None` for averaged maps.
    pub window_meta: Option<WindowMeta>,
    pub normalization: Normalization,
}

impl AttributionMap {
    pub fn get(&self, electrode: usize, step: usize) -> f64 {
        self.values[electrode * self.steps + step]
    }

    pub fn row(&self, electrode: usize) -> &[f64] {
        &self.values[electrode * self.steps..(electrode + 1) * self.steps]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rescales so the largest magnitude is 1; all-zero maps are unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs();
        let values = if m > 0.0 {
            self.values.iter().map(|v| v / m).collect()
        } else {
            self.values.clone()
        };
        Self { values, normalization: Normalization::MaxAbsOne, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelevanceVector {
    pub per_electrode: Vec<f64>,
    pub normalized: bool,
}

impl RelevanceVector {
    /// Electrode indices sorted by decreasing relevance (ties by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.per_electrode.len()).collect();
        idx.sort_by(|&a, &b| self.per_electrode[b].total_cmp(&self.per_electrode[a]).then(a.cmp(&b)));
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassFilter {
    Target,
    NonTarget,
    All,
}

impl ClassFilter {
    pub fn accepts(self, target: bool) -> bool {
        match self {
            ClassFilter::Target => target,
            ClassFilter::NonTarget => !target,
            ClassFilter::All => true,
        }
    }
}

/// Electrode relevance `R_i = sum_j |W_xh[i][j]|`, optionally divided by its
/// maximum.
pub fn global_relevance(params: &ModelParams, normalize: bool) -> RelevanceVector {
    let mut per_electrode: Vec<f64> = params
        .w_xh
        .chunks(params.hidden)
        .map(|row| row.iter().map(|w| w.abs()).sum())
        .collect();
    if normalize {
        let max = per_electrode.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            per_electrode.iter_mut().for_each(|r| *r /= max);
        }
    }
    RelevanceVector { per_electrode, normalized: normalize }
}

/// `|w_p|` per timestep.
pub fn prm_profile(params: &ModelParams) -> Result<Vec<f64>> {
    match params.head {
        Head::Prm => Ok(params.w_p.iter().map(|w| w.abs()).collect()),
        Head::LastStep => Err(Error::invalid("PRM profile requested for a last-step model")),
    }
}

/// Gradient×input: `values[i][t] = x[t][i] * dp/dx[t][i]`, sign preserved.
pub fn local_relevance(params: &ModelParams, window: &EegWindow) -> Result<AttributionMap> {
    let jac = model::input_jacobian(params, window)?;
    let (steps, electrodes) = (window.steps, window.channels);
    let mut values = vec![0.0; steps * electrodes];
    for t in 0..steps {
        for i in 0..electrodes {
            let k = t * electrodes + i;
            values[i * steps + t] = window.data[k] * jac[k];
        }
    }
    Ok(AttributionMap {
        electrodes,
        steps,
        values,
        window_meta: Some(window.meta),
        normalization: Normalization::Raw,
    })
}

/// Elementwise mean of signed local relevance over the selected windows, in
/// window order.
pub fn average_relevance(
    params: &ModelParams,
    windows: &[EegWindow],
    filter: ClassFilter,
) -> Result<AttributionMap> {
    let selected: Vec<&EegWindow> = windows.iter().filter(|w| filter.accepts(w.target)).collect();
    let Some(first) = selected.first() else {
        return Err(Error::invalid(format!("no windows match class filter {filter:?}")));
    };
    let mut sum = vec![0.0; first.steps * first.channels];
    for w in &selected {
        let map = local_relevance(params, w)?;
        if map.values.len() != sum.len() {
            return Err(Error::invalid("windows differ in shape"));
        }
        sum.iter_mut().zip(&map.values).for_each(|(s, v)| *s += v);
    }
    let n = selected.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(AttributionMap {
        electrodes: first.channels,
        steps: first.steps,
        values: sum,
        window_meta: if selected.len() == 1 { Some(first.meta) } else { None },
        normalization: Normalization::Raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_params;

    fn window(seed: u32, target: bool) -> EegWindow {
        let data = (0..1024)
            .map(|k| libm::sin((k as u32 * 13 + seed * 101) as f64 * 0.1) * 5.0)
            .collect();
        EegWindow::new(data, target, WindowMeta { trial: seed, ..WindowMeta::default() }).unwrap()
    }

    #[test]
    fn global_relevance_examples() {
        let mut p = ModelParams::zeros(32, 3, 32, Head::Prm);
        assert!(global_relevance(&p, true).per_electrode.iter().all(|&r| r == 0.0));
        p.w_xh[4 * 3..5 * 3].copy_from_slice(&[1.0, -2.0, 0.5]);
        let r = global_relevance(&p, false);
        assert_eq!(r.per_electrode[4], 3.5);
        assert_eq!(r.per_electrode.iter().sum::<f64>(), 3.5);
        let q = init_params(2, 50, Head::Prm).unwrap();
        let n = global_relevance(&q, true);
        assert_eq!(n.per_electrode.iter().copied().fold(0.0, f64::max), 1.0);
        assert!(n.normalized);
    }

    #[test]
    fn prm_profile_examples() {
        let mut p = ModelParams::zeros(32, 3, 32, Head::Prm);
        assert!(prm_profile(&p).unwrap().iter().all(|&v| v == 0.0));
        p.w_p[31] = -3.0;
        let prof = prm_profile(&p).unwrap();
        assert_eq!(prof[31], 3.0);
        assert!(prof[..31].iter().all(|&v| v == 0.0));
        assert!(prm_profile(&ModelParams::zeros(32, 3, 32, Head::LastStep)).is_err());
    }

    #[test]
    fn local_relevance_zero_window() {
        let p = init_params(5, 10, Head::Prm).unwrap();
        let w = EegWindow::new(vec![0.0; 1024], true, WindowMeta::default()).unwrap();
        let map = local_relevance(&p, &w).unwrap();
        assert!(map.values.iter().all(|&v| v == 0.0));
        assert_eq!(map.normalized().values, map.values);
    }

    #[test]
    fn local_relevance_is_input_times_jacobian() {
        let p = init_params(6, 12, Head::LastStep).unwrap();
        let w = window(3, false);
        let jac = model::input_jacobian(&p, &w).unwrap();
        let map = local_relevance(&p, &w).unwrap();
        for t in 0..32 {
            for i in 0..32 {
                assert_eq!(map.get(i, t), w.at(t, i) * jac[t * 32 + i]);
            }
        }
    }

    #[test]
    fn silent_electrode_has_zero_row() {
        let mut p = init_params(7, 10, Head::Prm).unwrap();
        p.w_xh[9 * 10..10 * 10].iter_mut().for_each(|v| *v = 0.0);
        let map = local_relevance(&p, &window(1, true)).unwrap();
        assert!(map.row(9).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn averaging() {
        let p = init_params(8, 10, Head::Prm).unwrap();
        let w = window(2, true);
        let single = local_relevance(&p, &w).unwrap();
        let avg = average_relevance(&p, core::slice::from_ref(&w), ClassFilter::All).unwrap();
        assert_eq!(avg.values, single.values);
        let twice = average_relevance(&p, &[w.clone(), w.clone()], ClassFilter::Target).unwrap();
        for (a, b) in twice.values.iter().zip(&single.values) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300));
        }
        assert!(average_relevance(&p, &[w], ClassFilter::NonTarget).is_err());
    }

    #[test]
    fn normalized_map_peaks_at_one() {
        let p = init_params(9, 10, Head::Prm).unwrap();
        let map = local_relevance(&p, &window(4, true)).unwrap().normalized();
        assert!((map.max_abs() - 1.0).abs() < 1e-15);
        assert_eq!(map.normalization, Normalization::MaxAbsOne);
    }
}
