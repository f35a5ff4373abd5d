//! Model files: `p300-prm-model/1` JSON with full-precision numbers.

use std::io;
use std::path::Path;

use anyhow::{bail, Context, Result};
use p300_core::{Head, ModelParams};
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

pub const MODEL_SCHEMA: &str = "p300-prm-model/1";

/// Compact JSON whose floats always carry 17 significant digits.
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        CompactFormatter.write_f32(w, v)
    }
}

pub fn to_json_full_precision<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    #[serde(rename = "H")]
    hidden: usize,
    #[serde(rename = "T")]
    steps: usize,
    head: Head,
    #[serde(rename = "W_xh")]
    w_xh: Vec<Vec<f64>>,
    #[serde(rename = "W_hh")]
    w_hh: Vec<Vec<f64>>,
    b_h: Vec<f64>,
    w_hy: Vec<f64>,
    b_y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b_p: Option<f64>,
    #[serde(default)]
    train_meta: serde_json::Map<String, serde_json::Value>,
}

/// A model and the free-form training metadata stored with it.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub params: ModelParams,
    pub train_meta: serde_json::Map<String, serde_json::Value>,
}

pub fn model_json(params: &ModelParams, train_meta: serde_json::Map<String, serde_json::Value>) -> Result<String> {
    params.validate()?;
    let prm = params.head == Head::Prm;
    let file = ModelFile {
        schema: MODEL_SCHEMA.into(),
        hidden: params.hidden,
        steps: params.steps,
        head: params.head,
        w_xh: params.w_xh.chunks(params.hidden).map(<[f64]>::to_vec).collect(),
        w_hh: params.w_hh.chunks(params.hidden).map(<[f64]>::to_vec).collect(),
        b_h: params.b_h.clone(),
        w_hy: params.w_hy.clone(),
        b_y: params.b_y,
        w_p: prm.then(|| params.w_p.clone()),
        b_p: prm.then_some(params.b_p),
        train_meta,
    };
    to_json_full_precision(&file)
}

pub fn parse_model(text: &str) -> Result<SavedModel> {
    let f: ModelFile = serde_json::from_str(text)?;
    if f.schema != MODEL_SCHEMA {
        bail!("unsupported schema {:?}, expected {MODEL_SCHEMA:?}", f.schema);
    }
    let h = f.hidden;
    let inputs = f.w_xh.len();
    if h == 0 || f.w_xh.iter().any(|r| r.len() != h) {
        bail!("W_xh must have rows of length H={h}");
    }
    if f.w_hh.len() != h || f.w_hh.iter().any(|r| r.len() != h) {
        bail!("W_hh must be {h}x{h}");
    }
    let (w_p, b_p) = match (f.head, f.w_p, f.b_p) {
        (Head::Prm, Some(w), Some(b)) => (w, b),
        (Head::Prm, _, _) => bail!("prm model lacks w_p or b_p"),
        (Head::LastStep, None, None) => (Vec::new(), 0.0),
        (Head::LastStep, _, _) => bail!("last-step model must not carry w_p or b_p"),
    };
    let params = ModelParams {
        inputs,
        hidden: h,
        steps: f.steps,
        head: f.head,
        w_xh: f.w_xh.concat(),
        w_hh: f.w_hh.concat(),
        b_h: f.b_h,
        w_hy: f.w_hy,
        b_y: f.b_y,
        w_p,
        b_p,
    };
    params.validate()?;
    Ok(SavedModel { params, train_meta: f.train_meta })
}

pub fn read_model(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_model(&text).with_context(|| format!("{} is not a valid model file", path.display()))
}
