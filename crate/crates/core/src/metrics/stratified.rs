use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{AlphaMask, Plane, SrgbImage};
use crate::motion::MotionField;

use super::fidelity::{check_pair, psnr_with, PeakMode};
use super::ssim::{map_mean, ssim_map, SsimParams};

/// Flow-norm boundary between the low- and high-motion strata.
pub const DEFAULT_STRATIFY_THRESHOLD: f64 = 0.25;

/// Serializes non-finite PSNR values as the strings `"inf"` / `"-inf"` /
/// `"nan"`, since JSON has no infinity.
pub mod db_value {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad dB value {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumMetrics {
    #[serde(with = "db_value")]
    pub psnr: f64,
    pub ssim: f64,
    pub pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(with = "db_value")]
    pub psnr: f64,
    pub ssim: f64,
    /// Present when a flow field was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stratified: Option<Strata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strata {
    pub threshold: f64,
    /// Pixels with flow norm `<= threshold`; absent when empty.
    pub low_motion: Option<StratumMetrics>,
    /// Pixels with flow norm `> threshold`; absent when empty.
    pub high_motion: Option<StratumMetrics>,
    pub low_pixels: usize,
    pub high_pixels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub peak: PeakMode,
    pub ssim: SsimParams,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            peak: PeakMode::Unit,
            ssim: SsimParams::default(),
        }
    }
}

fn quantized(img: &SrgbImage) -> SrgbImage {
    SrgbImage::from_raw_unchecked(
        img.width(),
        img.height(),
        img.data().iter().map(|v| (v * 255.0).round() / 255.0).collect(),
    )
}

/// Whole-image PSNR and SSIM.
pub fn evaluate(pred: &SrgbImage, gt: &SrgbImage, opts: &EvalOptions) -> Result<EvalReport> {
    evaluate_inner(pred, gt, None, opts)
}

/// Whole-image metrics plus metrics over the low-motion (`norm <= threshold`)
/// and high-motion (`norm > threshold`) pixels of `flow`.
pub fn stratified_eval(pred: &SrgbImage, gt: &SrgbImage, flow: &MotionField, threshold: f64) -> Result<EvalReport> {
    stratified_eval_with(pred, gt, flow, threshold, &EvalOptions::default())
}

pub fn stratified_eval_with(
    pred: &SrgbImage,
    gt: &SrgbImage,
    flow: &MotionField,
    threshold: f64,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Config(format!("stratify threshold must be >= 0, got {threshold}")));
    }
    evaluate_inner(pred, gt, Some((flow, threshold)), opts)
}

fn evaluate_inner(
    pred: &SrgbImage,
    gt: &SrgbImage,
    flow: Option<(&MotionField, f64)>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    check_pair(pred, gt)?;
    let (w, h) = (gt.width(), gt.height());
    let map = match opts.peak {
        PeakMode::Unit => ssim_map(pred, gt, &opts.ssim)?,
        PeakMode::EightBit => ssim_map(&quantized(pred), &quantized(gt), &opts.ssim)?,
    };
    let psnr = psnr_with(pred, gt, None, opts.peak)?;
    let ssim = map_mean(&map, None)?;
    let stratified = match flow {
        None => None,
        Some((flow, threshold)) => {
            if flow.width() != w || flow.height() != h {
                return Err(Error::Shape(format!(
                    "flow {}x{} vs image {w}x{h}",
                    flow.width(),
                    flow.height()
                )));
            }
            let norms = flow.norms();
            let high = AlphaMask::from_plane_unchecked(
                Plane::new(w, h, norms.iter().map(|&n| if n > threshold { 1.0 } else { 0.0 }).collect())?,
            );
            let low = AlphaMask::from_plane_unchecked(
                Plane::new(w, h, high.data().iter().map(|v| 1.0 - v).collect())?,
            );
            let stratum = |region: &AlphaMask| -> Result<Option<StratumMetrics>> {
                let pixels = region.count_set();
                if pixels == 0 {
                    return Ok(None);
                }
                Ok(Some(StratumMetrics {
                    psnr: psnr_with(pred, gt, Some(region), opts.peak)?,
                    ssim: map_mean(&map, Some(region))?,
                    pixels,
                }))
            };
            let low_pixels = low.count_set();
            let high_pixels = high.count_set();
            Some(Strata {
                threshold,
                low_motion: stratum(&low)?,
                high_motion: stratum(&high)?,
                low_pixels,
                high_pixels,
            })
        }
    };
    Ok(EvalReport { psnr, ssim, stratified })
}
