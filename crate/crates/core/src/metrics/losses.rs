//! Supervision losses evaluated as plain scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{check_unit_interval, AlphaMask, Plane, ProbabilityMap};
use crate::sum::row_pairwise_sum;
use crate::warp::resize_bilinear;

pub const BCE_EPSILON: f64 = 1e-7;

fn check_same(pw: usize, ph: usize, gt: &AlphaMask) -> Result<()> {
    if !gt.same_shape_as(pw, ph) {
        return Err(Error::Shape(format!(
            "prediction {pw}x{ph} vs target {}x{}",
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

/// Soft DICE: `1 - 2 Σ(p g) / (Σp + Σg)`, and 0 when both sums vanish.
pub fn dice_loss(pred: &ProbabilityMap, gt: &AlphaMask) -> Result<f64> {
    check_same(pred.width(), pred.height(), gt)?;
    Ok(dice_of(pred.data(), gt.data(), gt.width()))
}

fn dice_of(pred: &[f64], gt: &[f64], row: usize) -> f64 {
    let overlap: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| p * g).collect();
    let inter = row_pairwise_sum(&overlap, row);
    let total = row_pairwise_sum(pred, row) + row_pairwise_sum(gt, row);
    if total == 0.0 {
        0.0
    } else {
        1.0 - 2.0 * inter / total
    }
}

/// Mean pixel-wise binary cross entropy with predictions clamped to
/// `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(pred: &ProbabilityMap, gt: &AlphaMask) -> Result<f64> {
    check_same(pred.width(), pred.height(), gt)?;
    let terms: Vec<f64> = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            -(g * p.ln() + (1.0 - g) * (1.0 - p).ln())
        })
        .collect();
    Ok(row_pairwise_sum(&terms, gt.width()) / terms.len() as f64)
}

/// Attention maps at their native resolutions, plus the resolution they are
/// compared at.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMapStack {
    maps: Vec<Plane>,
    target_width: usize,
    target_height: usize,
}

impl AttentionMapStack {
    pub fn new(maps: Vec<Plane>, target_width: usize, target_height: usize) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Input("attention stack is empty".into()));
        }
        if target_width == 0 || target_height == 0 {
            return Err(Error::Shape("empty target resolution".into()));
        }
        for m in &maps {
            check_unit_interval(m.data())?;
        }
        Ok(AttentionMapStack {
            maps,
            target_width,
            target_height,
        })
    }

    pub fn maps(&self) -> &[Plane] {
        &self.maps
    }

    /// Sum of the maps after bilinear upsampling, clamped to `[0, 1]`.
    pub fn fused(&self) -> ProbabilityMap {
        let (w, h) = (self.target_width, self.target_height);
        let mut sum = vec![0.0; w * h];
        for m in &self.maps {
            let up = resize_bilinear(m, w, h);
            for (s, v) in sum.iter_mut().zip(up.data()) {
                *s += v;
            }
        }
        ProbabilityMap::from_plane_unchecked(
            Plane::new(w, h, sum.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()).expect("shape"),
        )
    }
}

/// DICE between the fused attention stack and the target mask.
pub fn bsa_loss(stack: &AttentionMapStack, gt: &AlphaMask) -> Result<f64> {
    check_same(stack.target_width, stack.target_height, gt)?;
    dice_loss(&stack.fused(), gt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub mse: f64,
    pub perception: f64,
    pub attention: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            mse: 1.0,
            perception: 0.25,
            attention: 0.01,
        }
    }
}

impl LossWeights {
    pub fn new(mse: f64, perception: f64, attention: f64) -> Result<Self> {
        if [mse, perception, attention].iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("loss weights must be finite and non-negative".into()));
        }
        Ok(LossWeights {
            mse,
            perception,
            attention,
        })
    }
}

/// `λ1 L_mse + λ2 L_perception + λ3 L_attention`.
pub fn combined_loss(l_mse: f64, l_perception: f64, l_attention: f64, w: &LossWeights) -> f64 {
    w.mse * l_mse + w.perception * l_perception + w.attention * l_attention
}
