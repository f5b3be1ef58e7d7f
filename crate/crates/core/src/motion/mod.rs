//! Motion fields, flow estimation and the blurred-area-ratio statistic.

mod area_ratio;
mod field;
mod ground_truth;
mod horn_schunck;

pub use area_ratio::{
    area_ratio_curve, area_ratio_curve_with, blurred_area_ratio, default_thresholds, AreaRatioCurve, CurveMode,
    RatioAccumulator,
};
pub use field::{MotionField, FLOW_MAGIC};
pub use ground_truth::ground_truth_flow;
pub use horn_schunck::{estimate_flow, estimate_flow_luma, FlowParams};

use crate::error::{Error, Result};
use crate::image::SrgbImage;

/// Flow across a short frame sequence: first frame to last.
pub fn sequence_flow(frames: &[SrgbImage], p: &FlowParams) -> Result<MotionField> {
    match frames {
        [first, .., last] => estimate_flow(first, last, p),
        _ => Err(Error::Input("a sequence needs at least two frames".into())),
    }
}
