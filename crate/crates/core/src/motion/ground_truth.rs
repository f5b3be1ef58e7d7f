use crate::error::{Error, Result};
use crate::image::BINARY_THRESHOLD;
use crate::synth::SceneSpec;
use crate::warp::{footprint, WarpSampler};

use super::MotionField;

/// Exact displacement from frame `a` to frame `b` of a synthetic scene.
///
/// Pixels where a moving object has coverage of at least 0.5 in frame `a`
/// move with that object; later-painted objects win. All other pixels,
/// including static distractors, get zero motion.
pub fn ground_truth_flow(scene: &SceneSpec, frame_a: usize, frame_b: usize) -> Result<MotionField> {
    let len = scene.frame_count();
    if !(frame_a < frame_b && frame_b < len) {
        return Err(Error::Range(format!(
            "need 0 <= a < b < {len}, got a = {frame_a}, b = {frame_b}"
        )));
    }
    let (w, h) = (scene.width(), scene.height());
    let mut u = vec![0.0; w * h];
    let mut v = vec![0.0; w * h];
    for (object, (patch, _)) in scene.moving_objects.iter().enumerate() {
        let transforms = scene.object_transforms(object);
        let (ta, tb) = (&transforms[frame_a], &transforms[frame_b]);
        let a_to_b = ta.inverse()?.then(tb);
        let sampler = WarpSampler::new(patch.image(), patch.mask(), ta)?;
        let rect = footprint(ta, patch.width(), patch.height(), w, h);
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                let (coverage, _) = sampler.sample(x, y);
                if coverage >= BINARY_THRESHOLD {
                    let p = [x as f64, y as f64];
                    let q = a_to_b.apply(p);
                    let i = y * w + x;
                    u[i] = q[0] - p[0];
                    v[i] = q[1] - p[1];
                }
            }
        }
    }
    MotionField::new(w, h, u, v)
}
