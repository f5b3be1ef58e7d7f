use crate::error::{Error, Result};
use crate::image::{AlphaMask, SrgbImage, CHANNELS};
use crate::warp::{footprint, WarpSampler};

#[inline]
pub(crate) fn blend(background: f64, layer: f64, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        layer
    } else if alpha <= 0.0 {
        background
    } else {
        background + alpha * (layer - background)
    }
}

/// `out = mask * layer + (1 - mask) * background`, per pixel and channel.
/// The returned mask is the layer's coverage.
pub fn composite_over(
    background: &SrgbImage,
    layer: &SrgbImage,
    layer_mask: &AlphaMask,
) -> Result<(SrgbImage, AlphaMask)> {
    let (w, h) = (background.width(), background.height());
    if !layer.same_shape_as(w, h) || !layer_mask.same_shape_as(w, h) {
        return Err(Error::Shape(format!(
            "background {w}x{h}, layer {}x{}, mask {}x{}",
            layer.width(),
            layer.height(),
            layer_mask.width(),
            layer_mask.height()
        )));
    }
    let mut out = background.data().to_vec();
    for (i, px) in out.chunks_exact_mut(CHANNELS).enumerate() {
        let a = layer_mask.data()[i];
        let l = &layer.data()[i * CHANNELS..(i + 1) * CHANNELS];
        for c in 0..CHANNELS {
            px[c] = blend(px[c], l[c], a);
        }
    }
    Ok((SrgbImage::from_raw_unchecked(w, h, out), layer_mask.clone()))
}

/// Warps a masked patch and composites it onto `canvas` in place, touching
/// only the warped footprint. Equivalent to `affine_warp` followed by
/// `composite_over`. When `coverage` is given, the layer's alpha is
/// accumulated into it with the over operator.
pub(crate) fn paint_patch(
    canvas: &mut SrgbImage,
    mut coverage: Option<&mut [f64]>,
    sampler: &WarpSampler<'_>,
    patch_w: usize,
    patch_h: usize,
    t: &crate::transform::AffineTransform,
) -> bool {
    let (w, h) = (canvas.width(), canvas.height());
    let rect = footprint(t, patch_w, patch_h, w, h);
    if rect.is_empty() {
        return false;
    }
    let mut any = false;
    let data = canvas.data_mut();
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let (a, color) = sampler.sample(x, y);
            if a <= 0.0 {
                continue;
            }
            any = true;
            let i = y * w + x;
            let px = &mut data[i * CHANNELS..(i + 1) * CHANNELS];
            for c in 0..CHANNELS {
                px[c] = blend(px[c], color[c], a);
            }
            if let Some(cov) = coverage.as_deref_mut() {
                cov[i] = blend(cov[i], 1.0, a);
            }
        }
    }
    any
}
