//! Inverse-mapped bilinear warping of masked patches.
//!
//! For every canvas pixel the inverse transform gives a source position;
//! the four surrounding source pixels contribute with bilinear weights.
//! Coverage is the weighted mask, color is the mask-weighted mean of the
//! contributing pixels, so unmasked patch content never bleeds into the
//! result. Source pixels outside the patch have zero coverage.

use crate::error::{Error, Result};
use crate::image::{AlphaMask, Plane, SrgbImage, CHANNELS};
use crate::transform::AffineTransform;

/// Canvas-space rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }
}

/// Canvas pixels that can receive nonzero coverage from a `w`x`h` source.
pub(crate) fn footprint(t: &AffineTransform, w: usize, h: usize, canvas_w: usize, canvas_h: usize) -> Rect {
    let corners = [
        [-1.0, -1.0],
        [w as f64, -1.0],
        [-1.0, h as f64],
        [w as f64, h as f64],
    ]
    .map(|p| t.apply(p));
    let (mut lx, mut ly, mut hx, mut hy) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for [x, y] in corners {
        lx = lx.min(x);
        ly = ly.min(y);
        hx = hx.max(x);
        hy = hy.max(y);
    }
    let clip = |v: f64, max: usize| -> usize { v.max(0.0).min(max as f64) as usize };
    Rect {
        x0: clip(lx.floor(), canvas_w),
        y0: clip(ly.floor(), canvas_h),
        x1: clip(hx.ceil() + 1.0, canvas_w),
        y1: clip(hy.ceil() + 1.0, canvas_h),
    }
}

/// A patch prepared for repeated sampling under one transform.
pub(crate) struct WarpSampler<'a> {
    patch: &'a SrgbImage,
    mask: &'a AlphaMask,
    inverse: AffineTransform,
}

impl<'a> WarpSampler<'a> {
    pub fn new(patch: &'a SrgbImage, mask: &'a AlphaMask, t: &AffineTransform) -> Result<Self> {
        if !mask.same_shape_as(patch.width(), patch.height()) {
            return Err(Error::Shape(format!(
                "patch is {}x{}, mask is {}x{}",
                patch.width(),
                patch.height(),
                mask.width(),
                mask.height()
            )));
        }
        Ok(WarpSampler {
            patch,
            mask,
            inverse: t.inverse()?,
        })
    }

    /// Coverage and color at canvas pixel `(x, y)`.
    #[inline]
    pub fn sample(&self, x: usize, y: usize) -> (f64, [f64; 3]) {
        let [sx, sy] = self.inverse.apply([x as f64, y as f64]);
        let (w, h) = (self.patch.width() as isize, self.patch.height() as isize);
        let (fx0, fy0) = (sx.floor(), sy.floor());
        if !(fx0 >= -1.0 && fy0 >= -1.0 && fx0 < w as f64 && fy0 < h as f64) {
            return (0.0, [0.0; 3]);
        }
        let (x0, y0) = (fx0 as isize, fy0 as isize);
        let (fx, fy) = (sx - fx0, sy - fy0);
        if fx == 0.0 && fy == 0.0 {
            if x0 < 0 || y0 < 0 {
                return (0.0, [0.0; 3]);
            }
            let (x0, y0) = (x0 as usize, y0 as usize);
            let m = self.mask.get(x0, y0);
            return if m > 0.0 {
                (m, self.patch.pixel(x0, y0))
            } else {
                (0.0, [0.0; 3])
            };
        }
        let taps = [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x0 + 1, y0, fx * (1.0 - fy)),
            (x0, y0 + 1, (1.0 - fx) * fy),
            (x0 + 1, y0 + 1, fx * fy),
        ];
        let mut coverage = 0.0;
        let mut color = [0.0; 3];
        for (tx, ty, wgt) in taps {
            if wgt == 0.0 || tx < 0 || ty < 0 || tx >= w || ty >= h {
                continue;
            }
            let (tx, ty) = (tx as usize, ty as usize);
            let m = wgt * self.mask.get(tx, ty);
            if m == 0.0 {
                continue;
            }
            let p = self.patch.pixel(tx, ty);
            coverage += m;
            for c in 0..CHANNELS {
                color[c] += m * p[c];
            }
        }
        if coverage <= 0.0 {
            return (0.0, [0.0; 3]);
        }
        let color = color.map(|v| (v / coverage).clamp(0.0, 1.0));
        (coverage.min(1.0), color)
    }
}

/// Warps `patch`/`mask` by `t` onto an empty `canvas_w` x `canvas_h` canvas.
/// Content mapped outside the canvas is clipped.
pub fn affine_warp(
    patch: &SrgbImage,
    mask: &AlphaMask,
    t: &AffineTransform,
    canvas_w: usize,
    canvas_h: usize,
) -> Result<(SrgbImage, AlphaMask)> {
    if canvas_w == 0 || canvas_h == 0 {
        return Err(Error::Shape(format!("empty canvas {canvas_w}x{canvas_h}")));
    }
    let sampler = WarpSampler::new(patch, mask, t)?;
    let mut color = vec![0.0; canvas_w * canvas_h * CHANNELS];
    let mut alpha = vec![0.0; canvas_w * canvas_h];
    let rect = footprint(t, patch.width(), patch.height(), canvas_w, canvas_h);
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let (m, c) = sampler.sample(x, y);
            if m > 0.0 {
                let i = y * canvas_w + x;
                alpha[i] = m;
                color[i * CHANNELS..(i + 1) * CHANNELS].copy_from_slice(&c);
            }
        }
    }
    Ok((
        SrgbImage::from_raw_unchecked(canvas_w, canvas_h, color),
        AlphaMask::from_plane_unchecked(Plane::new(canvas_w, canvas_h, alpha)?),
    ))
}

/// Bilinear resize with half-pixel centers and edge clamping. Same-size
/// input is returned unchanged.
pub fn resize_bilinear(src: &Plane, width: usize, height: usize) -> Plane {
    if src.width() == width && src.height() == height {
        return src.clone();
    }
    let sx = src.width() as f64 / width as f64;
    let sy = src.height() as f64 / height as f64;
    let maxx = (src.width() - 1) as f64;
    let maxy = (src.height() - 1) as f64;
    Plane::from_fn(width, height, |x, y| {
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, maxx);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, maxy);
        sample_clamped(src, fx, fy)
    })
}

/// Bilinear sample with edge clamping.
#[inline]
pub(crate) fn sample_clamped(src: &Plane, x: f64, y: f64) -> f64 {
    let maxx = (src.width() - 1) as f64;
    let maxy = (src.height() - 1) as f64;
    let x = if x.is_finite() { x.clamp(0.0, maxx) } else { 0.0 };
    let y = if y.is_finite() { y.clamp(0.0, maxy) } else { 0.0 };
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(src.width() - 1);
    let y1 = (y0 + 1).min(src.height() - 1);
    let w = src.width();
    let d = src.data();
    let top = d[y0 * w + x0] * (1.0 - fx) + d[y0 * w + x1] * fx;
    let bottom = d[y1 * w + x0] * (1.0 - fx) + d[y1 * w + x1] * fx;
    top * (1.0 - fy) + bottom * fy
}
