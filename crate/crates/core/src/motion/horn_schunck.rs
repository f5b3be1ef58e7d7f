//! Coarse-to-fine Horn–Schunck flow.
//!
//! Frames are converted to luma on a 0–255 scale. At every pyramid level
//! the second frame is warped by the current flow and the linearized
//! brightness-constancy plus smoothness system is relaxed with Jacobi
//! sweeps:
//!
//! ```text
//! r = (Ix (ū - u0) + Iy (v̄ - v0) + It) / (α² + Ix² + Iy²)
//! u = ū - Ix r,   v = v̄ - Iy r
//! ```
//!
//! where `ū, v̄` are the weighted neighborhood means (1/6 edge, 1/12
//! corner) and `u0, v0` the flow the warp was built from. Each sweep reads
//! only the previous sweep's arrays, so the row-parallel update gives the
//! same result for any partitioning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Plane, SrgbImage};
use crate::warp::{resize_bilinear, sample_clamped};

use super::MotionField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    /// Smoothness weight, in units of 8-bit intensity.
    pub alpha: f64,
    /// Jacobi sweeps per warp.
    pub iterations: usize,
    pub levels: usize,
    /// Size ratio between successive pyramid levels.
    pub scale: f64,
    /// Re-warps per level.
    pub warps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            alpha: 10.0,
            iterations: 100,
            levels: 4,
            scale: 0.5,
            warps: 1,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.iterations == 0 || self.warps == 0 {
            return Err(Error::Config("iterations and warps must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(Error::Config("at least one pyramid level is required".into()));
        }
        if !(self.scale > 0.0 && self.scale < 1.0) {
            return Err(Error::Config(format!("pyramid scale must be in (0, 1), got {}", self.scale)));
        }
        Ok(())
    }
}

const INTENSITY_SCALE: f64 = 255.0;

/// Flow from `frame_a` to `frame_b`: `frame_a(p) ≈ frame_b(p + flow(p))`.
pub fn estimate_flow(frame_a: &SrgbImage, frame_b: &SrgbImage, p: &FlowParams) -> Result<MotionField> {
    if !frame_b.same_shape_as(frame_a.width(), frame_a.height()) {
        return Err(Error::Shape(format!(
            "frames are {}x{} and {}x{}",
            frame_a.width(),
            frame_a.height(),
            frame_b.width(),
            frame_b.height()
        )));
    }
    estimate_flow_luma(&frame_a.to_luma(), &frame_b.to_luma(), p)
}

/// As [`estimate_flow`] on single-channel frames with values in `[0, 1]`.
pub fn estimate_flow_luma(a: &Plane, b: &Plane, p: &FlowParams) -> Result<MotionField> {
    p.validate()?;
    if !a.same_shape(b) {
        return Err(Error::Shape("frames differ in size".into()));
    }
    let min_side = 1usize << p.levels;
    if a.width() < min_side || a.height() < min_side {
        return Err(Error::Config(format!(
            "{}x{} frames are too small for {} pyramid levels (need {min_side} px per side)",
            a.width(),
            a.height(),
            p.levels
        )));
    }
    let scaled = |img: &Plane| {
        Plane::new(
            img.width(),
            img.height(),
            img.data().iter().map(|v| v * INTENSITY_SCALE).collect(),
        )
        .expect("same shape")
    };
    let pyr_a = pyramid(scaled(a), p);
    let pyr_b = pyramid(scaled(b), p);

    let coarsest = pyr_a.last().unwrap();
    let mut u = Plane::filled(coarsest.width(), coarsest.height(), 0.0);
    let mut v = u.clone();
    for level in (0..pyr_a.len()).rev() {
        let (la, lb) = (&pyr_a[level], &pyr_b[level]);
        if !u.same_shape(la) {
            let rx = la.width() as f64 / u.width() as f64;
            let ry = la.height() as f64 / u.height() as f64;
            u = scale_values(resize_bilinear(&u, la.width(), la.height()), rx);
            v = scale_values(resize_bilinear(&v, la.width(), la.height()), ry);
        }
        for _ in 0..p.warps {
            (u, v) = refine(la, lb, u, v, p);
        }
    }
    Ok(MotionField::from_parts_unchecked(
        a.width(),
        a.height(),
        u.into_data(),
        v.into_data(),
    ))
}

fn scale_values(mut p: Plane, k: f64) -> Plane {
    p.data_mut().iter_mut().for_each(|x| *x *= k);
    p
}

fn pyramid(base: Plane, p: &FlowParams) -> Vec<Plane> {
    let mut levels = vec![base];
    for _ in 1..p.levels {
        let prev = levels.last().unwrap();
        let w = ((prev.width() as f64 * p.scale).round() as usize).max(1);
        let h = ((prev.height() as f64 * p.scale).round() as usize).max(1);
        levels.push(resize_bilinear(&binomial_blur(prev), w, h));
    }
    levels
}

/// Separable [1 4 6 4 1] / 16 blur with replicated borders.
pub(crate) fn binomial_blur(src: &Plane) -> Plane {
    const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (src.width(), src.height());
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let horiz = Plane::from_fn(w, h, |x, y| {
        let row = src.row(y);
        (0..5).map(|k| K[k] * row[clampi(x as isize + k as isize - 2, w)]).sum()
    });
    Plane::from_fn(w, h, |x, y| {
        (0..5)
            .map(|k| K[k] * horiz.get(x, clampi(y as isize + k as isize - 2, h)))
            .sum()
    })
}

/// Five-point derivative `[1 -8 0 8 -1] / 12` with replicated borders.
fn derivative(src: &Plane, horizontal: bool) -> Plane {
    const K: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
    let (w, h) = (src.width() as isize, src.height() as isize);
    Plane::from_fn(src.width(), src.height(), |x, y| {
        (0..5)
            .map(|k| {
                let o = k as isize - 2;
                let (sx, sy) = if horizontal {
                    ((x as isize + o).clamp(0, w - 1), y as isize)
                } else {
                    (x as isize, (y as isize + o).clamp(0, h - 1))
                };
                K[k] * src.get(sx as usize, sy as usize)
            })
            .sum()
    })
}

/// Warps `b` by the current flow and relaxes the linearized system.
fn refine(a: &Plane, b: &Plane, u0: Plane, v0: Plane, p: &FlowParams) -> (Plane, Plane) {
    let (w, h) = (a.width(), a.height());
    let (maxx, maxy) = ((w - 1) as f64, (h - 1) as f64);
    let mut inside = vec![true; w * h];
    let warped = Plane::from_fn(w, h, |x, y| {
        let i = y * w + x;
        let (sx, sy) = (x as f64 + u0.data()[i], y as f64 + v0.data()[i]);
        inside[i] = (0.0..=maxx).contains(&sx) && (0.0..=maxy).contains(&sy);
        sample_clamped(b, sx, sy)
    });
    let mean = Plane::new(
        w,
        h,
        a.data().iter().zip(warped.data()).map(|(x, y)| 0.5 * (x + y)).collect(),
    )
    .expect("same shape");
    let ix = derivative(&mean, true);
    let iy = derivative(&mean, false);

    // Per-pixel data-term coefficients; pixels warped off the frame are
    // driven by smoothness alone.
    let alpha2 = p.alpha * p.alpha;
    let terms: Vec<[f64; 4]> = (0..w * h)
        .map(|i| {
            if !inside[i] {
                return [0.0; 4];
            }
            let (gx, gy) = (ix.data()[i], iy.data()[i]);
            let it = warped.data()[i] - a.data()[i];
            [gx, gy, it, 1.0 / (alpha2 + gx * gx + gy * gy)]
        })
        .collect();

    let mut u = u0.clone().into_data();
    let mut v = v0.clone().into_data();
    let mut nu = vec![0.0; w * h];
    let mut nv = vec![0.0; w * h];
    for _ in 0..p.iterations {
        nu.par_chunks_mut(w)
            .zip(nv.par_chunks_mut(w))
            .enumerate()
            .for_each(|(y, (row_u, row_v))| {
                let ym = y.saturating_sub(1);
                let yp = (y + 1).min(h - 1);
                for x in 0..w {
                    let xm = x.saturating_sub(1);
                    let xp = (x + 1).min(w - 1);
                    let avg = |f: &[f64]| {
                        (f[ym * w + x] + f[yp * w + x] + f[y * w + xm] + f[y * w + xp]) / 6.0
                            + (f[ym * w + xm] + f[ym * w + xp] + f[yp * w + xm] + f[yp * w + xp]) / 12.0
                    };
                    let (ub, vb) = (avg(&u), avg(&v));
                    let i = y * w + x;
                    let [gx, gy, it, inv] = terms[i];
                    let r = (gx * (ub - u0.data()[i]) + gy * (vb - v0.data()[i]) + it) * inv;
                    row_u[x] = ub - gx * r;
                    row_v[x] = vb - gy * r;
                }
            });
        std::mem::swap(&mut u, &mut nu);
        std::mem::swap(&mut v, &mut nv);
    }
    (
        Plane::new(w, h, u).expect("shape"),
        Plane::new(w, h, v).expect("shape"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        let f = Plane::filled(32, 32, 0.5);
        for p in [
            FlowParams { alpha: 0.0, ..Default::default() },
            FlowParams { iterations: 0, ..Default::default() },
            FlowParams { scale: 1.0, ..Default::default() },
            FlowParams { levels: 0, ..Default::default() },
        ] {
            assert!(matches!(estimate_flow_luma(&f, &f, &p), Err(Error::Config(_))));
        }
        let small = Plane::filled(15, 40, 0.5);
        assert!(matches!(
            estimate_flow_luma(&small, &small, &FlowParams::default()),
            Err(Error::Config(_))
        ));
        assert!(estimate_flow_luma(&Plane::filled(16, 16, 0.5), &Plane::filled(16, 16, 0.5), &FlowParams::default()).is_ok());
    }

    #[test]
    fn flat_frames_give_zero_flow() {
        let f = Plane::filled(32, 32, 0.3);
        let flow = estimate_flow_luma(&f, &f, &FlowParams::default()).unwrap();
        assert_eq!(flow.max_norm(), 0.0);
    }

    #[test]
    fn sweeps_independent_of_thread_count() {
        let a = Plane::from_fn(48, 40, |x, y| 0.5 + 0.4 * ((x as f64) * 0.4).sin() * ((y as f64) * 0.3).cos());
        let b = Plane::from_fn(48, 40, |x, y| 0.5 + 0.4 * ((x as f64 - 1.5) * 0.4).sin() * ((y as f64) * 0.3).cos());
        let p = FlowParams { iterations: 20, levels: 2, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let f1 = one.install(|| estimate_flow_luma(&a, &b, &p).unwrap());
        let f4 = four.install(|| estimate_flow_luma(&a, &b, &p).unwrap());
        assert_eq!(f1, f4);
    }
}
