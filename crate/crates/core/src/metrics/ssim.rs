//! Structural similarity on luma.
//!
//! Local statistics use an 11-tap Gaussian window (σ = 1.5). The map has
//! the full image size: near the borders the window is truncated and its
//! weights renormalized. The score is the mean of the map over the image
//! or over a region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{AlphaMask, Plane, SrgbImage, BINARY_THRESHOLD};
use crate::sum::pairwise_sum;

use super::fidelity::{check_pair, check_region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

fn gaussian_kernel(window: usize, sigma: f64) -> Vec<f64> {
    let c = (window / 2) as f64;
    let raw: Vec<f64> = (0..window)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Separable windowed mean with truncated, renormalized borders.
fn windowed_mean(src: &Plane, kernel: &[f64]) -> Plane {
    let (w, h) = (src.width(), src.height());
    let r = kernel.len() / 2;
    let pass = |len: usize, at: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(len - 1);
        let (mut acc, mut norm) = (0.0, 0.0);
        for j in lo..=hi {
            let k = kernel[j + r - i];
            acc += k * at(j);
            norm += k;
        }
        acc / norm
    };
    let horiz = Plane::from_fn(w, h, |x, y| {
        let row = src.row(y);
        pass(w, &|j| row[j], x)
    });
    Plane::from_fn(w, h, |x, y| pass(h, &|j| horiz.get(x, j), y))
}

fn product(a: &Plane, b: &Plane) -> Plane {
    Plane::new(
        a.width(),
        a.height(),
        a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect(),
    )
    .expect("same shape")
}

/// Per-pixel SSIM of the luma channels.
pub fn ssim_map(a: &SrgbImage, b: &SrgbImage, p: &SsimParams) -> Result<Plane> {
    check_pair(a, b)?;
    if p.window == 0 || p.window.is_multiple_of(2) || p.sigma.is_nan() || p.sigma <= 0.0 || p.dynamic_range.is_nan() || p.dynamic_range <= 0.0 {
        return Err(Error::Config("SSIM window must be odd, sigma and range positive".into()));
    }
    if a.width() < p.window || a.height() < p.window {
        return Err(Error::Shape(format!(
            "SSIM needs at least {0}x{0} pixels, got {1}x{2}",
            p.window,
            a.width(),
            a.height()
        )));
    }
    let (x, y) = (a.to_luma(), b.to_luma());
    let k = gaussian_kernel(p.window, p.sigma);
    let mx = windowed_mean(&x, &k);
    let my = windowed_mean(&y, &k);
    let mxx = windowed_mean(&product(&x, &x), &k);
    let myy = windowed_mean(&product(&y, &y), &k);
    let mxy = windowed_mean(&product(&x, &y), &k);
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let data = (0..mx.data().len())
        .map(|i| {
            let (ux, uy) = (mx.data()[i], my.data()[i]);
            let vx = mxx.data()[i] - ux * ux;
            let vy = myy.data()[i] - uy * uy;
            let cxy = mxy.data()[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .collect();
    Plane::new(a.width(), a.height(), data)
}

/// Mean of the SSIM map, over `region` (mask `>= 0.5`) when given.
pub fn ssim(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>) -> Result<f64> {
    ssim_with(a, b, region, &SsimParams::default())
}

pub fn ssim_with(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>, p: &SsimParams) -> Result<f64> {
    check_pair(a, b)?;
    check_region(a, region)?;
    let map = ssim_map(a, b, p)?;
    map_mean(&map, region)
}

pub(crate) fn map_mean(map: &Plane, region: Option<&AlphaMask>) -> Result<f64> {
    let mut rows = Vec::with_capacity(map.height());
    let mut scratch = Vec::with_capacity(map.width());
    let mut count = 0usize;
    for y in 0..map.height() {
        scratch.clear();
        for (x, &v) in map.row(y).iter().enumerate() {
            if region.is_none_or(|r| r.get(x, y) >= BINARY_THRESHOLD) {
                scratch.push(v);
            }
        }
        count += scratch.len();
        rows.push(pairwise_sum(&scratch));
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(pairwise_sum(&rows) / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, phase: f64) -> SrgbImage {
        SrgbImage::from_fn(w, h, |x, y| {
            let v = 0.5 + 0.3 * ((x as f64) * 0.7 + phase).sin() * ((y as f64) * 0.45).cos();
            [v, 0.8 * v, 0.6 * v + 0.2]
        })
    }

    #[test]
    fn identical_is_one() {
        let a = textured(32, 20, 0.0);
        assert_eq!(ssim(&a, &a, None).unwrap(), 1.0);
        let region = AlphaMask::from_fn(32, 20, |x, _| if x > 20 { 1.0 } else { 0.0 });
        assert_eq!(ssim(&a, &a, Some(&region)).unwrap(), 1.0);
    }

    #[test]
    fn inverted_checker_is_negative() {
        let a = SrgbImage::from_fn(16, 16, |x, y| [((x + y) % 2) as f64; 3]);
        let b = SrgbImage::from_fn(16, 16, |x, y| [1.0 - ((x + y) % 2) as f64; 3]);
        assert!(ssim(&a, &b, None).unwrap() < 0.0);
    }

    #[test]
    fn flat_images_follow_luminance_term() {
        let a = SrgbImage::filled(12, 12, [0.2; 3]);
        let b = SrgbImage::filled(12, 12, [0.7; 3]);
        let (ux, uy, c1) = (0.2f64, 0.7f64, 0.0001f64);
        let expected = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        let got = ssim(&a, &b, None).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn symmetric_and_bounded() {
        let a = textured(24, 24, 0.0);
        let b = textured(24, 24, 0.9);
        let ab = ssim(&a, &b, None).unwrap();
        let ba = ssim(&b, &a, None).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert!(ab < 1.0 && ab > -1.0);
    }

    #[test]
    fn errors() {
        let small = SrgbImage::filled(10, 30, [0.5; 3]);
        assert!(matches!(ssim(&small, &small, None), Err(Error::Shape(_))));
        let a = textured(12, 12, 0.0);
        assert!(matches!(ssim(&a, &a, Some(&AlphaMask::empty(12, 12))), Err(Error::EmptyRegion)));
    }
}
