use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{AlphaMask, SrgbImage, BINARY_THRESHOLD, CHANNELS};
use crate::sum::pairwise_sum;

/// How pixel values are scaled before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakMode {
    /// Samples in `[0, 1]`, peak 1.
    #[default]
    Unit,
    /// Samples quantized to integers `round(255 v)`, peak 255.
    #[serde(rename = "8bit")]
    EightBit,
}

pub(crate) fn check_pair(a: &SrgbImage, b: &SrgbImage) -> Result<()> {
    if !a.same_shape_as(b.width(), b.height()) {
        return Err(Error::Shape(format!(
            "images are {}x{} and {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

pub(crate) fn check_region(a: &SrgbImage, region: Option<&AlphaMask>) -> Result<()> {
    if let Some(r) = region {
        if !r.same_shape_as(a.width(), a.height()) {
            return Err(Error::Shape(format!(
                "region {}x{} vs image {}x{}",
                r.width(),
                r.height(),
                a.width(),
                a.height()
            )));
        }
        if r.count_set() == 0 {
            return Err(Error::EmptyRegion);
        }
    }
    Ok(())
}

fn squared_error_mean(
    a: &SrgbImage,
    b: &SrgbImage,
    region: Option<&AlphaMask>,
    transform: impl Fn(f64) -> f64,
) -> Result<f64> {
    check_pair(a, b)?;
    check_region(a, region)?;
    let w = a.width();
    let row_len = w * CHANNELS;
    let mut row_sums = Vec::with_capacity(a.height());
    let mut scratch = Vec::with_capacity(row_len);
    let mut count = 0usize;
    for (y, (ra, rb)) in a.data().chunks(row_len).zip(b.data().chunks(row_len)).enumerate() {
        scratch.clear();
        for x in 0..w {
            if let Some(r) = region {
                if r.get(x, y) < BINARY_THRESHOLD {
                    continue;
                }
            }
            for c in 0..CHANNELS {
                let d = transform(ra[x * CHANNELS + c]) - transform(rb[x * CHANNELS + c]);
                scratch.push(d * d);
            }
        }
        count += scratch.len();
        row_sums.push(pairwise_sum(&scratch));
    }
    Ok(pairwise_sum(&row_sums) / count as f64)
}

/// Mean squared error over all channels of the selected pixels. A region
/// selects pixels with mask value `>= 0.5`.
pub fn mse(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>) -> Result<f64> {
    squared_error_mean(a, b, region, |v| v)
}

/// `10 log10(peak² / mse)`; `f64::INFINITY` when the images agree exactly.
pub fn psnr(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>, peak: f64) -> Result<f64> {
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::Config(format!("peak must be positive, got {peak}")));
    }
    Ok(psnr_from_mse(mse(a, b, region)?, peak))
}

/// PSNR on 8-bit quantized samples with peak 255.
pub fn psnr_8bit(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>) -> Result<f64> {
    let m = squared_error_mean(a, b, region, |v| (v * 255.0).round())?;
    Ok(psnr_from_mse(m, 255.0))
}

pub fn psnr_with(a: &SrgbImage, b: &SrgbImage, region: Option<&AlphaMask>, mode: PeakMode) -> Result<f64> {
    match mode {
        PeakMode::Unit => psnr(a, b, region, 1.0),
        PeakMode::EightBit => psnr_8bit(a, b, region),
    }
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, v: f64) -> SrgbImage {
        SrgbImage::filled(w, h, [v; 3])
    }

    #[test]
    fn mse_examples() {
        let a = gray(6, 4, 0.3);
        assert_eq!(mse(&a, &a, None).unwrap(), 0.0);
        let b = gray(6, 4, 0.55);
        assert!((mse(&a, &b, None).unwrap() - 0.0625).abs() < 1e-15);
        let left = AlphaMask::from_fn(6, 4, |x, _| if x < 3 { 1.0 } else { 0.0 });
        let c = SrgbImage::from_fn(6, 4, |x, _| [if x < 3 { 0.55 } else { 0.3 }; 3]);
        assert!((mse(&a, &c, Some(&left)).unwrap() - 0.0625).abs() < 1e-15);
        assert!((mse(&a, &c, None).unwrap() - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn empty_region_and_shape_errors() {
        let a = gray(4, 4, 0.1);
        assert!(matches!(mse(&a, &a, Some(&AlphaMask::empty(4, 4))), Err(Error::EmptyRegion)));
        assert!(matches!(mse(&a, &gray(4, 3, 0.1), None), Err(Error::Shape(_))));
        assert!(matches!(mse(&a, &a, Some(&AlphaMask::empty(3, 4))), Err(Error::Shape(_))));
    }

    #[test]
    fn psnr_examples() {
        let a = gray(8, 8, 0.25);
        assert_eq!(psnr(&a, &a, None, 1.0).unwrap(), f64::INFINITY);
        let b = gray(8, 8, 0.25 + 16.0 / 255.0);
        // 10 log10(255² / 16²) = 24.048403955560607...
        let p = psnr(&a, &b, None, 1.0).unwrap();
        assert!((p - 24.048_403_955_560_61).abs() < 1e-9);
        assert!((p - 24.0483).abs() < 1e-3);
        let half = gray(8, 8, 0.25 + 8.0 / 255.0);
        let gain = psnr(&a, &half, None, 1.0).unwrap() - p;
        assert!((gain - 6.020_599_913_279_624).abs() < 1e-9);
    }

    #[test]
    fn eight_bit_mode() {
        let a = gray(4, 4, 100.0 / 255.0);
        let b = gray(4, 4, 116.0 / 255.0);
        assert!((psnr_8bit(&a, &b, None).unwrap() - 24.048_403_955_560_61).abs() < 1e-9);
        let c = gray(4, 4, 100.2 / 255.0);
        assert_eq!(psnr_8bit(&a, &c, None).unwrap(), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn psnr_symmetric_and_scaling(vals in proptest::collection::vec(0.1f64..0.5, 12), k in 1.01f64..1.9) {
            let a = SrgbImage::new(2, 2, vals.clone()).unwrap();
            let b = SrgbImage::new(2, 2, vals.iter().map(|v| v + 0.05 * (v * 10.0).sin()).collect()).unwrap();
            let c = SrgbImage::new(2, 2, vals.iter().map(|v| v + 0.05 * k * (v * 10.0).sin()).collect()).unwrap();
            let ab = psnr(&a, &b, None, 1.0).unwrap();
            prop_assert_eq!(ab, psnr(&b, &a, None, 1.0).unwrap());
            let ac = psnr(&a, &c, None, 1.0).unwrap();
            prop_assert!((ab - ac - 20.0 * k.log10()).abs() < 1e-6);
        }
    }
}
