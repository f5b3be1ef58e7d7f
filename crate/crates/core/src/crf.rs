//! Power-law camera response function `g(x) = x^(1/gamma)`.

use crate::error::{Error, Result};
use crate::image::{check_unit_interval, LinearImage, SrgbImage};

pub const DEFAULT_GAMMA: f64 = 2.2;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("gamma must be positive and finite, got {gamma}")))
    }
}

/// Linear signal to display value.
#[inline]
pub fn encode(x: f64, gamma: f64) -> f64 {
    x.powf(gamma.recip())
}

/// Display value to linear signal.
#[inline]
pub fn decode(x: f64, gamma: f64) -> f64 {
    x.powf(gamma)
}

/// Applies `g` to raw samples, rejecting anything outside `[0, 1]`.
pub fn encode_samples(samples: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_unit_interval(samples)?;
    Ok(map_samples(samples, gamma.recip()))
}

/// Applies `g^-1` to raw samples, rejecting anything outside `[0, 1]`.
pub fn decode_samples(samples: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_unit_interval(samples)?;
    Ok(map_samples(samples, gamma))
}

fn map_samples(samples: &[f64], exponent: f64) -> Vec<f64> {
    if exponent == 1.0 {
        return samples.to_vec();
    }
    samples.iter().map(|&x| x.powf(exponent).min(1.0)).collect()
}

pub fn crf_forward(img: &LinearImage, gamma: f64) -> Result<SrgbImage> {
    let data = encode_samples(img.data(), gamma)?;
    Ok(SrgbImage::from_raw_unchecked(img.width(), img.height(), data))
}

pub fn crf_inverse(img: &SrgbImage, gamma: f64) -> Result<LinearImage> {
    let data = decode_samples(img.data(), gamma)?;
    Ok(LinearImage::from_raw_unchecked(img.width(), img.height(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_points() {
        for gamma in [0.5, 1.0, 2.2, 4.0] {
            assert_eq!(encode(0.0, gamma), 0.0);
            assert_eq!(encode(1.0, gamma), 1.0);
            assert_eq!(decode(0.0, gamma), 0.0);
            assert_eq!(decode(1.0, gamma), 1.0);
        }
    }

    #[test]
    fn half_at_default_gamma() {
        // mpmath, 40 digits: 0.5^(1/2.2) = 0.72974005284072311648...
        assert!((encode(0.5, 2.2) - 0.729_740_052_840_723_1).abs() < 1e-15);
        assert!((decode(0.729740, 2.2) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn unit_gamma_is_identity() {
        let img = LinearImage::from_fn(4, 3, |x, y| [x as f64 / 4.0, y as f64 / 3.0, 0.3]);
        let out = crf_forward(&img, 1.0).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn rejects_bad_gamma_and_samples() {
        assert!(matches!(encode_samples(&[0.5], 0.0), Err(Error::Config(_))));
        assert!(matches!(encode_samples(&[0.5], f64::NAN), Err(Error::Config(_))));
        assert!(matches!(
            decode_samples(&[0.5, -0.1], 2.2),
            Err(Error::Domain { index: 1, .. })
        ));
        assert!(matches!(
            encode_samples(&[f64::INFINITY], 2.2),
            Err(Error::Domain { index: 0, .. })
        ));
    }

    #[test]
    fn round_trip_1024_samples() {
        let grid: Vec<f64> = (0..1024).map(|i| i as f64 / 1023.0).collect();
        let back = decode_samples(&encode_samples(&grid, 2.2).unwrap(), 2.2).unwrap();
        let max = grid.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(max < 1e-6, "max error {max}");
    }

    proptest! {
        #[test]
        fn round_trip_any_gamma(gamma in 1.0f64..=4.0, x in 0.0f64..=1.0) {
            let y = decode(encode(x, gamma), gamma);
            prop_assert!((y - x).abs() < 1e-6);
        }

        #[test]
        fn forward_is_monotone(gamma in 0.05f64..10.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(encode(lo, gamma) <= encode(hi, gamma));
        }
    }
}
