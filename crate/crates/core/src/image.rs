//! Floating-point image buffers.
//!
//! Samples are `f64`. Color images are interleaved RGB, row-major. The two
//! color types differ only in which side of the camera response function
//! their values live on: [`SrgbImage`] holds display-encoded values and
//! [`LinearImage`] holds sensor-linear values. Both keep every sample in
//! `[0, 1]`.

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

/// Luma weights (BT.601).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub(crate) fn check_unit_interval(data: &[f64]) -> Result<()> {
    match data
        .iter()
        .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
    {
        Some(index) => Err(Error::Domain {
            index,
            value: data[index],
            domain: "[0, 1]",
        }),
        None => Ok(()),
    }
}

fn check_len(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Shape(format!("empty image {width}x{height}")));
    }
    if width * height * channels != len {
        return Err(Error::Shape(format!(
            "{width}x{height}x{channels} needs {} samples, got {len}",
            width * height * channels
        )));
    }
    Ok(())
}

/// Single-channel real raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        Ok(Plane { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty plane");
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty plane");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn same_shape(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }
}

macro_rules! unit_plane {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Plane);

        impl $name {
            pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
                check_unit_interval(&data)?;
                Ok($name(Plane::new(width, height, data)?))
            }

            pub fn from_plane(plane: Plane) -> Result<Self> {
                check_unit_interval(plane.data())?;
                Ok($name(plane))
            }

            pub fn filled(width: usize, height: usize, value: f64) -> Self {
                assert!((0.0..=1.0).contains(&value), "value {value} outside [0, 1]");
                $name(Plane::filled(width, height, value))
            }

            /// Builds from a closure; values are clamped into `[0, 1]`.
            pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
                $name(Plane::from_fn(width, height, |x, y| clamp_unit(f(x, y))))
            }

            pub(crate) fn from_plane_unchecked(plane: Plane) -> Self {
                debug_assert!(check_unit_interval(plane.data()).is_ok());
                $name(plane)
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.0.width
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.0.height
            }

            #[inline]
            pub fn data(&self) -> &[f64] {
                &self.0.data
            }

            #[inline]
            pub fn get(&self, x: usize, y: usize) -> f64 {
                self.0.get(x, y)
            }

            pub fn plane(&self) -> &Plane {
                &self.0
            }

            pub fn into_plane(self) -> Plane {
                self.0
            }

            pub fn same_shape_as(&self, width: usize, height: usize) -> bool {
                self.0.width == width && self.0.height == height
            }
        }
    };
}

unit_plane!(
    /// Per-pixel coverage in `[0, 1]`. Binary masks hold only 0 and 1.
    AlphaMask
);

unit_plane!(
    /// Per-pixel blur probability in `[0, 1]`.
    ProbabilityMap
);

/// Threshold at which fractional coverage counts as "inside".
pub const BINARY_THRESHOLD: f64 = 0.5;

impl AlphaMask {
    pub fn empty(width: usize, height: usize) -> Self {
        AlphaMask::filled(width, height, 0.0)
    }

    /// Maps coverage to {0, 1}: 1 where `value >= 0.5`.
    pub fn binarize(&self) -> AlphaMask {
        self.binarize_at(BINARY_THRESHOLD)
    }

    /// Maps coverage to {0, 1}: 1 where `value >= threshold`.
    pub fn binarize_at(&self, threshold: f64) -> AlphaMask {
        let data = self
            .data()
            .iter()
            .map(|&v| if v >= threshold { 1.0 } else { 0.0 })
            .collect();
        AlphaMask(Plane {
            width: self.width(),
            height: self.height(),
            data,
        })
    }

    /// Maps coverage to {0, 1}: 1 wherever coverage is strictly positive.
    pub fn support(&self) -> AlphaMask {
        let data = self
            .data()
            .iter()
            .map(|&v| if v > 0.0 { 1.0 } else { 0.0 })
            .collect();
        AlphaMask(Plane {
            width: self.width(),
            height: self.height(),
            data,
        })
    }

    pub fn is_binary(&self) -> bool {
        self.data().iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Number of pixels at or above the binary threshold.
    pub fn count_set(&self) -> usize {
        self.data().iter().filter(|&&v| v >= BINARY_THRESHOLD).count()
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &AlphaMask) -> bool {
        self.same_shape_as(other.width(), other.height())
            && self
                .data()
                .iter()
                .zip(other.data())
                .all(|(&a, &b)| a < BINARY_THRESHOLD || b >= BINARY_THRESHOLD)
    }

    /// Intensity-weighted mean position of the mask, `None` if empty.
    pub fn centroid(&self) -> Option<[f64; 2]> {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for y in 0..self.height() {
            for x in 0..self.width() {
                let w = self.get(x, y);
                sx += w * x as f64;
                sy += w * y as f64;
                sw += w;
            }
        }
        (sw > 0.0).then(|| [sx / sw, sy / sw])
    }
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

macro_rules! rgb_image {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            width: usize,
            height: usize,
            data: Vec<f64>,
        }

        impl $name {
            /// Wraps interleaved RGB samples, validating shape and range.
            pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
                check_len(width, height, CHANNELS, data.len())?;
                check_unit_interval(&data)?;
                Ok($name { width, height, data })
            }

            pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
                assert!(width > 0 && height > 0, "empty image");
                assert!(rgb.iter().all(|v| (0.0..=1.0).contains(v)), "value outside [0, 1]");
                let mut data = Vec::with_capacity(width * height * CHANNELS);
                for _ in 0..width * height {
                    data.extend_from_slice(&rgb);
                }
                $name { width, height, data }
            }

            /// Builds from a per-pixel closure; values are clamped into `[0, 1]`.
            pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
                assert!(width > 0 && height > 0, "empty image");
                let mut data = Vec::with_capacity(width * height * CHANNELS);
                for y in 0..height {
                    for x in 0..width {
                        data.extend(f(x, y).map(clamp_unit));
                    }
                }
                $name { width, height, data }
            }

            pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
                debug_assert_eq!(width * height * CHANNELS, data.len());
                debug_assert!(check_unit_interval(&data).is_ok());
                $name { width, height, data }
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.width
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.height
            }

            /// Interleaved RGB samples.
            #[inline]
            pub fn data(&self) -> &[f64] {
                &self.data
            }

            pub fn into_data(self) -> Vec<f64> {
                self.data
            }

            #[inline]
            pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
                let i = (y * self.width + x) * CHANNELS;
                [self.data[i], self.data[i + 1], self.data[i + 2]]
            }

            pub fn same_shape_as(&self, width: usize, height: usize) -> bool {
                self.width == width && self.height == height
            }
        }
    };
}

rgb_image!(
    /// Display-encoded RGB image.
    SrgbImage
);

rgb_image!(
    /// Sensor-linear RGB image.
    LinearImage
);

impl SrgbImage {
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Per-pixel `0.299 R + 0.587 G + 0.114 B`.
    pub fn to_luma(&self) -> Plane {
        let [wr, wg, wb] = LUMA_WEIGHTS;
        let data = self
            .data
            .chunks_exact(CHANNELS)
            .map(|p| wr * p[0] + wg * p[1] + wb * p[2])
            .collect();
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Luma of raw interleaved samples with an explicit channel count.
pub fn to_luma(width: usize, height: usize, channels: usize, data: &[f64]) -> Result<Plane> {
    if channels != CHANNELS {
        return Err(Error::Shape(format!(
            "luma needs {CHANNELS} channels, got {channels}"
        )));
    }
    let img = SrgbImage::new(width, height, data.to_vec())?;
    Ok(img.to_luma())
}
