//! Dense displacement fields and their binary file format.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size      | content                                  |
//! |--------|-----------|------------------------------------------|
//! | 0      | 8         | magic `b"LBFLOW01"`                      |
//! | 8      | 4         | width, `u32`                             |
//! | 12     | 4         | height, `u32`                            |
//! | 16     | 8·w·h     | row-major `(u, v)` pairs, `f32` each     |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const FLOW_MAGIC: [u8; 8] = *b"LBFLOW01";

/// Per-pixel displacement `(u, v)` in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl MotionField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || u.len() != width * height || v.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} field with {} u and {} v samples",
                u.len(),
                v.len()
            )));
        }
        if let Some(i) = u.iter().chain(&v).position(|x| !x.is_finite()) {
            let value = if i < u.len() { u[i] } else { v[i - u.len()] };
            return Err(Error::Domain {
                index: i % (width * height),
                value,
                domain: "finite",
            });
        }
        Ok(MotionField { width, height, u, v })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        MotionField {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    pub fn uniform(width: usize, height: usize, u: f64, v: f64) -> Self {
        MotionField {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 2]) -> Result<Self> {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let [a, b] = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        Self::new(width, height, u, v)
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert!(u.iter().chain(&v).all(|x| x.is_finite()));
        MotionField { width, height, u, v }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f64; 2] {
        let i = y * self.width + x;
        [self.u[i], self.v[i]]
    }

    /// Euclidean norm per pixel.
    pub fn norms(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    pub fn negated(&self) -> MotionField {
        MotionField {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|x| -x).collect(),
            v: self.v.iter().map(|x| -x).collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.u.len());
        out.extend_from_slice(&FLOW_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for (a, b) in self.u.iter().zip(&self.v) {
            out.extend_from_slice(&(*a as f32).to_le_bytes());
            out.extend_from_slice(&(*b as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 16 || bytes[..8] != FLOW_MAGIC {
            return Err("missing flow magic".into());
        }
        let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let (width, height) = (word(8), word(12));
        let n = width
            .checked_mul(height)
            .ok_or_else(|| "dimensions overflow".to_string())?;
        if bytes.len() != 16 + 8 * n {
            return Err(format!(
                "expected {} bytes for {width}x{height}, found {}",
                16 + 8 * n,
                bytes.len()
            ));
        }
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for pair in bytes[16..].chunks_exact(8) {
            u.push(f32::from_le_bytes(pair[..4].try_into().unwrap()) as f64);
            v.push(f32::from_le_bytes(pair[4..].try_into().unwrap()) as f64);
        }
        MotionField::new(width, height, u, v).map_err(|e| e.to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|m| Error::malformed(path, m))
    }
}
