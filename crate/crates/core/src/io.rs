//! 8-bit PNG decoding and encoding.
//!
//! Decoded samples are `v / 255` (`v / 65535` for 16-bit files); encoded
//! samples are `round(255 v)` clamped to `0..=255`, so decode-then-encode
//! of an 8-bit file reproduces its pixel values exactly.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::image::{AlphaMask, Plane, SrgbImage};

struct Decoded {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

fn decode(path: &Path, bytes: &[u8]) -> Result<Decoded> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::malformed(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::malformed(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::malformed(path, e.to_string()))?;
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => return Err(Error::malformed(path, "unexpanded palette")),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let row_samples = width * channels;
    let mut samples = Vec::with_capacity(row_samples * height);
    for row in buf[..info.buffer_size()].chunks(info.line_size) {
        match info.bit_depth {
            BitDepth::Sixteen => samples.extend(
                row.chunks_exact(2)
                    .take(row_samples)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / 65535.0),
            ),
            _ => samples.extend(row[..row_samples].iter().map(|&b| b as f64 / 255.0)),
        }
    }
    Ok(Decoded {
        width,
        height,
        channels,
        samples,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads a PNG as RGB. Gray files are replicated across channels and any
/// alpha channel is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<SrgbImage> {
    let path = path.as_ref();
    decode_image(path, &read_bytes(path)?)
}

pub fn decode_image(path: &Path, bytes: &[u8]) -> Result<SrgbImage> {
    let d = decode(path, bytes)?;
    let mut rgb = Vec::with_capacity(d.width * d.height * 3);
    for px in d.samples.chunks_exact(d.channels) {
        match d.channels {
            1 | 2 => rgb.extend_from_slice(&[px[0]; 3]),
            _ => rgb.extend_from_slice(&px[..3]),
        }
    }
    SrgbImage::new(d.width, d.height, rgb)
}

/// Reads a PNG as a mask: the gray value, or the first channel of color
/// files.
pub fn read_mask(path: impl AsRef<Path>) -> Result<AlphaMask> {
    let path = path.as_ref();
    let d = decode(path, &read_bytes(path)?)?;
    let values = d.samples.chunks_exact(d.channels).map(|px| px[0]).collect();
    AlphaMask::from_plane(Plane::new(d.width, d.height, values)?)
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn encode(width: usize, height: usize, color: ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(BitDepth::Eight);
        enc.set_compression(png::Compression::Balanced);
        enc.set_filter(png::Filter::Adaptive);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(data).expect("in-memory PNG data");
    }
    out
}

pub fn encode_image(img: &SrgbImage) -> Vec<u8> {
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    encode(img.width(), img.height(), ColorType::Rgb, &bytes)
}

pub fn encode_mask(mask: &AlphaMask) -> Vec<u8> {
    let bytes: Vec<u8> = mask.data().iter().map(|&v| quantize(v)).collect();
    encode(mask.width(), mask.height(), ColorType::Grayscale, &bytes)
}

pub fn write_image(path: impl AsRef<Path>, img: &SrgbImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_image(img)).map_err(|e| Error::io(path, e))
}

pub fn write_mask(path: impl AsRef<Path>, mask: &AlphaMask) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mask(mask)).map_err(|e| Error::io(path, e))
}
