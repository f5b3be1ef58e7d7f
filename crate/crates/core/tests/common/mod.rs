#![allow(dead_code)]

use std::path::{Path, PathBuf};

use locblur::io::{write_image, write_mask};
use locblur::pipeline::SynthConfig;
use locblur::synth::ObjectPatch;
use locblur::{AlphaMask, SrgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth multi-frequency texture in [0,1]^3, distinct per `salt`.
pub fn texture(w: usize, h: usize, salt: u64) -> SrgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(salt);
    // orientations spread over the half circle so the texture is never
    // close to one-dimensional
    let waves: Vec<[f64; 4]> = (0..9)
        .map(|k| {
            let f = rng.random_range(0.04..0.35);
            let a = (k as f64 + rng.random_range(0.0..1.0)) * std::f64::consts::PI / 9.0;
            [f * a.cos(), f * a.sin(), rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.5..1.0)]
        })
        .collect();
    let tint: [f64; 3] = [rng.random_range(0.6..1.0), rng.random_range(0.6..1.0), rng.random_range(0.6..1.0)];
    let norm: f64 = waves.iter().map(|w| w[3]).sum();
    SrgbImage::from_fn(w, h, |x, y| {
        let mut v = 0.0;
        for (k, [fx, fy, ph, amp]) in waves.iter().enumerate() {
            let s = (fx * x as f64 + fy * y as f64 + ph).sin();
            v += amp * if k % 3 == 0 { s.signum() * s.abs().sqrt() } else { s };
        }
        let g = 0.5 + 0.45 * v / norm;
        // luma rises with g for every tint, so the texture survives grayscale
        [g * tint[0], (0.2 + 0.7 * g) * tint[1], (1.0 - g) * tint[2]]
    })
}

/// Textured ellipse-ish object with a soft edge.
pub fn object(side: usize, salt: u64) -> ObjectPatch {
    let img = texture(side, side, salt.wrapping_mul(31).wrapping_add(7));
    let r = side as f64 / 2.0;
    let mask = AlphaMask::from_fn(side, side, |x, y| {
        let dx = (x as f64 + 0.5 - r) / r;
        let dy = (y as f64 + 0.5 - r) / (0.8 * r);
        let d = (dx * dx + dy * dy).sqrt();
        ((1.0 - d) * r / 1.5).clamp(0.0, 1.0)
    });
    ObjectPatch::new(img, mask).unwrap()
}

pub fn object_pool(n: usize, base: usize) -> Vec<ObjectPatch> {
    (0..n).map(|k| object(base + 12 * (k % 4), k as u64 + 100)).collect()
}

pub struct Fixture {
    pub root: tempfile::TempDir,
    pub backgrounds: PathBuf,
    pub objects: PathBuf,
}

impl Fixture {
    /// `nb` backgrounds of `w`×`h` and `no` objects on disk.
    pub fn new(nb: usize, w: usize, h: usize, no: usize, object_side: usize) -> Fixture {
        let root = tempfile::tempdir().unwrap();
        let backgrounds = root.path().join("backgrounds");
        let objects = root.path().join("objects");
        std::fs::create_dir_all(&backgrounds).unwrap();
        std::fs::create_dir_all(&objects).unwrap();
        for b in 0..nb {
            write_image(backgrounds.join(format!("bg{b:02}.png")), &texture(w, h, 900 + b as u64)).unwrap();
        }
        for (k, p) in object_pool(no, object_side).iter().enumerate() {
            write_image(objects.join(format!("obj{k:02}.png")), p.image()).unwrap();
            write_mask(objects.join(format!("obj{k:02}.mask.png")), p.mask()).unwrap();
        }
        Fixture {
            root,
            backgrounds,
            objects,
        }
    }

    pub fn config(&self, out: &str, samples: usize) -> SynthConfig {
        SynthConfig {
            sample_count: samples,
            background_dir: self.backgrounds.clone(),
            object_dir: self.objects.clone(),
            output_dir: self.root.path().join(out),
            ..SynthConfig::default()
        }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.path().join(rel)
    }
}

/// SHA-256 over every file (relative path and contents) under `dir`.
pub fn tree_hash(dir: &Path) -> String {
    use sha2::{Digest, Sha256};
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(f.strip_prefix(dir).unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(std::fs::read(&f).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Integer-shifted crop pair: b(x, y) = a(x - dx, y - dy).
pub fn shifted_pair(w: usize, h: usize, dx: usize, dy: usize, salt: u64) -> (SrgbImage, SrgbImage) {
    let big = texture(w + dx, h + dy, salt);
    let a = SrgbImage::from_fn(w, h, |x, y| big.pixel(x + dx, y + dy));
    let b = SrgbImage::from_fn(w, h, |x, y| big.pixel(x, y));
    (a, b)
}
