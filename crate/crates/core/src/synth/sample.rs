use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crf::DEFAULT_GAMMA;
use crate::error::{Error, Result};
use crate::image::{AlphaMask, Plane, SrgbImage};
use crate::transform::AffineTransform;

use super::scene::{check_visible, LinearAccumulator, ObjectPatch, SceneRenderer, SceneSpec, DEFAULT_RESCALE};
use super::seed::{derive_seed, rng_from_seed};
use super::trajectory::{MotionConfig, Trajectory};

/// Resampling budget for scenes whose objects never reach the canvas.
pub const MAX_ATTEMPTS: u32 = 8;

/// Which binary mask is the supervision target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    /// Every pixel any moving object touches in any frame.
    #[default]
    Union,
    /// Moving-object coverage of the middle frame.
    Mid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub moving_count: usize,
    pub static_count: usize,
    pub rescale: f64,
    /// Canvas height at which `rescale` applies as-is. Other canvases scale
    /// patches by `rescale * height / reference_height`. `None` applies
    /// `rescale` regardless of canvas size.
    pub reference_height: Option<f64>,
    pub motion: MotionConfig,
    pub gamma: f64,
    pub mask_mode: MaskMode,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            moving_count: 2,
            static_count: 2,
            rescale: DEFAULT_RESCALE,
            reference_height: Some(720.0),
            motion: MotionConfig::default(),
            gamma: DEFAULT_GAMMA,
            mask_mode: MaskMode::Union,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.moving_count == 0 {
            return Err(Error::Config("moving_count must be at least 1".into()));
        }
        if !(self.rescale.is_finite() && self.rescale > 0.0) {
            return Err(Error::Config(format!("rescale must be positive, got {}", self.rescale)));
        }
        if let Some(h) = self.reference_height {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("reference_height must be positive, got {h}")));
            }
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        self.motion.validate()
    }

    pub fn objects_needed(&self) -> usize {
        self.moving_count + self.static_count
    }

    pub fn effective_rescale(&self, canvas_height: usize) -> f64 {
        match self.reference_height {
            Some(h) => self.rescale * canvas_height as f64 / h,
            None => self.rescale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingRecord {
    /// Index into the object pool.
    pub object: usize,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticRecord {
    pub object: usize,
    pub pose: AffineTransform,
}

/// Everything needed to rebuild the scene of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub seed: u64,
    /// Seed of the attempt that succeeded.
    pub attempt_seed: u64,
    pub attempts: u32,
    pub frame_count: usize,
    pub rescale: f64,
    pub moving: Vec<MovingRecord>,
    pub statics: Vec<StaticRecord>,
}

impl SampleMetadata {
    pub fn scene(&self, background: &SrgbImage, pool: &[ObjectPatch]) -> Result<SceneSpec> {
        let get = |i: usize| {
            pool.get(i)
                .cloned()
                .ok_or_else(|| Error::Range(format!("object {i} not in pool of {}", pool.len())))
        };
        let moving = self
            .moving
            .iter()
            .map(|m| Ok((get(m.object)?, m.trajectory.clone())))
            .collect::<Result<Vec<_>>>()?;
        let statics = self
            .statics
            .iter()
            .map(|s| Ok((get(s.object)?, s.pose)))
            .collect::<Result<Vec<_>>>()?;
        SceneSpec::new(background.clone(), moving, statics, self.rescale)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSample {
    pub blurred: SrgbImage,
    /// Middle frame, the restoration target.
    pub sharp: SrgbImage,
    pub mask_union: AlphaMask,
    pub mask_mid: AlphaMask,
    pub metadata: SampleMetadata,
}

impl SyntheticSample {
    pub fn seed(&self) -> u64 {
        self.metadata.seed
    }

    pub fn frame_count(&self) -> usize {
        self.metadata.frame_count
    }

    pub fn mask(&self, mode: MaskMode) -> &AlphaMask {
        match mode {
            MaskMode::Union => &self.mask_union,
            MaskMode::Mid => &self.mask_mid,
        }
    }
}

/// Seed used by attempt `k` (0-based) of a sample.
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        seed
    } else {
        derive_seed(seed, attempt as u64)
    }
}

/// Builds one locally blurred sample: picks distinct moving and static
/// objects from `object_pool`, places them at random, moves the moving
/// ones along a shared-length random trajectory, and averages the frames in
/// the linear domain. Scenes where a moving object never reaches the
/// canvas are redrawn with a derived seed, at most [`MAX_ATTEMPTS`] times.
pub fn synthesize_sample(
    background: &SrgbImage,
    object_pool: &[ObjectPatch],
    seed: u64,
    params: &SynthParams,
) -> Result<SyntheticSample> {
    params.validate()?;
    if object_pool.len() < params.objects_needed() {
        return Err(Error::Input(format!(
            "object pool has {} patches, {} needed",
            object_pool.len(),
            params.objects_needed()
        )));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let metadata = draw_scene(background, object_pool, seed, attempt, params);
        let scene = metadata.scene(background, object_pool)?;
        match render_sample(&scene, params.gamma) {
            Ok((blurred, sharp, mask_union, mask_mid)) => {
                return Ok(SyntheticSample {
                    blurred,
                    sharp,
                    mask_union,
                    mask_mid,
                    metadata,
                })
            }
            Err(Error::DegenerateScene(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateScene(format!(
        "no visible scene after {MAX_ATTEMPTS} attempts"
    )))
}

fn draw_scene(
    background: &SrgbImage,
    pool: &[ObjectPatch],
    seed: u64,
    attempt: u32,
    params: &SynthParams,
) -> SampleMetadata {
    let attempt_seed = attempt_seed(seed, attempt);
    let mut rng = rng_from_seed(attempt_seed);
    let (w, h) = (background.width() as f64, background.height() as f64);
    let rescale = params.effective_rescale(background.height());
    let picks = index::sample(&mut rng, pool.len(), params.objects_needed()).into_vec();
    let frame_count = params.motion.sample_length(&mut rng);

    let place = |rng: &mut rand_chacha::ChaCha8Rng, object: usize| {
        let [px, py] = pool[object].center();
        let cx = rng.random::<f64>() * w;
        let cy = rng.random::<f64>() * h;
        AffineTransform::translation(cx - rescale * px, cy - rescale * py)
    };

    let moving = picks[..params.moving_count]
        .iter()
        .map(|&object| {
            let initial = place(&mut rng, object);
            let steps = params.motion.sample_steps(&mut rng, frame_count);
            MovingRecord {
                object,
                trajectory: Trajectory { initial, steps },
            }
        })
        .collect();
    let statics = picks[params.moving_count..]
        .iter()
        .map(|&object| StaticRecord {
            object,
            pose: place(&mut rng, object),
        })
        .collect();
    SampleMetadata {
        seed,
        attempt_seed,
        attempts: attempt + 1,
        frame_count,
        rescale,
        moving,
        statics,
    }
}

/// Streams the frames of `scene` into (blurred, mid frame, union mask,
/// mid mask). The union mask marks every pixel with positive moving
/// coverage in some frame; the mid mask is the middle frame's coverage
/// binarized at 0.5.
pub(crate) fn render_sample(
    scene: &SceneSpec,
    gamma: f64,
) -> Result<(SrgbImage, SrgbImage, AlphaMask, AlphaMask)> {
    let renderer = SceneRenderer::new(scene)?;
    let (w, h) = (scene.width(), scene.height());
    let mid = scene.frame_count() / 2;
    let mut acc = LinearAccumulator::new(w, h, gamma);
    let mut union = vec![0.0f64; w * h];
    let mut seen = vec![false; scene.moving_objects.len()];
    let mut sharp = None;
    let mut mid_mask = None;
    for i in 0..scene.frame_count() {
        let frame = renderer.render(i)?;
        for (s, v) in seen.iter_mut().zip(&frame.visible) {
            *s |= v;
        }
        for (u, &c) in union.iter_mut().zip(frame.coverage.data()) {
            *u = u.max(c);
        }
        acc.add(&frame.image)?;
        if i == mid {
            mid_mask = Some(AlphaMask::from_plane_unchecked(frame.coverage).binarize());
            sharp = Some(frame.image);
        }
    }
    check_visible(&seen)?;
    let union = AlphaMask::from_plane_unchecked(Plane::new(w, h, union)?).support();
    Ok((
        acc.finish()?,
        sharp.expect("mid frame rendered"),
        union,
        mid_mask.expect("mid frame rendered"),
    ))
}

/// Helper for tests and callers that want the draw without rendering.
pub fn draw_metadata(
    background: &SrgbImage,
    object_pool: &[ObjectPatch],
    seed: u64,
    params: &SynthParams,
) -> Result<SampleMetadata> {
    params.validate()?;
    if object_pool.len() < params.objects_needed() {
        return Err(Error::Input("object pool too small".into()));
    }
    Ok(draw_scene(background, object_pool, seed, 0, params))
}
