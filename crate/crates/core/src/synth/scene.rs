use crate::composite::paint_patch;
use crate::crf;
use crate::error::{Error, Result};
use crate::image::{AlphaMask, LinearImage, Plane, SrgbImage};
use crate::transform::{AffineTransform, Point};
use crate::warp::WarpSampler;

use super::trajectory::Trajectory;

/// A cut-out object: color patch plus coverage mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPatch {
    image: SrgbImage,
    mask: AlphaMask,
}

impl ObjectPatch {
    pub fn new(image: SrgbImage, mask: AlphaMask) -> Result<Self> {
        if !mask.same_shape_as(image.width(), image.height()) {
            return Err(Error::Shape(format!(
                "object image {}x{} vs mask {}x{}",
                image.width(),
                image.height(),
                mask.width(),
                mask.height()
            )));
        }
        if !mask.data().iter().any(|&v| v > 0.0) {
            return Err(Error::Input("object mask has no positive pixel".into()));
        }
        Ok(ObjectPatch { image, mask })
    }

    pub fn image(&self) -> &SrgbImage {
        &self.image
    }

    pub fn mask(&self) -> &AlphaMask {
        &self.mask
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    /// Center in patch pixel coordinates.
    pub fn center(&self) -> Point {
        [
            (self.width() as f64 - 1.0) / 2.0,
            (self.height() as f64 - 1.0) / 2.0,
        ]
    }
}

/// Everything needed to render the frames of one synthetic sample.
///
/// Patches are first scaled by `global_rescale` about their origin; poses
/// (trajectory frames and static placements) act on the rescaled patch.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub background: SrgbImage,
    pub moving_objects: Vec<(ObjectPatch, Trajectory)>,
    pub static_objects: Vec<(ObjectPatch, AffineTransform)>,
    pub global_rescale: f64,
    frame_count: usize,
}

pub const DEFAULT_RESCALE: f64 = 1.2;

impl SceneSpec {
    pub fn new(
        background: SrgbImage,
        moving_objects: Vec<(ObjectPatch, Trajectory)>,
        static_objects: Vec<(ObjectPatch, AffineTransform)>,
        global_rescale: f64,
    ) -> Result<Self> {
        let Some(first) = moving_objects.first() else {
            return Err(Error::Input("scene needs at least one moving object".into()));
        };
        let frame_count = first.1.len();
        Self::build(background, moving_objects, static_objects, global_rescale, frame_count)
    }

    /// A scene with distractors only, rendered as `frame_count` identical frames.
    pub fn static_only(
        background: SrgbImage,
        static_objects: Vec<(ObjectPatch, AffineTransform)>,
        global_rescale: f64,
        frame_count: usize,
    ) -> Result<Self> {
        Self::build(background, Vec::new(), static_objects, global_rescale, frame_count)
    }

    fn build(
        background: SrgbImage,
        moving_objects: Vec<(ObjectPatch, Trajectory)>,
        static_objects: Vec<(ObjectPatch, AffineTransform)>,
        global_rescale: f64,
        frame_count: usize,
    ) -> Result<Self> {
        if !(global_rescale.is_finite() && global_rescale > 0.0) {
            return Err(Error::Config(format!("rescale must be positive, got {global_rescale}")));
        }
        if frame_count == 0 {
            return Err(Error::Config("scene needs at least one frame".into()));
        }
        for (_, t) in &moving_objects {
            t.validate()?;
            if t.len() != frame_count {
                return Err(Error::Config(format!(
                    "trajectory lengths differ: {} vs {frame_count}",
                    t.len()
                )));
            }
        }
        for (_, pose) in &static_objects {
            pose.validate()?;
        }
        Ok(SceneSpec {
            background,
            moving_objects,
            static_objects,
            global_rescale,
            frame_count,
        })
    }

    /// `L`.
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn width(&self) -> usize {
        self.background.width()
    }

    pub fn height(&self) -> usize {
        self.background.height()
    }

    fn rescale(&self) -> AffineTransform {
        AffineTransform::scale_about(self.global_rescale, [0.0, 0.0])
    }

    /// Patch-to-canvas transform of moving object `object` at every frame.
    pub fn object_transforms(&self, object: usize) -> Vec<AffineTransform> {
        let (patch, trajectory) = &self.moving_objects[object];
        let rescale = self.rescale();
        let pivot = rescale.apply(patch.center());
        trajectory
            .poses(pivot)
            .iter()
            .map(|pose| rescale.then(pose))
            .collect()
    }

    pub fn static_transform(&self, object: usize) -> AffineTransform {
        self.rescale().then(&self.static_objects[object].1)
    }
}

/// Renders scene frames one at a time. Static distractors are painted once
/// into a shared base.
pub(crate) struct SceneRenderer<'a> {
    scene: &'a SceneSpec,
    base: SrgbImage,
    transforms: Vec<Vec<AffineTransform>>,
}

pub(crate) struct RenderedFrame {
    pub image: SrgbImage,
    /// Over-accumulated coverage of the moving objects.
    pub coverage: Plane,
    /// Whether each moving object touched the canvas.
    pub visible: Vec<bool>,
}

impl<'a> SceneRenderer<'a> {
    pub fn new(scene: &'a SceneSpec) -> Result<Self> {
        let mut base = scene.background.clone();
        for (i, (patch, _)) in scene.static_objects.iter().enumerate() {
            let t = scene.static_transform(i);
            let sampler = WarpSampler::new(patch.image(), patch.mask(), &t)?;
            paint_patch(&mut base, None, &sampler, patch.width(), patch.height(), &t);
        }
        let transforms = (0..scene.moving_objects.len())
            .map(|i| scene.object_transforms(i))
            .collect::<Vec<_>>();
        for t in transforms.iter().flatten() {
            t.validate()?;
        }
        Ok(SceneRenderer {
            scene,
            base,
            transforms,
        })
    }

    pub fn render(&self, frame: usize) -> Result<RenderedFrame> {
        let (w, h) = (self.scene.width(), self.scene.height());
        let mut image = self.base.clone();
        let mut coverage = vec![0.0; w * h];
        let mut visible = Vec::with_capacity(self.transforms.len());
        for (object, (patch, _)) in self.scene.moving_objects.iter().enumerate() {
            let t = &self.transforms[object][frame];
            let sampler = WarpSampler::new(patch.image(), patch.mask(), t)?;
            visible.push(paint_patch(
                &mut image,
                Some(&mut coverage),
                &sampler,
                patch.width(),
                patch.height(),
                t,
            ));
        }
        for c in &mut coverage {
            *c = c.clamp(0.0, 1.0);
        }
        Ok(RenderedFrame {
            image,
            coverage: Plane::new(w, h, coverage)?,
            visible,
        })
    }
}

/// Renders all `L` frames with the per-frame union of moving-object
/// coverage. Static distractors never enter the masks.
pub fn render_frames(scene: &SceneSpec) -> Result<(Vec<SrgbImage>, Vec<AlphaMask>)> {
    let renderer = SceneRenderer::new(scene)?;
    let mut seen = vec![false; scene.moving_objects.len()];
    let mut frames = Vec::with_capacity(scene.frame_count());
    let mut masks = Vec::with_capacity(scene.frame_count());
    for i in 0..scene.frame_count() {
        let f = renderer.render(i)?;
        for (s, v) in seen.iter_mut().zip(&f.visible) {
            *s |= v;
        }
        frames.push(f.image);
        masks.push(AlphaMask::from_plane_unchecked(f.coverage));
    }
    check_visible(&seen)?;
    Ok((frames, masks))
}

pub(crate) fn check_visible(seen: &[bool]) -> Result<()> {
    match seen.iter().position(|v| !v) {
        Some(i) => Err(Error::DegenerateScene(format!(
            "moving object {i} is outside the canvas in every frame"
        ))),
        None => Ok(()),
    }
}

/// Running sum of frames in the linear domain.
pub(crate) struct LinearAccumulator {
    width: usize,
    height: usize,
    gamma: f64,
    sum: Vec<f64>,
    count: usize,
}

impl LinearAccumulator {
    pub fn new(width: usize, height: usize, gamma: f64) -> Self {
        LinearAccumulator {
            width,
            height,
            gamma,
            sum: vec![0.0; width * height * crate::image::CHANNELS],
            count: 0,
        }
    }

    pub fn add(&mut self, frame: &SrgbImage) -> Result<()> {
        if !frame.same_shape_as(self.width, self.height) {
            return Err(Error::Shape(format!(
                "frame {}x{} does not match {}x{}",
                frame.width(),
                frame.height(),
                self.width,
                self.height
            )));
        }
        let linear = crf::decode_samples(frame.data(), self.gamma)?;
        for (s, v) in self.sum.iter_mut().zip(linear) {
            *s += v;
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<SrgbImage> {
        if self.count == 0 {
            return Err(Error::Input("no frames to average".into()));
        }
        let n = self.count as f64;
        let mean = self.sum.into_iter().map(|s| (s / n).clamp(0.0, 1.0)).collect();
        crf::crf_forward(
            &LinearImage::from_raw_unchecked(self.width, self.height, mean),
            self.gamma,
        )
    }
}

/// `g(mean_i g^-1(frame_i))`: frame averaging in the linear domain.
pub fn average_frames(frames: &[SrgbImage], gamma: f64) -> Result<SrgbImage> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Input("no frames to average".into()))?;
    let mut acc = LinearAccumulator::new(first.width(), first.height(), gamma);
    for f in frames {
        acc.add(f)?;
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::trajectory::TransformStep;

    fn square_patch(side: usize, rgb: [f64; 3]) -> ObjectPatch {
        ObjectPatch::new(
            SrgbImage::filled(side, side, rgb),
            AlphaMask::filled(side, side, 1.0),
        )
        .unwrap()
    }

    fn translating(len: usize, dx: f64, start: [f64; 2]) -> Trajectory {
        Trajectory::new(
            AffineTransform::translation(start[0], start[1]),
            vec![TransformStep::translation(dx, 0.0); len - 1],
        )
        .unwrap()
    }

    #[test]
    fn averaging_examples() {
        let a = SrgbImage::filled(3, 2, [0.2; 3]);
        let b = SrgbImage::filled(3, 2, [0.4; 3]);
        let out = average_frames(&[a.clone(), a.clone(), a.clone()], 2.2).unwrap();
        assert!(out.data().iter().zip(a.data()).all(|(x, y)| (x - y).abs() < 1e-6));
        let out = average_frames(&[a.clone(), b.clone()], 1.0).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.3).abs() < 1e-12));
        // mpmath, 40 digits: ((0.2^2.2 + 0.4^2.2) / 2)^(1/2.2) = 0.31922729862999867152...
        let out = average_frames(&[a.clone(), b], 2.2).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.319_227_298_629_998_7).abs() < 1e-12));
        assert!(matches!(
            average_frames(&[a, SrgbImage::filled(2, 2, [0.0; 3])], 2.2),
            Err(Error::Shape(_))
        ));
        assert!(average_frames(&[], 2.2).is_err());
    }

    #[test]
    fn zero_motion_frames_identical() {
        let bg = SrgbImage::filled(40, 30, [0.3, 0.5, 0.7]);
        let t = translating(7, 0.0, [10.0, 8.0]);
        let scene = SceneSpec::new(bg, vec![(square_patch(6, [1.0, 0.0, 0.0]), t)], vec![], 1.0).unwrap();
        let (frames, masks) = render_frames(&scene).unwrap();
        assert_eq!(frames.len(), 7);
        for i in 1..7 {
            assert_eq!(frames[i], frames[0]);
            assert_eq!(masks[i], masks[0]);
        }
        assert_eq!(masks[0].count_set(), 36);
    }

    #[test]
    fn translation_centroid_tracks() {
        let bg = SrgbImage::filled(100, 40, [0.5; 3]);
        let t = translating(7, 8.0, [5.0, 10.0]);
        let scene = SceneSpec::new(bg, vec![(square_patch(10, [0.9, 0.1, 0.1]), t)], vec![], 1.0).unwrap();
        let (_, masks) = render_frames(&scene).unwrap();
        let c0 = masks[0].centroid().unwrap();
        let c6 = masks[6].centroid().unwrap();
        assert!((c6[0] - c0[0] - 48.0).abs() < 1.0);
        assert!((c6[1] - c0[1]).abs() < 1.0);
    }

    #[test]
    fn static_objects_stay_out_of_masks() {
        let bg = SrgbImage::filled(30, 30, [0.5; 3]);
        let scene = SceneSpec::static_only(
            bg.clone(),
            vec![(square_patch(5, [0.0, 1.0, 0.0]), AffineTransform::translation(3.0, 4.0))],
            1.2,
            7,
        )
        .unwrap();
        let (frames, masks) = render_frames(&scene).unwrap();
        assert_eq!(frames.len(), 7);
        assert!(masks.iter().all(|m| m.count_set() == 0));
        assert_ne!(frames[0], bg);
    }

    #[test]
    fn rescale_scales_footprint() {
        let bg = SrgbImage::filled(60, 60, [0.5; 3]);
        let t = translating(7, 0.0, [10.0, 10.0]);
        let scene = SceneSpec::new(bg, vec![(square_patch(10, [1.0; 3]), t)], vec![], 2.0).unwrap();
        let (_, masks) = render_frames(&scene).unwrap();
        let n = masks[0].count_set() as f64;
        assert!((n - 400.0).abs() < 45.0, "{n}");
    }

    #[test]
    fn offscreen_object_is_degenerate() {
        let bg = SrgbImage::filled(20, 20, [0.5; 3]);
        let t = translating(7, 1.0, [500.0, 500.0]);
        let scene = SceneSpec::new(bg, vec![(square_patch(4, [1.0; 3]), t)], vec![], 1.0).unwrap();
        assert!(matches!(render_frames(&scene), Err(Error::DegenerateScene(_))));
    }

    #[test]
    fn patch_and_scene_validation() {
        assert!(ObjectPatch::new(SrgbImage::filled(2, 2, [0.0; 3]), AlphaMask::empty(2, 2)).is_err());
        assert!(ObjectPatch::new(SrgbImage::filled(2, 2, [0.0; 3]), AlphaMask::filled(2, 3, 1.0)).is_err());
        let bg = SrgbImage::filled(20, 20, [0.5; 3]);
        let a = translating(7, 1.0, [0.0, 0.0]);
        let b = translating(9, 1.0, [0.0, 0.0]);
        let p = square_patch(3, [1.0; 3]);
        assert!(SceneSpec::new(bg.clone(), vec![(p.clone(), a.clone()), (p.clone(), b)], vec![], 1.0).is_err());
        assert!(SceneSpec::new(bg.clone(), vec![(p.clone(), a.clone())], vec![], 0.0).is_err());
        assert!(SceneSpec::new(bg, vec![], vec![], 1.0).is_err());
    }
}
