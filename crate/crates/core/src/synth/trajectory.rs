use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::{AffineTransform, Point};

pub const MIN_FRAMES: usize = 7;
pub const MAX_FRAMES: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Translate,
    Scale,
    Rotate,
}

/// All six application orders of the three transform kinds.
pub const ORDERS: [[TransformKind; 3]; 6] = {
    use TransformKind::*;
    [
        [Translate, Scale, Rotate],
        [Translate, Rotate, Scale],
        [Scale, Translate, Rotate],
        [Scale, Rotate, Translate],
        [Rotate, Translate, Scale],
        [Rotate, Scale, Translate],
    ]
};

/// One trajectory step. Scale and rotation pivot on the object center as
/// it stands at the start of the step; the kinds are applied in `order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformStep {
    pub dx: f64,
    pub dy: f64,
    pub scale: f64,
    /// Radians.
    pub rotation: f64,
    pub order: [TransformKind; 3],
}

impl TransformStep {
    pub fn null() -> Self {
        TransformStep {
            dx: 0.0,
            dy: 0.0,
            scale: 1.0,
            rotation: 0.0,
            order: ORDERS[0],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        TransformStep {
            dx,
            dy,
            ..Self::null()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.dx, self.dy, self.scale, self.rotation].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite step parameter".into()));
        }
        if self.scale.is_nan() || self.scale <= 0.0 {
            return Err(Error::InvalidTransform(format!(
                "step scale must be positive, got {}",
                self.scale
            )));
        }
        let mut seen = [false; 3];
        for kind in self.order {
            let slot = &mut seen[kind as usize];
            if *slot {
                return Err(Error::InvalidTransform(format!(
                    "order {:?} is not a permutation",
                    self.order
                )));
            }
            *slot = true;
        }
        Ok(())
    }

    /// Canvas-space motion of this step for an object centered at `pivot`.
    pub fn to_affine(&self, pivot: Point) -> AffineTransform {
        self.order
            .iter()
            .fold(AffineTransform::IDENTITY, |acc, kind| {
                let t = match kind {
                    TransformKind::Translate => AffineTransform::translation(self.dx, self.dy),
                    TransformKind::Scale => AffineTransform::scale_about(self.scale, pivot),
                    TransformKind::Rotate => AffineTransform::rotation_about(self.rotation, pivot),
                };
                acc.then(&t)
            })
    }
}

/// A start pose followed by `L - 1` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: AffineTransform,
    pub steps: Vec<TransformStep>,
}

impl Trajectory {
    pub fn new(initial: AffineTransform, steps: Vec<TransformStep>) -> Result<Self> {
        let t = Trajectory { initial, steps };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.len();
        if len.is_multiple_of(2) || !(MIN_FRAMES..=MAX_FRAMES).contains(&len) {
            return Err(Error::Config(format!(
                "trajectory length must be odd in [{MIN_FRAMES}, {MAX_FRAMES}], got {len}"
            )));
        }
        self.initial.validate()?;
        self.steps.iter().try_for_each(TransformStep::validate)
    }

    /// Frame count `L`.
    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_initial(mut self, initial: AffineTransform) -> Self {
        self.initial = initial;
        self
    }

    /// Pose of every frame. `pivot` is the object center in the coordinate
    /// frame the initial pose acts on.
    pub fn poses(&self, pivot: Point) -> Vec<AffineTransform> {
        let mut pose = self.initial;
        let mut out = Vec::with_capacity(self.len());
        out.push(pose);
        for step in &self.steps {
            let center = pose.apply(pivot);
            pose = pose.then(&step.to_affine(center));
            out.push(pose);
        }
        out
    }
}

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        UniformRange { lo, hi }
    }

    pub const fn fixed(v: f64) -> Self {
        UniformRange { lo: v, hi: v }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::Config(format!(
                "{name} range [{}, {}] is empty or not finite",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Consumes exactly one `f64` draw, also for degenerate ranges.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if self.lo == self.hi {
            self.lo
        } else {
            (self.lo + (self.hi - self.lo) * u).min(self.hi)
        }
    }
}

impl From<[f64; 2]> for UniformRange {
    fn from([lo, hi]: [f64; 2]) -> Self {
        UniformRange { lo, hi }
    }
}

/// Sampling ranges for trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    /// Admissible frame counts, drawn uniformly.
    pub lengths: Vec<usize>,
    pub dx: UniformRange,
    pub dy: UniformRange,
    pub scale: UniformRange,
    pub rotation_deg: UniformRange,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            lengths: vec![7, 9, 11, 13],
            dx: UniformRange::new(-8.0, 8.0),
            dy: UniformRange::new(-8.0, 8.0),
            scale: UniformRange::new(0.98, 1.02),
            rotation_deg: UniformRange::new(-2.0, 2.0),
        }
    }
}

impl MotionConfig {
    /// Every step is the identity.
    pub fn null() -> Self {
        MotionConfig {
            dx: UniformRange::fixed(0.0),
            dy: UniformRange::fixed(0.0),
            scale: UniformRange::fixed(1.0),
            rotation_deg: UniformRange::fixed(0.0),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::Config("no trajectory lengths configured".into()));
        }
        if let Some(bad) = self
            .lengths
            .iter()
            .find(|&&l| l % 2 == 0 || !(MIN_FRAMES..=MAX_FRAMES).contains(&l))
        {
            return Err(Error::Config(format!(
                "trajectory length {bad} is not an odd value in [{MIN_FRAMES}, {MAX_FRAMES}]"
            )));
        }
        self.dx.validate("dx")?;
        self.dy.validate("dy")?;
        self.scale.validate("scale")?;
        self.rotation_deg.validate("rotation")?;
        if self.scale.lo <= 0.0 {
            return Err(Error::Config("scale range must be strictly positive".into()));
        }
        Ok(())
    }

    pub(crate) fn sample_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.lengths[rng.random_range(0..self.lengths.len())]
    }

    pub(crate) fn sample_steps<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<TransformStep> {
        (1..len)
            .map(|_| {
                let dx = self.dx.sample(rng);
                let dy = self.dy.sample(rng);
                let scale = self.scale.sample(rng);
                let rotation = self.rotation_deg.sample(rng).to_radians();
                let order = ORDERS[rng.random_range(0..ORDERS.len())];
                TransformStep {
                    dx,
                    dy,
                    scale,
                    rotation,
                    order,
                }
            })
            .collect()
    }
}

/// Draws `L` uniformly from `cfg.lengths`, then each step's parameters and
/// order. The start pose is the identity.
pub fn sample_trajectory<R: Rng + ?Sized>(rng: &mut R, cfg: &MotionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let len = cfg.sample_length(rng);
    Trajectory::new(AffineTransform::IDENTITY, cfg.sample_steps(rng, len))
}

/// As [`sample_trajectory`] with a prescribed frame count.
pub fn sample_trajectory_with_len<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &MotionConfig,
    len: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    Trajectory::new(AffineTransform::IDENTITY, cfg.sample_steps(rng, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::seed::rng_from_seed;

    #[test]
    fn default_lengths_are_odd_in_range() {
        let mut rng = rng_from_seed(1);
        for _ in 0..200 {
            let t = sample_trajectory(&mut rng, &MotionConfig::default()).unwrap();
            assert!([7, 9, 11, 13].contains(&t.len()));
        }
    }

    #[test]
    fn null_motion_keeps_pose() {
        let mut rng = rng_from_seed(5);
        let t = sample_trajectory(&mut rng, &MotionConfig::null())
            .unwrap()
            .with_initial(AffineTransform::translation(10.0, 20.0));
        let poses = t.poses([3.0, 4.0]);
        assert_eq!(poses.len(), t.len());
        for p in &poses {
            assert_eq!(*p, AffineTransform::translation(10.0, 20.0));
        }
    }

    #[test]
    fn seeded_runs_match() {
        let a = sample_trajectory(&mut rng_from_seed(42), &MotionConfig::default()).unwrap();
        let b = sample_trajectory(&mut rng_from_seed(42), &MotionConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = sample_trajectory(&mut rng_from_seed(43), &MotionConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn orders_are_distinct_permutations() {
        for (i, a) in ORDERS.iter().enumerate() {
            let step = TransformStep { order: *a, ..TransformStep::null() };
            step.validate().unwrap();
            for b in &ORDERS[i + 1..] {
                assert_ne!(a, b);
            }
        }
        let bad = TransformStep {
            order: [TransformKind::Scale, TransformKind::Scale, TransformKind::Rotate],
            ..TransformStep::null()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn order_changes_the_motion() {
        let pivot = [0.0, 0.0];
        let mut s = TransformStep {
            dx: 5.0,
            dy: 0.0,
            scale: 1.0,
            rotation: std::f64::consts::FRAC_PI_2,
            order: [TransformKind::Translate, TransformKind::Rotate, TransformKind::Scale],
        };
        let p = s.to_affine(pivot).apply([0.0, 0.0]);
        assert!((p[0]).abs() < 1e-12 && (p[1] - 5.0).abs() < 1e-12);
        s.order = [TransformKind::Rotate, TransformKind::Translate, TransformKind::Scale];
        let p = s.to_affine(pivot).apply([0.0, 0.0]);
        assert!((p[0] - 5.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = MotionConfig {
            lengths: vec![8],
            ..MotionConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.lengths = vec![15];
        assert!(cfg.validate().is_err());
        cfg.lengths = vec![];
        assert!(cfg.validate().is_err());
        let cfg = MotionConfig {
            dx: UniformRange::new(3.0, 1.0),
            ..MotionConfig::default()
        };
        assert!(sample_trajectory(&mut rng_from_seed(0), &cfg).is_err());
        let mut cfg = MotionConfig {
            scale: UniformRange::new(0.0, 1.0),
            ..MotionConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.scale = UniformRange::new(f64::NAN, 1.0);
        assert!(cfg.validate().is_err());
        assert!(Trajectory::new(AffineTransform::IDENTITY, vec![TransformStep::null(); 7]).is_err());
    }
}
