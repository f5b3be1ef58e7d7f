//! Local blur synthesis: random trajectories for pasted objects, frame
//! rendering, and linear-domain frame averaging.

mod sample;
mod scene;
pub mod seed;
mod trajectory;

pub use sample::{
    attempt_seed, draw_metadata, synthesize_sample, MaskMode, MovingRecord, SampleMetadata, StaticRecord,
    SynthParams, SyntheticSample, MAX_ATTEMPTS,
};
pub(crate) use scene::SceneRenderer;
pub use scene::{average_frames, render_frames, ObjectPatch, SceneSpec, DEFAULT_RESCALE};
pub use seed::{derive_seed, rng_from_seed};
pub use trajectory::{
    sample_trajectory, sample_trajectory_with_len, MotionConfig, TransformKind, TransformStep, Trajectory,
    UniformRange, MAX_FRAMES, MIN_FRAMES, ORDERS,
};
