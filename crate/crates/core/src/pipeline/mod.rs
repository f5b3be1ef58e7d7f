//! Dataset-level commands: synthesize a dataset from image folders,
//! collect motion statistics, and evaluate restorations.

mod config;
mod dataset;
mod eval;
mod manifest;
mod stats;
mod synth;

pub use config::{SynthConfig, ENV_PREFIX};
pub use dataset::{list_pngs, load_objects, ObjectLibrary, BLUR_DIR, CONFIG_FILE, MANIFEST_FILE, MASK_DIR, SHARP_DIR};
pub use eval::{run_eval, AggregateMetrics, EvalCommand, EvalOutcome, ImageResult, AVERAGING};
pub use manifest::{read_manifest, ManifestRecord, MovingEntry, SampleStatus, StaticEntry};
pub use stats::{run_stats, FlowSource, StatsCommand, StatsInput, StatsOutcome};
pub use synth::{background_index, run_synth, sample_name, SynthOutcome};

/// Runs `f` on a pool with `workers` threads (0 leaves the choice to rayon).
pub(crate) fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
