use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::crf::DEFAULT_GAMMA;
use crate::error::{Error, Result};
use crate::synth::{MaskMode, MotionConfig, SynthParams, DEFAULT_RESCALE};

/// Prefix of environment variables that override config keys, e.g.
/// `LOCBLUR_SAMPLE_COUNT=10`. `LOCBLUR_SEED`, `LOCBLUR_WORKERS` and
/// `LOCBLUR_OUT` are accepted as short forms.
pub const ENV_PREFIX: &str = "LOCBLUR_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub master_seed: u64,
    pub sample_count: usize,
    pub background_dir: PathBuf,
    pub object_dir: PathBuf,
    pub output_dir: PathBuf,
    pub moving_count: usize,
    pub static_count: usize,
    pub rescale: f64,
    pub reference_height: Option<f64>,
    pub motion: MotionConfig,
    pub gamma: f64,
    pub mask_mode: MaskMode,
    /// Worker threads; 0 uses every available core.
    pub worker_count: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let p = SynthParams::default();
        SynthConfig {
            master_seed: 0,
            sample_count: 1,
            background_dir: PathBuf::from("backgrounds"),
            object_dir: PathBuf::from("objects"),
            output_dir: PathBuf::from("out"),
            moving_count: p.moving_count,
            static_count: p.static_count,
            rescale: DEFAULT_RESCALE,
            reference_height: p.reference_height,
            motion: MotionConfig::default(),
            gamma: DEFAULT_GAMMA,
            mask_mode: MaskMode::Union,
            worker_count: 0,
        }
    }
}

fn env_key(suffix: &str) -> String {
    match suffix {
        "SEED" => "master_seed".into(),
        "WORKERS" => "worker_count".into(),
        "OUT" => "output_dir".into(),
        other => other.to_ascii_lowercase(),
    }
}

impl SynthConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `LOCBLUR_*` overrides. Values are parsed as JSON when
    /// possible (numbers, objects, arrays) and taken as strings otherwise.
    pub fn apply_env<I>(self, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut doc = serde_json::to_value(&self).expect("config serializes");
        let obj = doc.as_object_mut().expect("config is an object");
        let mut touched = false;
        for (name, raw) in vars {
            let Some(suffix) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = env_key(suffix);
            if !obj.contains_key(&key) {
                continue;
            }
            let value = serde_json::from_str::<Value>(&raw).unwrap_or(Value::String(raw));
            obj.insert(key, value);
            touched = true;
        }
        if !touched {
            return Ok(self);
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("environment override: {e}")))
    }

    pub fn params(&self) -> SynthParams {
        SynthParams {
            moving_count: self.moving_count,
            static_count: self.static_count,
            rescale: self.rescale,
            reference_height: self.reference_height,
            motion: self.motion.clone(),
            gamma: self.gamma,
            mask_mode: self.mask_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        self.params().validate()?;
        for (name, dir) in [("background_dir", &self.background_dir), ("object_dir", &self.object_dir)] {
            if !dir.is_dir() {
                return Err(Error::Config(format!("{name} {} is not a directory", dir.display())));
            }
        }
        Ok(())
    }

    /// The parts of the config that determine the dataset contents.
    pub fn provenance(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().unwrap();
        obj.remove("output_dir");
        obj.remove("worker_count");
        v
    }

    /// Reads the provenance written next to a dataset.
    pub fn from_provenance(v: Value) -> Result<Self> {
        serde_json::from_value(v).map_err(|e| Error::Config(format!("dataset config: {e}")))
    }
}
