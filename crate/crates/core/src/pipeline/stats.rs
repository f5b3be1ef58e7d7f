use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SynthConfig;
use super::dataset::{file_id, list_pngs, load_objects, ObjectLibrary, CONFIG_FILE, MANIFEST_FILE};
use super::manifest::{read_manifest, ManifestRecord, SampleStatus};
use super::with_pool;
use crate::error::{Error, Result};
use crate::io::read_image;
use crate::motion::{
    default_thresholds, estimate_flow, ground_truth_flow, AreaRatioCurve, CurveMode, FlowParams, MotionField,
    RatioAccumulator,
};
use crate::synth::{MovingRecord, SampleMetadata, SceneRenderer, SceneSpec, StaticRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum StatsInput {
    /// A directory written by the synth command.
    Dataset(PathBuf),
    /// A text file with one sequence per line: two or more image paths
    /// separated by whitespace, relative to the list file. Flow runs from
    /// the first image to the last.
    PairList(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowSource {
    #[default]
    GroundTruth,
    Estimated,
}

#[derive(Debug, Clone)]
pub struct StatsCommand {
    pub input: StatsInput,
    pub source: FlowSource,
    pub flow: FlowParams,
    pub thresholds: Vec<f64>,
    pub mode: CurveMode,
    /// For datasets: number of frames around the middle frame whose first
    /// and last frames form the flow pair. Clamped to the sequence length.
    pub window: usize,
    /// Write each field as `<name>.flo` here.
    pub flow_out: Option<PathBuf>,
    pub worker_count: usize,
}

impl StatsCommand {
    pub fn new(input: StatsInput, source: FlowSource) -> Self {
        StatsCommand {
            input,
            source,
            flow: FlowParams::default(),
            thresholds: default_thresholds(),
            mode: CurveMode::Mean,
            window: 3,
            flow_out: None,
            worker_count: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StatsOutcome {
    pub curve: Option<AreaRatioCurve>,
    pub fields: Vec<(String, AreaRatioCurve)>,
    pub failures: Vec<(String, String)>,
}

impl StatsOutcome {
    /// `ratio@0.5=... ratio@5.0=... fields=N`.
    pub fn summary(&self) -> String {
        let Some(curve) = &self.curve else {
            return format!("no fields ({} failed)", self.failures.len());
        };
        let at = |t: f64| curve.ratio_at(t).map_or("n/a".to_string(), |r| format!("{r:.6}"));
        format!("ratio@0.5={} ratio@5.0={} fields={}", at(0.5), at(5.0), self.fields.len())
    }

    /// Long-format `field,threshold,ratio` table.
    pub fn per_field_csv(&self) -> String {
        let mut s = String::from("field,threshold,ratio\n");
        for (name, c) in &self.fields {
            for (t, r) in c.thresholds().iter().zip(c.ratios()) {
                writeln!(s, "{name},{t:.6},{r:.6}").unwrap();
            }
        }
        s
    }
}

type Item = (String, Result<MotionField>);

pub fn run_stats(cmd: &StatsCommand) -> Result<StatsOutcome> {
    cmd.flow.validate()?;
    let mut acc = RatioAccumulator::new(&cmd.thresholds, cmd.mode)?;
    if cmd.window < 2 {
        return Err(Error::Config("window must span at least two frames".into()));
    }
    if let Some(dir) = &cmd.flow_out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let items: Vec<Item> = match &cmd.input {
        StatsInput::Dataset(dir) => dataset_flows(dir, cmd)?,
        StatsInput::PairList(list) => {
            if cmd.source == FlowSource::GroundTruth {
                return Err(Error::Config("ground-truth flow needs a synthesized dataset".into()));
            }
            pair_list_flows(list, cmd)?
        }
    };
    if items.is_empty() {
        return Err(Error::Input("no inputs".into()));
    }
    let mut fields = Vec::new();
    let mut failures = Vec::new();
    for (name, flow) in items {
        let flow = flow.and_then(|f| match &cmd.flow_out {
            Some(dir) => f.write(&dir.join(format!("{name}.flo"))).map(|_| f),
            None => Ok(f),
        });
        match flow {
            Ok(f) => {
                fields.push((name, acc.field_curve(&f)));
                acc.add(&f);
            }
            Err(e) => failures.push((name, e.to_string())),
        }
    }
    let curve = if fields.is_empty() { None } else { Some(acc.finish()?) };
    Ok(StatsOutcome {
        curve,
        fields,
        failures,
    })
}

struct DatasetContext {
    objects: ObjectLibrary,
    backgrounds: HashMap<String, PathBuf>,
}

/// Resolves a path recorded in a dataset config: absolute or relative to
/// the working directory as written, else relative to the dataset.
fn resolve(dataset: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() || p.exists() {
        p.to_path_buf()
    } else {
        dataset.join(p)
    }
}

fn dataset_context(dir: &Path) -> Result<(DatasetContext, Vec<ManifestRecord>)> {
    let config_path = dir.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    let value = serde_json::from_str(&text).map_err(|e| Error::malformed(&config_path, e.to_string()))?;
    let mut config = SynthConfig::from_provenance(value)?;
    config.background_dir = resolve(dir, &config.background_dir);
    config.object_dir = resolve(dir, &config.object_dir);
    let objects = load_objects(&config.object_dir)?;
    let backgrounds = list_pngs(&config.background_dir)?
        .into_iter()
        .map(|p| (file_id(&p), p))
        .collect();
    let records = read_manifest(&dir.join(MANIFEST_FILE))?;
    Ok((
        DatasetContext {
            objects,
            backgrounds,
        },
        records,
    ))
}

impl DatasetContext {
    fn metadata(&self, r: &ManifestRecord) -> Result<SampleMetadata> {
        let index = |id: &str| {
            self.objects
                .index_of(id)
                .ok_or_else(|| Error::Input(format!("unknown object {id}")))
        };
        let moving = r
            .moving
            .iter()
            .map(|m| {
                Ok(MovingRecord {
                    object: index(&m.object_id)?,
                    trajectory: m.trajectory.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let statics = r
            .statics
            .iter()
            .map(|m| {
                Ok(StaticRecord {
                    object: index(&m.object_id)?,
                    pose: m.pose,
                })
            })
            .collect::<Result<_>>()?;
        let missing = |what: &str| Error::Input(format!("record {} has no {what}", r.index));
        Ok(SampleMetadata {
            seed: r.seed,
            attempt_seed: r.attempt_seed.unwrap_or(r.seed),
            attempts: r.attempts,
            frame_count: r.frame_count.ok_or_else(|| missing("L"))?,
            rescale: r.rescale.ok_or_else(|| missing("rescale"))?,
            moving,
            statics,
        })
    }

    fn scene(&self, r: &ManifestRecord) -> Result<SceneSpec> {
        let id = r.background_id.as_deref().unwrap_or_default();
        let path = self
            .backgrounds
            .get(id)
            .ok_or_else(|| Error::Input(format!("unknown background {id}")))?;
        let background = read_image(path)?;
        self.metadata(r)?.scene(&background, &self.objects.patches)
    }
}

/// First and last frame of a `window`-frame span centered on the middle
/// frame of a `frames`-frame sequence.
pub(crate) fn window_pair(frames: usize, window: usize) -> (usize, usize) {
    let w = window.min(frames);
    let start = (frames / 2).saturating_sub((w - 1) / 2).min(frames - w);
    (start, start + w - 1)
}

fn dataset_flows(dir: &Path, cmd: &StatsCommand) -> Result<Vec<Item>> {
    let (ctx, records) = dataset_context(dir)?;
    let usable: Vec<&ManifestRecord> = records.iter().filter(|r| r.status == SampleStatus::Ok).collect();
    with_pool(cmd.worker_count, || {
        usable
            .par_iter()
            .map(|r| {
                let flow = ctx.scene(r).and_then(|scene| {
                    let (a, b) = window_pair(scene.frame_count(), cmd.window);
                    match cmd.source {
                        FlowSource::GroundTruth => ground_truth_flow(&scene, a, b),
                        FlowSource::Estimated => {
                            let renderer = SceneRenderer::new(&scene)?;
                            let fa = renderer.render(a)?.image;
                            let fb = renderer.render(b)?.image;
                            estimate_flow(&fa, &fb, &cmd.flow)
                        }
                    }
                });
                (r.name.clone(), flow)
            })
            .collect()
    })
}

fn pair_list_flows(list: &Path, cmd: &StatsCommand) -> Result<Vec<Item>> {
    let text = std::fs::read_to_string(list).map_err(|e| Error::io(list, e))?;
    let base = list.parent().unwrap_or(Path::new("."));
    let lines: Vec<(usize, Vec<PathBuf>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| (n + 1, l.split_whitespace().map(|p| base.join(p)).collect()))
        .collect();
    with_pool(cmd.worker_count, || {
        lines
            .par_iter()
            .map(|(n, paths)| {
                let name = match paths.first() {
                    Some(p) => format!("{:04}_{}", n, file_id(p)),
                    None => format!("{n:04}"),
                };
                let flow = match paths.as_slice() {
                    [first, .., last] => read_image(first)
                        .and_then(|a| read_image(last).map(|b| (a, b)))
                        .and_then(|(a, b)| estimate_flow(&a, &b, &cmd.flow)),
                    _ => Err(Error::Input(format!("line {n}: a sequence needs two or more images"))),
                };
                (name, flow)
            })
            .collect()
    })
}
