use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::SynthConfig;
use super::dataset::{file_id, list_pngs, load_objects, ObjectLibrary, BLUR_DIR, CONFIG_FILE, MANIFEST_FILE, MASK_DIR, SHARP_DIR};
use super::manifest::{write_manifest, ManifestRecord, MovingEntry, SampleStatus, StaticEntry};
use super::with_pool;
use crate::error::{Error, Result};
use crate::io::{read_image, write_image, write_mask};
use crate::synth::{derive_seed, synthesize_sample, SynthParams, SyntheticSample};

/// Stream index reserved for the background draw; attempt seeds use small
/// indices so the two never collide.
const BACKGROUND_STREAM: u64 = u64::MAX;

pub fn sample_name(index: usize) -> String {
    format!("{index:06}")
}

/// Which background sample `seed` uses out of `count`.
pub fn background_index(seed: u64, count: usize) -> usize {
    (derive_seed(seed, BACKGROUND_STREAM) % count as u64) as usize
}

#[derive(Debug, Clone)]
pub struct SynthOutcome {
    pub output_dir: PathBuf,
    pub records: Vec<ManifestRecord>,
}

impl SynthOutcome {
    pub fn written(&self) -> usize {
        self.records.iter().filter(|r| r.status == SampleStatus::Ok).count()
    }

    pub fn skipped(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.status == SampleStatus::Skipped)
            .map(|r| r.index)
            .collect()
    }
}

/// Synthesizes `sample_count` samples into `output_dir`. Configuration and
/// input problems are reported before anything is written; per-sample
/// failures are recorded in the manifest as skipped.
pub fn run_synth(cfg: &SynthConfig) -> Result<SynthOutcome> {
    cfg.validate()?;
    let params = cfg.params();
    let objects = load_objects(&cfg.object_dir)?;
    if objects.len() < params.objects_needed() {
        return Err(Error::Config(format!(
            "{} holds {} objects, {} needed per sample",
            cfg.object_dir.display(),
            objects.len(),
            params.objects_needed()
        )));
    }
    let backgrounds = list_pngs(&cfg.background_dir)?;
    if backgrounds.is_empty() {
        return Err(Error::Config(format!("no backgrounds in {}", cfg.background_dir.display())));
    }

    let out = &cfg.output_dir;
    for sub in [BLUR_DIR, SHARP_DIR, MASK_DIR] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let job = Job {
        params: &params,
        objects: &objects,
        backgrounds: &backgrounds,
        master_seed: cfg.master_seed,
        out,
    };
    let records: Vec<ManifestRecord> =
        with_pool(cfg.worker_count, || (0..cfg.sample_count).into_par_iter().map(|i| job.run(i)).collect())?;

    write_manifest(&out.join(MANIFEST_FILE), &records)?;
    let config_path = out.join(CONFIG_FILE);
    let text = serde_json::to_string_pretty(&cfg.provenance()).expect("config serializes");
    std::fs::write(&config_path, text + "\n").map_err(|e| Error::io(&config_path, e))?;
    Ok(SynthOutcome {
        output_dir: out.clone(),
        records,
    })
}

struct Job<'a> {
    params: &'a SynthParams,
    objects: &'a ObjectLibrary,
    backgrounds: &'a [PathBuf],
    master_seed: u64,
    out: &'a Path,
}

impl Job<'_> {
    fn run(&self, index: usize) -> ManifestRecord {
        let seed = derive_seed(self.master_seed, index as u64);
        let name = sample_name(index);
        let bg_path = &self.backgrounds[background_index(seed, self.backgrounds.len())];
        let result = read_image(bg_path)
            .and_then(|bg| synthesize_sample(&bg, &self.objects.patches, seed, self.params))
            .and_then(|s| self.write(&name, &s).map(|_| s));
        match result {
            Ok(sample) => self.record(index, name, file_id(bg_path), &sample),
            Err(e) => ManifestRecord {
                index,
                name,
                seed,
                status: SampleStatus::Skipped,
                frame_count: None,
                background_id: Some(file_id(bg_path)),
                object_ids: Vec::new(),
                moving: Vec::new(),
                statics: Vec::new(),
                rescale: None,
                attempt_seed: None,
                attempts: attempts_of(&e),
                error: Some(e.to_string()),
            },
        }
    }

    fn write(&self, name: &str, s: &SyntheticSample) -> Result<()> {
        let file = format!("{name}.png");
        write_image(self.out.join(BLUR_DIR).join(&file), &s.blurred)?;
        write_image(self.out.join(SHARP_DIR).join(&file), &s.sharp)?;
        write_mask(self.out.join(MASK_DIR).join(&file), s.mask(self.params.mask_mode))
    }

    fn record(&self, index: usize, name: String, background_id: String, s: &SyntheticSample) -> ManifestRecord {
        let m = &s.metadata;
        let id = |k: usize| self.objects.ids[k].clone();
        ManifestRecord {
            index,
            name,
            seed: m.seed,
            status: SampleStatus::Ok,
            frame_count: Some(m.frame_count),
            background_id: Some(background_id),
            object_ids: m.moving.iter().map(|r| r.object).chain(m.statics.iter().map(|r| r.object)).map(id).collect(),
            moving: m
                .moving
                .iter()
                .map(|r| MovingEntry {
                    object_id: id(r.object),
                    trajectory: r.trajectory.clone(),
                })
                .collect(),
            statics: m
                .statics
                .iter()
                .map(|r| StaticEntry {
                    object_id: id(r.object),
                    pose: r.pose,
                })
                .collect(),
            rescale: Some(m.rescale),
            attempt_seed: Some(m.attempt_seed),
            attempts: m.attempts,
            error: None,
        }
    }
}

fn attempts_of(e: &Error) -> u32 {
    match e {
        Error::DegenerateScene(_) => crate::synth::MAX_ATTEMPTS,
        _ => 0,
    }
}
