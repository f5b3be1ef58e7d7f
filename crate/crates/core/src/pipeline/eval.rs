use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{file_id, list_pngs};
use super::with_pool;
use crate::error::{Error, Result};
use crate::io::read_image;
use crate::metrics::{db_value, evaluate, stratified_eval_with, EvalOptions, EvalReport, PeakMode, DEFAULT_STRATIFY_THRESHOLD};
use crate::motion::MotionField;
use crate::sum::pairwise_sum;

/// How the aggregate is formed.
pub const AVERAGING: &str = "per-image-then-average";

#[derive(Debug, Clone)]
pub struct EvalCommand {
    pub pred_dir: PathBuf,
    pub gt_dir: PathBuf,
    /// Directory of `<stem>.flo` fields for stratified metrics.
    pub flow_dir: Option<PathBuf>,
    pub threshold: f64,
    pub options: EvalOptions,
    pub worker_count: usize,
}

impl EvalCommand {
    pub fn new(pred_dir: impl Into<PathBuf>, gt_dir: impl Into<PathBuf>) -> Self {
        EvalCommand {
            pred_dir: pred_dir.into(),
            gt_dir: gt_dir.into(),
            flow_dir: None,
            threshold: DEFAULT_STRATIFY_THRESHOLD,
            options: EvalOptions::default(),
            worker_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResult {
    pub name: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub count: usize,
    #[serde(with = "db_value")]
    pub psnr: f64,
    pub ssim: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_db")]
    pub low_motion_psnr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_motion_ssim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_db")]
    pub high_motion_psnr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_motion_ssim: Option<f64>,
    pub averaging: String,
    pub peak: PeakMode,
}

mod opt_db {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Db(#[serde(with = "crate::metrics::db_value")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Db).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Db>::deserialize(d)?.map(|Db(v)| v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub images: Vec<ImageResult>,
    /// Absent when no pair could be scored.
    pub aggregate: Option<AggregateMetrics>,
    /// File names present in only one of the two directories.
    pub unmatched: Vec<String>,
    /// Pairs that matched but could not be scored.
    pub failures: Vec<(String, String)>,
}

impl EvalOutcome {
    pub fn is_complete(&self) -> bool {
        self.unmatched.is_empty() && self.failures.is_empty() && self.aggregate.is_some()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let fmt_db = |v: f64| if v.is_finite() { format!("{v:.4}") } else { "inf".into() };
        let mut s = format!("{:<24} {:>10} {:>8}", "image", "psnr", "ssim");
        let stratified = self.images.iter().any(|r| r.report.stratified.is_some());
        if stratified {
            write!(s, " {:>10} {:>10}", "psnr_low", "psnr_high").unwrap();
        }
        s.push('\n');
        let strata_cols = |s: &mut String, low: Option<f64>, high: Option<f64>| {
            let col = |v: Option<f64>| v.map_or("-".to_string(), fmt_db);
            write!(s, " {:>10} {:>10}", col(low), col(high)).unwrap();
        };
        for r in &self.images {
            write!(s, "{:<24} {:>10} {:>8.4}", r.name, fmt_db(r.report.psnr), r.report.ssim).unwrap();
            if stratified {
                let st = r.report.stratified.as_ref();
                strata_cols(
                    &mut s,
                    st.and_then(|x| x.low_motion).map(|m| m.psnr),
                    st.and_then(|x| x.high_motion).map(|m| m.psnr),
                );
            }
            s.push('\n');
        }
        if let Some(a) = &self.aggregate {
            write!(s, "{:<24} {:>10} {:>8.4}", format!("mean ({})", a.count), fmt_db(a.psnr), a.ssim).unwrap();
            if stratified {
                strata_cols(&mut s, a.low_motion_psnr, a.high_motion_psnr);
            }
            s.push('\n');
        }
        s
    }
}

fn names(dir: &Path) -> Result<BTreeSet<String>> {
    Ok(list_pngs(dir)?
        .into_iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect())
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| pairwise_sum(values) / values.len() as f64)
}

fn aggregate(images: &[ImageResult], peak: PeakMode) -> Option<AggregateMetrics> {
    let col = |f: &dyn Fn(&EvalReport) -> Option<f64>| images.iter().filter_map(|r| f(&r.report)).collect::<Vec<_>>();
    let stratum = |high: bool| {
        move |r: &EvalReport| {
            let s = r.stratified.as_ref()?;
            if high {
                s.high_motion
            } else {
                s.low_motion
            }
        }
    };
    Some(AggregateMetrics {
        count: images.len(),
        psnr: mean(&col(&|r| Some(r.psnr)))?,
        ssim: mean(&col(&|r| Some(r.ssim)))?,
        low_motion_psnr: mean(&col(&|r| stratum(false)(r).map(|m| m.psnr))),
        low_motion_ssim: mean(&col(&|r| stratum(false)(r).map(|m| m.ssim))),
        high_motion_psnr: mean(&col(&|r| stratum(true)(r).map(|m| m.psnr))),
        high_motion_ssim: mean(&col(&|r| stratum(true)(r).map(|m| m.ssim))),
        averaging: AVERAGING.into(),
        peak,
    })
}

/// Scores every file name present in both directories.
pub fn run_eval(cmd: &EvalCommand) -> Result<EvalOutcome> {
    if !(cmd.threshold.is_finite() && cmd.threshold >= 0.0) {
        return Err(Error::Config(format!("stratify threshold must be >= 0, got {}", cmd.threshold)));
    }
    for dir in [Some(&cmd.pred_dir), Some(&cmd.gt_dir), cmd.flow_dir.as_ref()].into_iter().flatten() {
        if !dir.is_dir() {
            return Err(Error::Config(format!("{} is not a directory", dir.display())));
        }
    }
    let pred = names(&cmd.pred_dir)?;
    let gt = names(&cmd.gt_dir)?;
    let matched: Vec<&String> = pred.intersection(&gt).collect();
    let unmatched: Vec<String> = pred.symmetric_difference(&gt).cloned().collect();

    let scored: Vec<(String, Result<EvalReport>)> = with_pool(cmd.worker_count, || {
        matched
            .par_iter()
            .map(|name| {
                let report = read_image(cmd.pred_dir.join(name)).and_then(|p| {
                    let g = read_image(cmd.gt_dir.join(name))?;
                    match &cmd.flow_dir {
                        None => evaluate(&p, &g, &cmd.options),
                        Some(dir) => {
                            let flow = MotionField::read(&dir.join(format!("{}.flo", file_id(Path::new(name)))))?;
                            stratified_eval_with(&p, &g, &flow, cmd.threshold, &cmd.options)
                        }
                    }
                });
                ((*name).clone(), report)
            })
            .collect()
    })?;

    let mut images = Vec::new();
    let mut failures = Vec::new();
    for (name, r) in scored {
        match r {
            Ok(report) => images.push(ImageResult { name, report }),
            Err(e) => failures.push((name, e.to_string())),
        }
    }
    Ok(EvalOutcome {
        aggregate: aggregate(&images, cmd.options.peak),
        images,
        unmatched,
        failures,
    })
}
