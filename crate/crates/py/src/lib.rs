//! Python module `pylocblur`.

use std::path::PathBuf;

use locblur::metrics::{self, LossWeights, PeakMode};
use locblur::motion::{self, CurveMode, FlowParams};
use locblur::pipeline::{self, FlowSource, StatsCommand, StatsInput, SynthConfig};
use locblur::synth::{self, ObjectPatch, SynthParams};
use locblur::{crf, io, Error, ProbabilityMap};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn peak_mode(peak: &str) -> PyResult<PeakMode> {
    match peak {
        "unit" => Ok(PeakMode::Unit),
        "8bit" => Ok(PeakMode::EightBit),
        other => Err(PyValueError::new_err(format!("peak must be 'unit' or '8bit', got {other:?}"))),
    }
}

/// Display-encoded RGB image with interleaved samples in [0, 1].
#[pyclass(name = "SrgbImage", module = "pylocblur", frozen)]
struct PySrgbImage(locblur::SrgbImage);

#[pymethods]
impl PySrgbImage {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        locblur::SrgbImage::new(width, height, data).map(Self).map_err(err)
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self(locblur::SrgbImage::filled(width, height, rgb))
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_image(path).map(Self).map_err(err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_image(path, &self.0).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn pixel(&self, x: usize, y: usize) -> PyResult<[f64; 3]> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err("pixel out of range"));
        }
        Ok(self.0.pixel(x, y))
    }

    fn to_list(&self) -> Vec<f64> {
        self.0.data().to_vec()
    }

    fn luma(&self) -> Vec<f64> {
        self.0.to_luma().into_data()
    }

    fn __repr__(&self) -> String {
        format!("SrgbImage({}x{})", self.0.width(), self.0.height())
    }
}

/// Per-pixel alpha in [0, 1].
#[pyclass(name = "AlphaMask", module = "pylocblur", frozen)]
struct PyAlphaMask(locblur::AlphaMask);

#[pymethods]
impl PyAlphaMask {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        locblur::AlphaMask::new(width, height, data).map(Self).map_err(err)
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_mask(path).map(Self).map_err(err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_mask(path, &self.0).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn count_set(&self) -> usize {
        self.0.count_set()
    }

    fn is_subset_of(&self, other: PyRef<'_, PyAlphaMask>) -> bool {
        self.0.is_subset_of(&other.0)
    }

    fn to_list(&self) -> Vec<f64> {
        self.0.plane().data().to_vec()
    }
}

/// Dense per-pixel displacement field.
#[pyclass(name = "MotionField", module = "pylocblur", frozen)]
struct PyMotionField(motion::MotionField);

#[pymethods]
impl PyMotionField {
    #[new]
    fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        motion::MotionField::new(width, height, u, v).map(Self).map_err(err)
    }

    #[staticmethod]
    fn uniform(width: usize, height: usize, u: f64, v: f64) -> Self {
        Self(motion::MotionField::uniform(width, height, u, v))
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        motion::MotionField::read(&path).map(Self).map_err(err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.0.write(&path).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.0.v().to_vec()
    }

    fn max_norm(&self) -> f64 {
        self.0.max_norm()
    }
}

#[pyclass(name = "AreaRatioCurve", module = "pylocblur", frozen)]
struct PyAreaRatioCurve(motion::AreaRatioCurve);

#[pymethods]
impl PyAreaRatioCurve {
    #[getter]
    fn thresholds(&self) -> Vec<f64> {
        self.0.thresholds().to_vec()
    }

    #[getter]
    fn ratios(&self) -> Vec<f64> {
        self.0.ratios().to_vec()
    }

    fn ratio_at(&self, threshold: f64) -> Option<f64> {
        self.0.ratio_at(threshold)
    }

    fn is_non_increasing(&self) -> bool {
        self.0.is_non_increasing()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

#[pyfunction]
#[pyo3(signature = (x, gamma = crf::DEFAULT_GAMMA))]
fn crf_encode(x: f64, gamma: f64) -> f64 {
    crf::encode(x, gamma)
}

#[pyfunction]
#[pyo3(signature = (y, gamma = crf::DEFAULT_GAMMA))]
fn crf_decode(y: f64, gamma: f64) -> f64 {
    crf::decode(y, gamma)
}

#[pyfunction]
#[pyo3(signature = (frames, gamma = crf::DEFAULT_GAMMA))]
fn average_frames(frames: Vec<PyRef<'_, PySrgbImage>>, gamma: f64) -> PyResult<PySrgbImage> {
    let frames: Vec<locblur::SrgbImage> = frames.iter().map(|f| f.0.clone()).collect();
    synth::average_frames(&frames, gamma).map(PySrgbImage).map_err(err)
}

#[pyfunction]
fn derive_seed(master: u64, index: u64) -> u64 {
    synth::derive_seed(master, index)
}

/// Returns `(blurred, sharp, mask_union, mask_mid, frame_count)`.
#[pyfunction]
#[pyo3(signature = (background, objects, seed, moving_count = 2, static_count = 2))]
fn synthesize_sample(
    background: PyRef<'_, PySrgbImage>,
    objects: Vec<(PyRef<'_, PySrgbImage>, PyRef<'_, PyAlphaMask>)>,
    seed: u64,
    moving_count: usize,
    static_count: usize,
) -> PyResult<(PySrgbImage, PySrgbImage, PyAlphaMask, PyAlphaMask, usize)> {
    let pool = objects
        .iter()
        .map(|(i, m)| ObjectPatch::new(i.0.clone(), m.0.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let params = SynthParams {
        moving_count,
        static_count,
        ..SynthParams::default()
    };
    let s = synth::synthesize_sample(&background.0, &pool, seed, &params).map_err(err)?;
    let l = s.frame_count();
    Ok((
        PySrgbImage(s.blurred),
        PySrgbImage(s.sharp),
        PyAlphaMask(s.mask_union),
        PyAlphaMask(s.mask_mid),
        l,
    ))
}

#[pyfunction]
#[pyo3(signature = (frame_a, frame_b, alpha = 10.0, iterations = 100, levels = 4, scale = 0.5))]
fn estimate_flow(
    frame_a: PyRef<'_, PySrgbImage>,
    frame_b: PyRef<'_, PySrgbImage>,
    alpha: f64,
    iterations: usize,
    levels: usize,
    scale: f64,
) -> PyResult<PyMotionField> {
    let p = FlowParams {
        alpha,
        iterations,
        levels,
        scale,
        ..FlowParams::default()
    };
    motion::estimate_flow(&frame_a.0, &frame_b.0, &p).map(PyMotionField).map_err(err)
}

#[pyfunction]
fn blurred_area_ratio(flow: PyRef<'_, PyMotionField>, threshold: f64) -> f64 {
    motion::blurred_area_ratio(&flow.0, threshold)
}

#[pyfunction]
#[pyo3(signature = (flows, thresholds = None, pooled = false))]
fn area_ratio_curve(
    flows: Vec<PyRef<'_, PyMotionField>>,
    thresholds: Option<Vec<f64>>,
    pooled: bool,
) -> PyResult<PyAreaRatioCurve> {
    let flows: Vec<motion::MotionField> = flows.iter().map(|f| f.0.clone()).collect();
    let thresholds = thresholds.unwrap_or_else(motion::default_thresholds);
    let mode = if pooled { CurveMode::Pooled } else { CurveMode::Mean };
    motion::area_ratio_curve_with(&flows, &thresholds, mode)
        .map(PyAreaRatioCurve)
        .map_err(err)
}

#[pyfunction]
fn mse(a: PyRef<'_, PySrgbImage>, b: PyRef<'_, PySrgbImage>) -> PyResult<f64> {
    metrics::mse(&a.0, &b.0, None).map_err(err)
}

/// PSNR in dB; `inf` when the images are identical.
#[pyfunction]
#[pyo3(signature = (a, b, peak = "unit"))]
fn psnr(a: PyRef<'_, PySrgbImage>, b: PyRef<'_, PySrgbImage>, peak: &str) -> PyResult<f64> {
    metrics::psnr_with(&a.0, &b.0, None, peak_mode(peak)?).map_err(err)
}

#[pyfunction]
fn ssim(a: PyRef<'_, PySrgbImage>, b: PyRef<'_, PySrgbImage>) -> PyResult<f64> {
    metrics::ssim(&a.0, &b.0, None).map_err(err)
}

fn probability(width: usize, height: usize, values: Vec<f64>) -> PyResult<ProbabilityMap> {
    ProbabilityMap::new(width, height, values).map_err(err)
}

#[pyfunction]
fn dice_loss(pred: Vec<f64>, gt: PyRef<'_, PyAlphaMask>) -> PyResult<f64> {
    let p = probability(gt.0.width(), gt.0.height(), pred)?;
    metrics::dice_loss(&p, &gt.0).map_err(err)
}

#[pyfunction]
fn bce_loss(pred: Vec<f64>, gt: PyRef<'_, PyAlphaMask>) -> PyResult<f64> {
    let p = probability(gt.0.width(), gt.0.height(), pred)?;
    metrics::bce_loss(&p, &gt.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (l_mse, l_perception, l_attention, weights = (1.0, 0.25, 0.01)))]
fn combined_loss(l_mse: f64, l_perception: f64, l_attention: f64, weights: (f64, f64, f64)) -> PyResult<f64> {
    let w = LossWeights::new(weights.0, weights.1, weights.2).map_err(err)?;
    Ok(metrics::combined_loss(l_mse, l_perception, l_attention, &w))
}

/// Runs dataset synthesis from a JSON config; returns the number written.
#[pyfunction]
fn synth_dataset(config_json: &str) -> PyResult<usize> {
    let cfg = SynthConfig::from_json_str(config_json).map_err(err)?;
    pipeline::run_synth(&cfg).map(|o| o.written()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (dataset, mode = "ground-truth", pooled = false))]
fn dataset_stats(dataset: PathBuf, mode: &str, pooled: bool) -> PyResult<PyAreaRatioCurve> {
    let source = match mode {
        "ground-truth" => FlowSource::GroundTruth,
        "estimated" => FlowSource::Estimated,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let mut cmd = StatsCommand::new(StatsInput::Dataset(dataset), source);
    if pooled {
        cmd.mode = CurveMode::Pooled;
    }
    let out = pipeline::run_stats(&cmd).map_err(err)?;
    out.curve
        .map(PyAreaRatioCurve)
        .ok_or_else(|| PyValueError::new_err("no usable samples"))
}

/// Scores matching images in two directories; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (pred_dir, gt_dir, flow_dir = None, threshold = 0.25, peak = "unit"))]
fn evaluate_dirs(
    pred_dir: PathBuf,
    gt_dir: PathBuf,
    flow_dir: Option<PathBuf>,
    threshold: f64,
    peak: &str,
) -> PyResult<String> {
    let mut cmd = pipeline::EvalCommand::new(pred_dir, gt_dir);
    cmd.flow_dir = flow_dir;
    cmd.threshold = threshold;
    cmd.options.peak = peak_mode(peak)?;
    pipeline::run_eval(&cmd).map(|o| o.to_json()).map_err(err)
}

#[pymodule]
fn pylocblur(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySrgbImage>()?;
    m.add_class::<PyAlphaMask>()?;
    m.add_class::<PyMotionField>()?;
    m.add_class::<PyAreaRatioCurve>()?;
    m.add_function(wrap_pyfunction!(crf_encode, m)?)?;
    m.add_function(wrap_pyfunction!(crf_decode, m)?)?;
    m.add_function(wrap_pyfunction!(average_frames, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_sample, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_flow, m)?)?;
    m.add_function(wrap_pyfunction!(blurred_area_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(area_ratio_curve, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(dice_loss, m)?)?;
    m.add_function(wrap_pyfunction!(bce_loss, m)?)?;
    m.add_function(wrap_pyfunction!(combined_loss, m)?)?;
    m.add_function(wrap_pyfunction!(synth_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_stats, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_dirs, m)?)?;
    Ok(())
}
