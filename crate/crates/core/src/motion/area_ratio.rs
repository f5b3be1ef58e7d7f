use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

use super::MotionField;

/// `0.0, 0.1, ..., 5.0`.
pub fn default_thresholds() -> Vec<f64> {
    (0..=50).map(|i| i as f64 / 10.0).collect()
}

/// Fraction of pixels whose flow norm is strictly greater than `threshold`.
pub fn blurred_area_ratio(flow: &MotionField, threshold: f64) -> f64 {
    let n = flow.width() * flow.height();
    let count = flow.norms().into_iter().filter(|&m| m > threshold).count();
    count as f64 / n as f64
}

/// How several fields combine into one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    /// Mean of the per-field ratios.
    #[default]
    Mean,
    /// One ratio over all pixels of all fields.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaRatioCurve {
    thresholds: Vec<f64>,
    ratios: Vec<f64>,
}

impl AreaRatioCurve {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn ratio_at(&self, threshold: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&t| (t - threshold).abs() < 1e-9)
            .map(|i| self.ratios[i])
    }

    pub fn is_non_increasing(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] <= w[0])
    }

    /// Largest absolute ratio difference at thresholds `>= from`.
    pub fn max_gap(&self, other: &AreaRatioCurve, from: f64) -> Result<f64> {
        if self.thresholds != other.thresholds {
            return Err(Error::Input("curves use different threshold grids".into()));
        }
        Ok(self
            .thresholds
            .iter()
            .zip(self.ratios.iter().zip(&other.ratios))
            .filter(|(t, _)| **t >= from)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `threshold,ratio` header plus one row per point, 6 decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,ratio\n");
        for (t, r) in self.thresholds.iter().zip(&self.ratios) {
            writeln!(s, "{t:.6},{r:.6}").unwrap();
        }
        s
    }
}

pub fn area_ratio_curve(flows: &[MotionField], thresholds: &[f64]) -> Result<AreaRatioCurve> {
    area_ratio_curve_with(flows, thresholds, CurveMode::Mean)
}

pub fn area_ratio_curve_with(
    flows: &[MotionField],
    thresholds: &[f64],
    mode: CurveMode,
) -> Result<AreaRatioCurve> {
    let mut acc = RatioAccumulator::new(thresholds, mode)?;
    for f in flows {
        acc.add(f);
    }
    acc.finish()
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Input("no thresholds".into()));
    }
    if thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Input("thresholds must be finite and non-negative".into()));
    }
    if thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("thresholds must be strictly ascending".into()));
    }
    Ok(())
}

/// Builds a curve one field at a time, keeping only per-threshold counts.
#[derive(Debug, Clone)]
pub struct RatioAccumulator {
    thresholds: Vec<f64>,
    mode: CurveMode,
    // per-field ratios for Mean, exceedance counts for Pooled
    field_ratios: Vec<Vec<f64>>,
    counts: Vec<u64>,
    pixels: u64,
}

impl RatioAccumulator {
    pub fn new(thresholds: &[f64], mode: CurveMode) -> Result<Self> {
        check_thresholds(thresholds)?;
        Ok(RatioAccumulator {
            thresholds: thresholds.to_vec(),
            mode,
            field_ratios: vec![Vec::new(); thresholds.len()],
            counts: vec![0; thresholds.len()],
            pixels: 0,
        })
    }

    /// Exceedance counts of one field at each threshold.
    fn field_counts(&self, flow: &MotionField) -> Vec<u64> {
        let mut norms = flow.norms();
        norms.sort_by(f64::total_cmp);
        self.thresholds
            .iter()
            .map(|&t| (norms.len() - norms.partition_point(|&m| m <= t)) as u64)
            .collect()
    }

    /// The curve of `flow` alone.
    pub fn field_curve(&self, flow: &MotionField) -> AreaRatioCurve {
        let n = (flow.width() * flow.height()) as f64;
        AreaRatioCurve {
            thresholds: self.thresholds.clone(),
            ratios: self.field_counts(flow).into_iter().map(|c| c as f64 / n).collect(),
        }
    }

    pub fn add(&mut self, flow: &MotionField) {
        let n = (flow.width() * flow.height()) as u64;
        let counts = self.field_counts(flow);
        for (k, c) in counts.into_iter().enumerate() {
            self.field_ratios[k].push(c as f64 / n as f64);
            self.counts[k] += c;
        }
        self.pixels += n;
    }

    pub fn fields(&self) -> usize {
        self.field_ratios[0].len()
    }

    pub fn finish(self) -> Result<AreaRatioCurve> {
        let fields = self.fields();
        if fields == 0 {
            return Err(Error::Input("no flow fields".into()));
        }
        let ratios = match self.mode {
            CurveMode::Mean => self.field_ratios.iter().map(|r| pairwise_sum(r) / fields as f64).collect(),
            CurveMode::Pooled => self.counts.iter().map(|&c| c as f64 / self.pixels as f64).collect(),
        };
        Ok(AreaRatioCurve {
            thresholds: self.thresholds,
            ratios,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(blurred_area_ratio(&MotionField::zeros(8, 8), 0.0), 0.0);
        let quarter = MotionField::from_fn(8, 8, |x, _| if x < 2 { [3.0, 0.0] } else { [0.0, 0.0] }).unwrap();
        assert_eq!(blurred_area_ratio(&quarter, 1.0), 0.25);
        let two = MotionField::uniform(4, 4, 1.2, 1.6);
        assert_eq!(blurred_area_ratio(&two, 1.99), 1.0);
        assert_eq!(blurred_area_ratio(&two, 2.01), 0.0);
    }

    #[test]
    fn default_grid() {
        let t = default_thresholds();
        assert_eq!(t.len(), 51);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[19], 1.9);
        assert_eq!(t[20], 2.0);
        assert_eq!(t[50], 5.0);
    }

    #[test]
    fn curve_examples() {
        let grid = default_thresholds();
        let c = area_ratio_curve(&[MotionField::zeros(5, 5)], &grid).unwrap();
        assert!(c.ratios().iter().all(|&r| r == 0.0));

        let c = area_ratio_curve(&[MotionField::uniform(5, 5, 2.0, 0.0)], &grid).unwrap();
        for (t, r) in c.thresholds().iter().zip(c.ratios()) {
            assert_eq!(*r, if *t < 2.0 { 1.0 } else { 0.0 }, "t = {t}");
        }
        assert_eq!(c.ratio_at(1.9), Some(1.0));
        assert_eq!(c.ratio_at(2.0), Some(0.0));

        let a = MotionField::from_fn(4, 4, |x, _| [if x == 0 { 1.0 } else { 0.0 }, 0.0]).unwrap();
        let b = MotionField::uniform(4, 4, 1.0, 0.0);
        let c = area_ratio_curve(&[a.clone(), b.clone()], &[0.5]).unwrap();
        assert_eq!(c.ratios()[0], (0.25 + 1.0) / 2.0);
        let big = MotionField::uniform(8, 8, 1.0, 0.0);
        let pooled = area_ratio_curve_with(&[a, big], &[0.5], CurveMode::Pooled).unwrap();
        assert_eq!(pooled.ratios()[0], (4.0 + 64.0) / 80.0);
    }

    #[test]
    fn curve_errors_and_csv() {
        assert!(area_ratio_curve(&[], &[0.0]).is_err());
        let f = MotionField::zeros(2, 2);
        assert!(area_ratio_curve(std::slice::from_ref(&f), &[0.2, 0.1]).is_err());
        let c = area_ratio_curve(&[f], &[0.0, 0.1]).unwrap();
        assert_eq!(c.to_csv(), "threshold,ratio\n0.000000,0.000000\n0.100000,0.000000\n");
    }

    proptest! {
        #[test]
        fn curves_are_monotone(values in proptest::collection::vec((-6.0f64..6.0, -6.0f64..6.0), 1..80), pooled: bool) {
            let n = values.len();
            let f1 = MotionField::new(n, 1, values.iter().map(|p| p.0).collect(), values.iter().map(|p| p.1).collect()).unwrap();
            let f2 = f1.negated();
            let mode = if pooled { CurveMode::Pooled } else { CurveMode::Mean };
            let c = area_ratio_curve_with(&[f1, f2], &default_thresholds(), mode).unwrap();
            prop_assert!(c.is_non_increasing());
            prop_assert!(c.ratios().iter().all(|r| (0.0..=1.0).contains(r)));
        }
    }
}
