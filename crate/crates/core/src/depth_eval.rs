//! Depth accuracy against ground truth: MAE and RMSE over pixels valid in both maps.

use crate::depth_map::{sparsity, DepthMap};
use crate::error::{Error, Result};

/// Ignores the top `top_ignore_fraction` of image rows.
///
/// Rows `floor(height * fraction)..height` are evaluated. Learned depth maps
/// are usually scored with 0.3 since their upper region has no LiDAR support.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalCrop {
    top_ignore_fraction: f64,
}

impl EvalCrop {
    pub const LEARNED_MAP_TOP_IGNORE: f64 = 0.30;

    pub fn new(top_ignore_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&top_ignore_fraction) {
            return Err(Error::InvalidConfig(format!(
                "crop fraction {top_ignore_fraction} outside [0, 1)"
            )));
        }
        Ok(EvalCrop {
            top_ignore_fraction,
        })
    }

    pub fn full() -> Self {
        EvalCrop::default()
    }

    pub fn top_ignore_fraction(&self) -> f64 {
        self.top_ignore_fraction
    }

    pub fn first_row(&self, height: u32) -> u32 {
        (height as f64 * self.top_ignore_fraction).floor() as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthErrorReport {
    pub mae: f64,
    pub rmse: f64,
    pub evaluated_pixels: usize,
    /// Evaluated pixels over ground-truth-valid pixels inside the crop.
    pub gt_coverage: f64,
    /// Sparsity of the whole prediction, crop not applied.
    pub pred_sparsity: f64,
}

/// Running sums for one frame or many.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorSums {
    pub abs: f64,
    pub sq: f64,
    pub count: usize,
    pub gt_valid: usize,
}

impl ErrorSums {
    fn merge(&mut self, other: &ErrorSums) {
        self.abs += other.abs;
        self.sq += other.sq;
        self.count += other.count;
        self.gt_valid += other.gt_valid;
    }
}

pub fn error_sums(pred: &DepthMap, gt: &DepthMap, crop: &EvalCrop) -> Result<ErrorSums> {
    if pred.dims() != gt.dims() {
        return Err(Error::Shape(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let start = crop.first_row(gt.height()) as usize * gt.width() as usize;
    let mut sums = ErrorSums::default();
    for (&p, &g) in pred.as_slice()[start..].iter().zip(&gt.as_slice()[start..]) {
        if g <= 0.0 {
            continue;
        }
        sums.gt_valid += 1;
        if p <= 0.0 {
            continue;
        }
        let e = p as f64 - g as f64;
        sums.abs += e.abs();
        sums.sq += e * e;
        sums.count += 1;
    }
    Ok(sums)
}

fn report_from(sums: &ErrorSums, pred_sparsity: f64) -> Result<DepthErrorReport> {
    if sums.count == 0 {
        return Err(Error::EmptyEvaluation(
            "no pixel is valid in both prediction and ground truth".into(),
        ));
    }
    let n = sums.count as f64;
    Ok(DepthErrorReport {
        mae: sums.abs / n,
        rmse: (sums.sq / n).sqrt(),
        evaluated_pixels: sums.count,
        gt_coverage: n / sums.gt_valid as f64,
        pred_sparsity,
    })
}

/// Scores `pred` against `gt` on pixels inside `crop` that are valid in both.
pub fn eval_depth(pred: &DepthMap, gt: &DepthMap, crop: &EvalCrop) -> Result<DepthErrorReport> {
    let sums = error_sums(pred, gt, crop)?;
    report_from(&sums, sparsity(pred))
}

/// Sequence-level aggregation of per-frame results.
#[derive(Clone, Debug, Default)]
pub struct DepthEvalAccumulator {
    pooled: ErrorSums,
    frames: Vec<DepthErrorReport>,
}

impl DepthEvalAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one frame and returns its report.
    pub fn add(
        &mut self,
        pred: &DepthMap,
        gt: &DepthMap,
        crop: &EvalCrop,
    ) -> Result<DepthErrorReport> {
        let sums = error_sums(pred, gt, crop)?;
        let report = report_from(&sums, sparsity(pred))?;
        self.pooled.merge(&sums);
        self.frames.push(report);
        Ok(report)
    }

    pub fn frames(&self) -> &[DepthErrorReport] {
        &self.frames
    }

    /// Metrics over all evaluated pixels of all frames, each pixel weighted equally.
    pub fn pooled(&self) -> Result<DepthErrorReport> {
        let mean_sparsity = self.mean_of(|r| r.pred_sparsity);
        report_from(&self.pooled, mean_sparsity)
    }

    /// Unweighted mean of per-frame MAE and RMSE.
    pub fn frame_mean(&self) -> Result<(f64, f64)> {
        if self.frames.is_empty() {
            return Err(Error::EmptyEvaluation("no frames evaluated".into()));
        }
        Ok((self.mean_of(|r| r.mae), self.mean_of(|r| r.rmse)))
    }

    fn mean_of(&self, f: impl Fn(&DepthErrorReport) -> f64) -> f64 {
        if self.frames.is_empty() {
            return f64::NAN;
        }
        self.frames.iter().map(f).sum::<f64>() / self.frames.len() as f64
    }
}
