//! KITTI Odometry drift metrics: translational error in percent and
//! rotational error per distance, averaged over fixed-length path segments.

mod plot;

pub use plot::{plot_trajectory, render_svg, PlotLayout};

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::kitti_io::Trajectory;

pub const DEFAULT_LENGTHS: [f64; 8] = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0];
pub const DEFAULT_FRAME_STEP: usize = 10;

/// How segment endpoints are picked and how errors are normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SegmentConvention {
    /// End frame is the first `j` with `dist(j) - dist(i) >= L`; errors are
    /// divided by that travelled distance. Double precision throughout.
    #[default]
    Travelled,
    /// Arithmetic of the official KITTI `evaluate_odometry` tool: end frame is
    /// the first `j` with `dist(j) > dist(i) + L`, errors are divided by the
    /// nominal `L`, and distances and per-segment errors are single precision.
    Devkit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdometryConfig {
    pub lengths: Vec<f64>,
    pub frame_step: usize,
    pub convention: SegmentConvention,
}

impl Default for OdometryConfig {
    fn default() -> Self {
        OdometryConfig {
            lengths: DEFAULT_LENGTHS.to_vec(),
            frame_step: DEFAULT_FRAME_STEP,
            convention: SegmentConvention::default(),
        }
    }
}

/// Errors of one `(start frame, length)` segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentError {
    pub first_frame: usize,
    pub last_frame: usize,
    pub length: f64,
    /// Translation error over distance (a fraction, not percent).
    pub t_err: f64,
    /// Rotation error over distance, rad/m.
    pub r_err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthError {
    pub length: f64,
    pub t_err: f64,
    pub r_err: f64,
    pub segments: usize,
}

impl LengthError {
    pub fn t_err_percent(&self) -> f64 {
        self.t_err * 100.0
    }

    pub fn r_err_deg_per_100m(&self) -> f64 {
        rad_per_m_to_deg_per_100m(self.r_err)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdometryErrorReport {
    /// One entry per requested length that had at least one segment.
    pub per_length: Vec<LengthError>,
    pub segments: Vec<SegmentError>,
    /// Mean over all segments of translation error over distance (fraction).
    pub avg_t_err: f64,
    /// Mean over all segments, rad/m.
    pub avg_r_err: f64,
}

impl OdometryErrorReport {
    pub fn avg_t_err_percent(&self) -> f64 {
        self.avg_t_err * 100.0
    }

    pub fn avg_r_err_deg_per_100m(&self) -> f64 {
        rad_per_m_to_deg_per_100m(self.avg_r_err)
    }

    pub fn segment_total(&self) -> usize {
        self.segments.len()
    }
}

pub fn rad_per_m_to_deg_per_100m(r: f64) -> f64 {
    r.to_degrees() * 100.0
}

/// Rotation angle of `rot`, with the cosine clamped so slightly
/// non-orthonormal input never yields NaN.
pub fn rotation_angle(rot: &Matrix3<f64>) -> f64 {
    ((rot.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

/// Cumulative path length along the ground-truth positions.
pub fn trajectory_distances(traj: &Trajectory) -> Vec<f64> {
    let mut dist = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    for (i, p) in traj.poses().iter().enumerate() {
        if i > 0 {
            acc += (translation(p) - translation(&traj.poses()[i - 1])).norm();
        }
        dist.push(acc);
    }
    dist
}

fn translation(p: &Matrix4<f64>) -> Vector3<f64> {
    p.fixed_view::<3, 1>(0, 3).into_owned()
}

/// Rotation and translation of `from^-1 * to`.
fn relative_motion(from: &Matrix4<f64>, to: &Matrix4<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let rt = from.fixed_view::<3, 3>(0, 0).transpose();
    (
        rt * to.fixed_view::<3, 3>(0, 0),
        rt * (translation(to) - translation(from)),
    )
}

/// Angle of `a^T b` from the chord `|a - b|_F = 2 sqrt(2) sin(angle / 2)`.
///
/// Equals [`rotation_angle`] of `a^T b` but is exact for `a == b` and well
/// conditioned for small angles, where `acos` of the trace is not.
pub fn rotation_between(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let chord = (a - b).norm() / (2.0 * std::f64::consts::SQRT_2);
    2.0 * chord.min(1.0).asin()
}

fn rigid_inverse(p: &Matrix4<f64>) -> Matrix4<f64> {
    let rt = p.fixed_view::<3, 3>(0, 0).transpose();
    let t = -(rt * translation(p));
    let mut out = Matrix4::identity();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
    out.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
    out
}

/// Evaluates `est` against `gt` over every `frame_step`-th start frame and
/// every configured segment length. No alignment is applied.
pub fn eval_odometry(
    est: &Trajectory,
    gt: &Trajectory,
    cfg: &OdometryConfig,
) -> Result<OdometryErrorReport> {
    if est.len() != gt.len() {
        return Err(Error::Shape(format!(
            "estimate has {} poses, ground truth {}",
            est.len(),
            gt.len()
        )));
    }
    if cfg.frame_step == 0 {
        return Err(Error::InvalidConfig("frame step must be at least 1".into()));
    }
    if cfg.lengths.is_empty() || cfg.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "segment lengths must be positive, got {:?}",
            cfg.lengths
        )));
    }
    let segments = match cfg.convention {
        SegmentConvention::Travelled => travelled_segments(est, gt, cfg),
        SegmentConvention::Devkit => devkit::segments(est, gt, cfg),
    };
    if segments.is_empty() {
        return Err(Error::EmptyEvaluation(format!(
            "trajectory of {} poses is shorter than the shortest segment length",
            gt.len()
        )));
    }
    Ok(match cfg.convention {
        SegmentConvention::Travelled => summarize(segments, &cfg.lengths),
        SegmentConvention::Devkit => devkit::summarize(segments, &cfg.lengths),
    })
}

fn travelled_segments(
    est: &Trajectory,
    gt: &Trajectory,
    cfg: &OdometryConfig,
) -> Vec<SegmentError> {
    let dist = trajectory_distances(gt);
    let (gp, ep) = (gt.poses(), est.poses());
    let mut out = Vec::new();
    for first in (0..gp.len()).step_by(cfg.frame_step) {
        for &length in &cfg.lengths {
            let Some(last) = (first..gp.len()).find(|&j| dist[j] - dist[first] >= length) else {
                continue;
            };
            let travelled = dist[last] - dist[first];
            let (rot_gt, t_gt) = relative_motion(&gp[first], &gp[last]);
            let (rot_est, t_est) = relative_motion(&ep[first], &ep[last]);
            out.push(SegmentError {
                first_frame: first,
                last_frame: last,
                length,
                // |translation(E)| with E = delta_est^-1 * delta_gt
                t_err: (t_gt - t_est).norm() / travelled,
                r_err: rotation_between(&rot_est, &rot_gt) / travelled,
            });
        }
    }
    out
}

fn summarize(segments: Vec<SegmentError>, lengths: &[f64]) -> OdometryErrorReport {
    let n = segments.len() as f64;
    let avg_t_err = segments.iter().map(|s| s.t_err).sum::<f64>() / n;
    let avg_r_err = segments.iter().map(|s| s.r_err).sum::<f64>() / n;
    let per_length = lengths
        .iter()
        .filter_map(|&length| {
            let of_len: Vec<_> = segments.iter().filter(|s| s.length == length).collect();
            if of_len.is_empty() {
                return None;
            }
            let k = of_len.len() as f64;
            Some(LengthError {
                length,
                t_err: of_len.iter().map(|s| s.t_err).sum::<f64>() / k,
                r_err: of_len.iter().map(|s| s.r_err).sum::<f64>() / k,
                segments: of_len.len(),
            })
        })
        .collect();
    OdometryErrorReport {
        per_length,
        segments,
        avg_t_err,
        avg_r_err,
    }
}

mod devkit {
    //! Mirrors the float/double mix of the reference C++ evaluator so results
    //! agree with it to single-precision rounding.

    use super::*;

    fn distances(gt: &Trajectory) -> Vec<f32> {
        let p = gt.poses();
        let mut dist = vec![0.0f32];
        for i in 1..p.len() {
            let dx = (p[i - 1][(0, 3)] - p[i][(0, 3)]) as f32;
            let dy = (p[i - 1][(1, 3)] - p[i][(1, 3)]) as f32;
            let dz = (p[i - 1][(2, 3)] - p[i][(2, 3)]) as f32;
            dist.push(dist[i - 1] + (dx * dx + dy * dy + dz * dz).sqrt());
        }
        dist
    }

    fn rotation_error(e: &Matrix4<f64>) -> f32 {
        let (a, b, c) = (e[(0, 0)] as f32, e[(1, 1)] as f32, e[(2, 2)] as f32);
        let d = (0.5 * ((a + b + c) as f64 - 1.0)) as f32;
        d.clamp(-1.0, 1.0).acos()
    }

    fn translation_error(e: &Matrix4<f64>) -> f32 {
        let (dx, dy, dz) = (e[(0, 3)] as f32, e[(1, 3)] as f32, e[(2, 3)] as f32);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn inverse(m: &Matrix4<f64>) -> Matrix4<f64> {
        // Rigid inputs are always invertible.
        m.try_inverse().unwrap_or_else(|| rigid_inverse(m))
    }

    pub(super) fn segments(
        est: &Trajectory,
        gt: &Trajectory,
        cfg: &OdometryConfig,
    ) -> Vec<SegmentError> {
        let dist = distances(gt);
        let (gp, ep) = (gt.poses(), est.poses());
        let mut out = Vec::new();
        for first in (0..gp.len()).step_by(cfg.frame_step) {
            for &length in &cfg.lengths {
                let len = length as f32;
                let Some(last) = (first..gp.len()).find(|&j| dist[j] > dist[first] + len) else {
                    continue;
                };
                let delta_gt = inverse(&gp[first]) * gp[last];
                let delta_est = inverse(&ep[first]) * ep[last];
                let err = inverse(&delta_est) * delta_gt;
                out.push(SegmentError {
                    first_frame: first,
                    last_frame: last,
                    length,
                    t_err: (translation_error(&err) / len) as f64,
                    r_err: (rotation_error(&err) / len) as f64,
                });
            }
        }
        out
    }

    fn mean_f32<'a>(values: impl Iterator<Item = &'a f64>, n: usize) -> f64 {
        let mut sum = 0.0f32;
        for v in values {
            sum += *v as f32;
        }
        (sum / n as f32) as f64
    }

    pub(super) fn summarize(segments: Vec<SegmentError>, lengths: &[f64]) -> OdometryErrorReport {
        let n = segments.len();
        let avg_t_err = mean_f32(segments.iter().map(|s| &s.t_err), n);
        let avg_r_err = mean_f32(segments.iter().map(|s| &s.r_err), n);
        let per_length = lengths
            .iter()
            .filter_map(|&length| {
                let of_len: Vec<_> = segments
                    .iter()
                    .filter(|s| ((s.length - length) as f32).abs() < 1.0)
                    .collect();
                if of_len.is_empty() {
                    return None;
                }
                let k = of_len.len();
                Some(LengthError {
                    length,
                    t_err: mean_f32(of_len.iter().map(|s| &s.t_err), k),
                    r_err: mean_f32(of_len.iter().map(|s| &s.r_err), k),
                    segments: k,
                })
            })
            .collect();
        OdometryErrorReport {
            per_length,
            segments,
            avg_t_err,
            avg_r_err,
        }
    }
}
