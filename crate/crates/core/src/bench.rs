//! Per-frame latency of the projection and upsampling stages.

use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use log::warn;

use crate::densify::{densify_frame, inverse_dilate, StructuringElement};
use crate::depth_map::DepthMap;
use crate::error::{Error, Result};
use crate::kitti_io::{load_velodyne_bin, CalibrationSet, Camera, LidarPointCloud, Sequence};
use crate::projection::{project, ProjectionConfig};

pub const DEFAULT_WARMUP: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageStats {
    pub min_ms: f64,
    /// Lower median for even sample counts.
    pub median_ms: f64,
    pub max_ms: f64,
    pub samples: usize,
}

impl StageStats {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(StageStats {
            min_ms: sorted[0],
            median_ms: sorted[(sorted.len() - 1) / 2],
            max_ms: sorted[sorted.len() - 1],
            samples: sorted.len(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuntimeStats {
    pub projection: StageStats,
    pub upsampling: StageStats,
    /// Timed separately as one fused call, not the sum of the two stages.
    pub total: StageStats,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameTiming {
    pub frame: usize,
    pub projection_ms: f64,
    pub upsampling_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub stats: RuntimeStats,
    /// Timed frames only, warmup excluded.
    pub frames: Vec<FrameTiming>,
    pub warmup: usize,
    /// Frames that could not be loaded.
    pub skipped: usize,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub frame_limit: Option<usize>,
    pub kernel: StructuringElement,
    pub warmup: usize,
    pub camera: Camera,
    pub image_size: Option<(u32, u32)>,
    pub projection: ProjectionConfig,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            frame_limit: None,
            kernel: StructuringElement::default(),
            warmup: DEFAULT_WARMUP,
            camera: Camera::default(),
            image_size: None,
            projection: ProjectionConfig::default(),
        }
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Times already-loaded frames on the calling thread. `sink` receives every
/// densified map (warmup included) outside the timed spans.
pub fn bench_frames_with<I>(
    frames: I,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
    kernel: &StructuringElement,
    warmup: usize,
    mut sink: impl FnMut(usize, &DepthMap),
) -> Result<BenchRun>
where
    I: IntoIterator<Item = Result<(usize, LidarPointCloud)>>,
{
    let mut timings = Vec::new();
    let mut seen = 0;
    let mut skipped = 0;
    for item in frames {
        let (frame, cloud) = match item {
            Ok(f) => f,
            Err(e) => {
                warn!("skipping frame: {e}");
                skipped += 1;
                continue;
            }
        };

        let t = Instant::now();
        let sparse = black_box(project(black_box(&cloud), calib, cfg));
        let projection_ms = ms_since(t);

        let t = Instant::now();
        let dense = black_box(inverse_dilate(black_box(&sparse), kernel));
        let upsampling_ms = ms_since(t);

        let t = Instant::now();
        let fused = black_box(densify_frame(black_box(&cloud), calib, cfg, kernel));
        let total_ms = ms_since(t);

        debug_assert_eq!(fused, dense);
        sink(frame, &fused);
        if seen >= warmup {
            timings.push(FrameTiming {
                frame,
                projection_ms,
                upsampling_ms,
                total_ms,
            });
        }
        seen += 1;
    }

    let stage = |f: fn(&FrameTiming) -> f64| {
        StageStats::from_samples(&timings.iter().map(f).collect::<Vec<_>>())
    };
    match (
        stage(|t| t.projection_ms),
        stage(|t| t.upsampling_ms),
        stage(|t| t.total_ms),
    ) {
        (Some(projection), Some(upsampling), Some(total)) => Ok(BenchRun {
            stats: RuntimeStats {
                projection,
                upsampling,
                total,
            },
            frames: timings,
            warmup,
            skipped,
        }),
        _ => Err(Error::EmptyEvaluation(format!(
            "{seen} frames loaded, {skipped} skipped; nothing left after {warmup} warmup frames"
        ))),
    }
}

pub fn bench_frames<I>(
    frames: I,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
    kernel: &StructuringElement,
    warmup: usize,
) -> Result<BenchRun>
where
    I: IntoIterator<Item = Result<(usize, LidarPointCloud)>>,
{
    bench_frames_with(frames, calib, cfg, kernel, warmup, |_, _| {})
}

/// Benchmarks a KITTI sequence directory. Scan loading is not timed.
pub fn bench_sequence(sequence_dir: impl AsRef<Path>, opts: &BenchOptions) -> Result<BenchRun> {
    let seq = Sequence::open(sequence_dir.as_ref())?;
    let calib = seq.calibration(opts.camera, opts.image_size)?;
    let limit = opts.frame_limit.unwrap_or(usize::MAX);
    let frames = seq
        .frames()
        .iter()
        .take(limit)
        .map(|(i, path)| load_velodyne_bin(path).map(|c| (*i, c)));
    bench_frames(frames, &calib, &opts.projection, &opts.kernel, opts.warmup)
}

/// CSV with columns `frame,projection_ms,upsampling_ms,total_ms`.
pub fn write_timings_csv(frames: &[FrameTiming], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["frame", "projection_ms", "upsampling_ms", "total_ms"])
        .map_err(io)?;
    for t in frames {
        w.write_record([
            t.frame.to_string(),
            format!("{:.6}", t.projection_ms),
            format!("{:.6}", t.upsampling_ms),
            format!("{:.6}", t.total_ms),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
