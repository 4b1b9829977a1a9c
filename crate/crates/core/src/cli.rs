//! Command line front end. `main.rs` only parses arguments and maps errors
//! to exit codes; everything else lives here so it can be tested in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;

use crate::bench::{bench_sequence, write_timings_csv, BenchOptions, StageStats};
use crate::densify::{inverse_dilate, StructuringElement};
use crate::depth_eval::{DepthEvalAccumulator, EvalCrop};
use crate::depth_map::{sparsity, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::kitti_io::{
    frame_name, load_kitti_calib, load_trajectory, load_velodyne_bin, png_dimensions,
    read_depth_png, write_depth_png, Camera, Sequence,
};
use crate::projection::{project, ProjectionConfig};
use crate::synthetic::{write_sequence, SequenceSpec};
use crate::traj_eval::{eval_odometry, plot_trajectory, OdometryConfig, SegmentConvention};

/// Exit code of a pipeline run in which at least one frame failed.
pub const EXIT_FRAME_FAILURES: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "lidepth",
    version,
    about = "Dense depth maps from LiDAR sweeps"
)]
pub struct Cli {
    /// Rectified camera whose projection matrix is used (P0..P3).
    #[arg(long, global = true, default_value = "P2")]
    pub camera: Camera,

    /// Farthest depth kept, in meters.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: f32,

    /// Points at or closer than this camera depth are dropped, in meters.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub min_depth: f32,

    /// Structuring element as shape:size (diamond, full, cross).
    #[arg(long, global = true, default_value = "diamond:5")]
    pub kernel: StructuringElement,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct ImageSize {
    /// Image width in pixels.
    #[arg(long, requires = "height")]
    pub width: Option<u32>,
    /// Image height in pixels.
    #[arg(long, requires = "width")]
    pub height: Option<u32>,
}

impl ImageSize {
    fn get(&self) -> Option<(u32, u32)> {
        self.width.zip(self.height)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project one scan into a sparse depth PNG.
    Project {
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Take the image size from this PNG's header.
        #[arg(long, conflicts_with_all = ["width", "height"])]
        image: Option<PathBuf>,
        #[command(flatten)]
        size: ImageSize,
    },
    /// Inverse-dilate a sparse depth PNG.
    Densify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one dense depth PNG per scan of a KITTI sequence.
    Pipeline {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        size: ImageSize,
    },
    /// MAE/RMSE of predicted depth PNGs against ground truth (files or directories).
    EvalDepth {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Fraction of top rows to ignore; 0.3 is customary for learned maps.
        #[arg(long, default_value_t = 0.0)]
        crop: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// KITTI odometry translational and rotational drift.
    EvalTraj {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Segment lengths in meters: `100..800` (step 100) or `100,200,400`.
        #[arg(long, default_value = "100..800")]
        lengths: String,
        #[arg(long, default_value_t = 10)]
        step: usize,
        /// Reproduce the official devkit's endpoint rule and float arithmetic.
        #[arg(long)]
        devkit: bool,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time projection and upsampling per frame.
    Bench {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long, default_value_t = crate::bench::DEFAULT_WARMUP)]
        warmup: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        size: ImageSize,
    },
    /// Generate a synthetic KITTI-layout sequence.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also render ground-truth depth PNGs under depth_gt/.
        #[arg(long)]
        depth_gt: bool,
    },
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub sequence_dir: PathBuf,
    pub output_dir: PathBuf,
    pub kernel: StructuringElement,
    pub camera: Camera,
    pub projection: ProjectionConfig,
    pub workers: usize,
    pub image_size: Option<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSummary {
    pub frames_processed: usize,
    pub mean_sparsity_before: f64,
    pub mean_sparsity_after: f64,
    /// `(frame index, message)` for every frame that failed.
    pub failures: Vec<(usize, String)>,
}

/// Depth maps for every scan of a sequence, frames processed independently on
/// `workers` threads. Output bytes do not depend on `workers`.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    if cfg.workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    if cfg.sequence_dir == cfg.output_dir {
        return Err(Error::InvalidConfig(
            "output directory must differ from the sequence directory".into(),
        ));
    }
    let seq = Sequence::open(&cfg.sequence_dir)?;
    let calib = seq.calibration(cfg.camera, cfg.image_size)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let results: Vec<(usize, Result<(f64, f64)>)> = pool.install(|| {
        seq.frames()
            .par_iter()
            .map(|(index, scan)| {
                let run = || -> Result<(f64, f64)> {
                    let cloud = load_velodyne_bin(scan)?;
                    let sparse = project(&cloud, &calib, &cfg.projection);
                    let dense = inverse_dilate(&sparse, &cfg.kernel);
                    let out = cfg.output_dir.join(format!("{}.png", frame_name(*index)));
                    write_depth_png(&dense, out)?;
                    Ok((sparsity(&sparse), sparsity(&dense)))
                };
                (*index, run())
            })
            .collect()
    });

    let mut before = 0.0;
    let mut after = 0.0;
    let mut done = 0;
    let mut failures = Vec::new();
    for (index, r) in results {
        match r {
            Ok((b, a)) => {
                before += b;
                after += a;
                done += 1;
            }
            Err(e) => {
                warn!("frame {index}: {e}");
                failures.push((index, e.to_string()));
            }
        }
    }
    let mean = |s: f64| if done > 0 { s / done as f64 } else { f64::NAN };
    Ok(PipelineSummary {
        frames_processed: done,
        mean_sparsity_before: mean(before),
        mean_sparsity_after: mean(after),
        failures,
    })
}

fn parse_lengths(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("bad segment lengths {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(a > 0.0 && b >= a) {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut l = a;
        while l <= b + 1e-9 {
            out.push(l);
            l += 100.0;
        }
        return Ok(out);
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn depth_pairs(pred: &Path, gt: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    if !pred.is_dir() {
        let id = pred
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        return Ok(vec![(id, pred.to_path_buf(), gt.to_path_buf())]);
    }
    let mut names: Vec<_> = fs::read_dir(pred)
        .map_err(|e| Error::io(pred, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("png"))
        .collect();
    names.sort();
    Ok(names
        .into_iter()
        .filter_map(|p| {
            let name = p.file_name()?.to_owned();
            let g = gt.join(&name);
            if !g.is_file() {
                warn!("no ground truth for {}", p.display());
                return None;
            }
            let id = p.file_stem()?.to_string_lossy().into_owned();
            Some((id, p, g))
        })
        .collect())
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, e.into())
}

fn stage_line(out: &mut dyn Write, name: &str, s: &StageStats) -> std::io::Result<()> {
    writeln!(
        out,
        "{name:<12}{:>10.3}{:>10.3}{:>10.3}",
        s.min_ms, s.median_ms, s.max_ms
    )
}

/// Runs a parsed command, writing human-readable output to `out`.
/// Returns the process exit code for successful runs.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let projection = ProjectionConfig::new(cli.min_depth, cli.max_depth)?;
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cli.command {
        Command::Project {
            scan,
            calib,
            out: dst,
            image,
            size,
        } => {
            let (w, h) = match (image, size.get()) {
                (Some(img), _) => png_dimensions(img)?,
                (None, Some(s)) => s,
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "pass --image or --width/--height".into(),
                    ))
                }
            };
            let calib = load_kitti_calib(&calib, cli.camera, w, h)?;
            let cloud = load_velodyne_bin(&scan)?;
            let map = project(&cloud, &calib, &projection);
            write_depth_png(&map, &dst)?;
            writeln!(
                out,
                "{} points ({} dropped) -> {} valid pixels, sparsity {:.4}",
                cloud.len(),
                cloud.dropped(),
                map.valid_count(),
                sparsity(&map)
            )
            .map_err(io)?;
        }
        Command::Densify { input, out: dst } => {
            let sparse = read_depth_png(&input)?;
            let dense = inverse_dilate(&sparse, &cli.kernel);
            write_depth_png(&dense, &dst)?;
            writeln!(
                out,
                "{}: sparsity {:.4} -> {:.4}",
                cli.kernel,
                sparsity(&sparse),
                sparsity(&dense)
            )
            .map_err(io)?;
        }
        Command::Pipeline {
            sequence,
            out: dst,
            workers,
            size,
        } => {
            let summary = cmd_pipeline(&PipelineConfig {
                sequence_dir: sequence,
                output_dir: dst,
                kernel: cli.kernel.clone(),
                camera: cli.camera,
                projection,
                workers,
                image_size: size.get(),
            })?;
            writeln!(
                out,
                "{} frames, mean sparsity {:.4} -> {:.4}, {} failed",
                summary.frames_processed,
                summary.mean_sparsity_before,
                summary.mean_sparsity_after,
                summary.failures.len()
            )
            .map_err(io)?;
            for (i, msg) in &summary.failures {
                writeln!(out, "  frame {i}: {msg}").map_err(io)?;
            }
            if !summary.failures.is_empty() {
                return Ok(EXIT_FRAME_FAILURES);
            }
        }
        Command::EvalDepth {
            pred,
            gt,
            crop,
            csv,
        } => {
            let crop = EvalCrop::new(crop)?;
            let pairs = depth_pairs(&pred, &gt)?;
            let mut acc = DepthEvalAccumulator::new();
            let mut rows = Vec::new();
            for (id, p, g) in &pairs {
                let r = acc.add(&read_depth_png(p)?, &read_depth_png(g)?, &crop)?;
                if pairs.len() > 1 {
                    writeln!(out, "{id}: mae {:.3} m, rmse {:.3} m", r.mae, r.rmse).map_err(io)?;
                }
                rows.push((id.clone(), r));
            }
            let pooled = acc.pooled()?;
            writeln!(
                out,
                "mae {:.3} m, rmse {:.3} m, {} px evaluated, gt coverage {:.4}, pred sparsity {:.4}",
                pooled.mae, pooled.rmse, pooled.evaluated_pixels, pooled.gt_coverage, pooled.pred_sparsity
            )
            .map_err(io)?;
            if pairs.len() > 1 {
                let (mae, rmse) = acc.frame_mean()?;
                writeln!(
                    out,
                    "per-frame mean: mae {mae:.3} m, rmse {rmse:.3} m ({} frames)",
                    pairs.len()
                )
                .map_err(io)?;
            }
            if let Some(path) = csv {
                let e = csv_io(&path);
                let mut w = csv::Writer::from_path(&path).map_err(&e)?;
                w.write_record([
                    "frame_id",
                    "mae",
                    "rmse",
                    "evaluated_pixels",
                    "gt_coverage",
                    "pred_sparsity",
                ])
                .map_err(&e)?;
                for (id, r) in &rows {
                    w.write_record([
                        id.clone(),
                        format!("{:.6}", r.mae),
                        format!("{:.6}", r.rmse),
                        r.evaluated_pixels.to_string(),
                        format!("{:.6}", r.gt_coverage),
                        format!("{:.6}", r.pred_sparsity),
                    ])
                    .map_err(&e)?;
                }
                w.flush().map_err(|err| Error::io(&path, err))?;
            }
        }
        Command::EvalTraj {
            est,
            gt,
            lengths,
            step,
            devkit,
            plot,
            csv,
        } => {
            let est = load_trajectory(&est)?;
            let gt = load_trajectory(&gt)?;
            let cfg = OdometryConfig {
                lengths: parse_lengths(&lengths)?,
                frame_step: step,
                convention: if devkit {
                    SegmentConvention::Devkit
                } else {
                    SegmentConvention::Travelled
                },
            };
            if let Some(path) = &plot {
                plot_trajectory(&est, &gt, path)?;
            }
            let report = eval_odometry(&est, &gt, &cfg)?;
            writeln!(
                out,
                "{:>8}{:>14}{:>16}{:>10}",
                "length", "t_err [%]", "r_err [°/100m]", "segments"
            )
            .map_err(io)?;
            for l in &report.per_length {
                writeln!(
                    out,
                    "{:>8}{:>14.3}{:>16.3}{:>10}",
                    l.length,
                    l.t_err_percent(),
                    l.r_err_deg_per_100m(),
                    l.segments
                )
                .map_err(io)?;
            }
            writeln!(
                out,
                "average: {:.3} % / {:.3} °/100 m over {} segments",
                report.avg_t_err_percent(),
                report.avg_r_err_deg_per_100m(),
                report.segment_total()
            )
            .map_err(io)?;
            if let Some(path) = csv {
                let e = csv_io(&path);
                let mut w = csv::Writer::from_path(&path).map_err(&e)?;
                w.write_record(["length", "t_err_percent", "r_err_deg_per_100m", "segments"])
                    .map_err(&e)?;
                for l in &report.per_length {
                    w.write_record([
                        l.length.to_string(),
                        format!("{:.6}", l.t_err_percent()),
                        format!("{:.6}", l.r_err_deg_per_100m()),
                        l.segments.to_string(),
                    ])
                    .map_err(&e)?;
                }
                w.flush().map_err(|err| Error::io(&path, err))?;
            }
        }
        Command::Bench {
            sequence,
            frames,
            warmup,
            csv,
            size,
        } => {
            let run = bench_sequence(
                &sequence,
                &BenchOptions {
                    frame_limit: frames,
                    kernel: cli.kernel.clone(),
                    warmup,
                    camera: cli.camera,
                    image_size: size.get(),
                    projection,
                },
            )?;
            writeln!(
                out,
                "{} timed frames ({} warmup, {} skipped), kernel {}",
                run.frames.len(),
                run.warmup,
                run.skipped,
                cli.kernel
            )
            .map_err(io)?;
            writeln!(
                out,
                "{:<12}{:>10}{:>10}{:>10}  [ms]",
                "stage", "min", "median", "max"
            )
            .map_err(io)?;
            stage_line(out, "projection", &run.stats.projection).map_err(io)?;
            stage_line(out, "upsampling", &run.stats.upsampling).map_err(io)?;
            stage_line(out, "total", &run.stats.total).map_err(io)?;
            if let Some(path) = csv {
                write_timings_csv(&run.frames, path)?;
            }
        }
        Command::Synth {
            out: dst,
            frames,
            seed,
            depth_gt,
        } => {
            write_sequence(
                &dst,
                &SequenceSpec {
                    frames,
                    seed,
                    depth_gt,
                },
            )?;
            info!("synthetic sequence written to {}", dst.display());
            writeln!(out, "{frames} frames written to {}", dst.display()).map_err(io)?;
        }
    }
    Ok(0)
}
