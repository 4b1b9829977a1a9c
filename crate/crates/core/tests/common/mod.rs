//! Brute-force reference implementations and random inputs shared by the
//! integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use lidepth::kitti_io::{
    parse_trajectory, CalibrationSet, LidarPoint, LidarPointCloud, Trajectory,
};
use lidepth::{DepthMap, ProjectionConfig};
use nalgebra::{Matrix3x4, Matrix4, Rotation3, Vector3};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Kernels exercised by the dilation oracles, by name.
pub const ORACLE_KERNELS: [&str; 4] = ["diamond:5", "full:5", "cross:3", "full:1"];

/// Independent kernel membership test for offset `(dx, dy)` from the center.
pub fn kernel_covers(name: &str, dx: i64, dy: i64) -> bool {
    let (shape, size) = name.split_once(':').unwrap();
    let r = (size.parse::<i64>().unwrap() - 1) / 2;
    if dx.abs() > r || dy.abs() > r {
        return false;
    }
    match shape {
        "diamond" => dx.abs() + dy.abs() <= r,
        "full" => true,
        "cross" => dx == 0 || dy == 0,
        _ => panic!("unknown kernel {name}"),
    }
}

/// Per-pixel gather: minimum valid depth over every input pixel whose kernel
/// footprint reaches the output pixel.
pub fn dilate_oracle(map: &DepthMap, kernel: &str) -> Vec<f32> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let r = (kernel.split_once(':').unwrap().1.parse::<i64>().unwrap() - 1) / 2;
    let mut out = vec![0.0f32; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut best: Option<f32> = None;
            for sy in (y - r).max(0)..=(y + r).min(h - 1) {
                for sx in (x - r).max(0)..=(x + r).min(w - 1) {
                    if !kernel_covers(kernel, x - sx, y - sy) {
                        continue;
                    }
                    if let Some(d) = map.get(sx as u32, sy as u32) {
                        best = Some(best.map_or(d, |b: f32| b.min(d)));
                    }
                }
            }
            out[(y * w + x) as usize] = best.unwrap_or(0.0);
        }
    }
    out
}

/// Boolean dilation of the validity mask.
pub fn dilate_mask_oracle(mask: &[bool], w: usize, h: usize, kernel: &str) -> Vec<bool> {
    let r = (kernel.split_once(':').unwrap().1.parse::<i64>().unwrap() - 1) / 2;
    let (wi, hi) = (w as i64, h as i64);
    let mut out = vec![false; w * h];
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let (qx, qy) = ((i % w) as i64, (i / w) as i64);
        for y in (qy - r).max(0)..=(qy + r).min(hi - 1) {
            for x in (qx - r).max(0)..=(qx + r).min(wi - 1) {
                if kernel_covers(kernel, x - qx, y - qy) {
                    out[y as usize * w + x as usize] = true;
                }
            }
        }
    }
    out
}

/// Random `w` x `h` map with roughly `density` valid pixels.
pub fn random_sparse_map(rng: &mut ChaCha8Rng, w: u32, h: u32, density: f64) -> DepthMap {
    let depth = (0..w * h)
        .map(|_| {
            if rng.random_bool(density) {
                rng.random_range(0.5f32..80.0)
            } else {
                0.0
            }
        })
        .collect();
    DepthMap::from_vec(w, h, depth).unwrap()
}

/// Pixel and camera depth of one point, by the textbook formula
/// `P * Tr * [x y z 1]^T` with a depth window and half-open image bounds.
pub fn project_point(
    pt: &LidarPoint,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
) -> Option<(u32, u32, f32)> {
    let t = calib.lidar_to_cam();
    let p = calib.projection();
    let lidar = [pt.x as f64, pt.y as f64, pt.z as f64, 1.0];
    let mut cam = [0.0f64; 4];
    for (r, c) in cam.iter_mut().enumerate() {
        *c = (0..4).fold(0.0, |acc, k| acc + t[(r, k)] * lidar[k]);
    }
    let depth = cam[2] as f32;
    if depth <= cfg.min_depth() || depth > cfg.max_depth() {
        return None;
    }
    let mut img = [0.0f64; 3];
    for (r, c) in img.iter_mut().enumerate() {
        *c = (0..4).fold(0.0, |acc, k| acc + p[(r, k)] * cam[k]);
    }
    if img[2] <= 0.0 {
        return None;
    }
    let (u, v) = ((img[0] / img[2]).round(), (img[1] / img[2]).round());
    if u < 0.0 || v < 0.0 || u >= calib.image_width() as f64 || v >= calib.image_height() as f64 {
        return None;
    }
    Some((u as u32, v as u32, depth))
}

/// Projects every point, groups by pixel and keeps the smallest depth.
pub fn project_oracle(
    cloud: &LidarPointCloud,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
) -> Vec<f32> {
    let mut hits: BTreeMap<(u32, u32), Vec<f32>> = BTreeMap::new();
    for pt in cloud.points() {
        if let Some((u, v, d)) = project_point(pt, calib, cfg) {
            hits.entry((v, u)).or_default().push(d);
        }
    }
    let w = calib.image_width() as usize;
    let mut out = vec![0.0f32; w * calib.image_height() as usize];
    for ((v, u), ds) in hits {
        out[v as usize * w + u as usize] = ds.into_iter().fold(f32::INFINITY, f32::min);
    }
    out
}

/// KITTI-like extrinsics (camera z along LiDAR x) with a random perturbation
/// and a random pinhole camera on a small image.
pub fn random_calib(rng: &mut ChaCha8Rng) -> CalibrationSet {
    let base = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::new(
        0.0, -1.0, 0.0, //
        0.0, 0.0, -1.0, //
        1.0, 0.0, 0.0,
    ));
    let jitter = Rotation3::from_euler_angles(
        rng.random_range(-0.05..0.05),
        rng.random_range(-0.05..0.05),
        rng.random_range(-0.05..0.05),
    );
    let rot = jitter * base;
    let mut tr = Matrix4::identity();
    tr.fixed_view_mut::<3, 3>(0, 0).copy_from(rot.matrix());
    tr.fixed_view_mut::<3, 1>(0, 3).copy_from(&Vector3::new(
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.3..0.0),
    ));

    let (w, h) = (rng.random_range(40..240u32), rng.random_range(20..120u32));
    let fx = rng.random_range(0.4..1.2) * w as f64;
    let fy = fx * rng.random_range(0.9..1.1);
    let (cx, cy) = (
        w as f64 * rng.random_range(0.4..0.6),
        h as f64 * rng.random_range(0.4..0.6),
    );
    let baseline = rng.random_range(-0.6..0.6) * fx;
    #[rustfmt::skip]
    let p = Matrix3x4::new(
        fx, 0.0, cx, baseline,
        0.0, fy, cy, 0.0,
        0.0, 0.0, 1.0, rng.random_range(-0.01..0.01),
    );
    CalibrationSet::new(p, tr, w, h).unwrap()
}

/// Points scattered around the sensor, with clusters of near-duplicates so
/// that many pixels receive more than one return.
pub fn random_cloud(rng: &mut ChaCha8Rng) -> LidarPointCloud {
    let n = rng.random_range(50..3000);
    let mut pts = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let p = LidarPoint::new(
            rng.random_range(-10.0..100.0),
            rng.random_range(-40.0..40.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(0.0..1.0),
        );
        pts.push(p);
        if rng.random_bool(0.3) {
            let k = rng.random_range(0.5f32..2.0);
            pts.push(LidarPoint::new(p.x * k, p.y * k, p.z * k, p.reflectance));
        }
    }
    LidarPointCloud::from_points(pts)
}

pub fn shuffled(rng: &mut ChaCha8Rng, cloud: &LidarPointCloud) -> LidarPointCloud {
    let mut pts = cloud.points().to_vec();
    pts.shuffle(rng);
    LidarPointCloud::from_points(pts)
}

pub fn devkit_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/devkit")
}

/// Reference numbers printed by the C++ evaluator for one fixture pair:
/// `(avg t, avg r, segments)` and `(length, t, r, segments)` rows.
pub struct DevkitExpected {
    pub avg: (f64, f64, usize),
    pub lengths: Vec<(f64, f64, f64, usize)>,
}

pub fn load_devkit_case(i: usize) -> (Trajectory, Trajectory, DevkitExpected) {
    let dir = devkit_dir();
    let read = |name: String| std::fs::read_to_string(dir.join(name)).unwrap();
    let gt = parse_trajectory(&read(format!("gt_{i:02}.txt"))).unwrap();
    let est = parse_trajectory(&read(format!("est_{i:02}.txt"))).unwrap();
    let mut avg = None;
    let mut lengths = Vec::new();
    for line in read(format!("expected_{i:02}.txt")).lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["avg", t, r, n] => {
                avg = Some((t.parse().unwrap(), r.parse().unwrap(), n.parse().unwrap()))
            }
            ["len", l, t, r, n] => lengths.push((
                l.parse().unwrap(),
                t.parse().unwrap(),
                r.parse().unwrap(),
                n.parse().unwrap(),
            )),
            _ => panic!("bad expected line {line:?}"),
        }
    }
    (
        est,
        gt,
        DevkitExpected {
            avg: avg.unwrap(),
            lengths,
        },
    )
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
