//! Synthetic KITTI-layout sequences: a 64-beam spinning LiDAR driving down a
//! straight street lined with buildings and parked cars.
//!
//! Used for benchmarks, demos and tests when real KITTI data is not at hand.
//! Sparsity and timing are representative of real sweeps; the scene is not.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix4, Translation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::depth_map::DepthMap;
use crate::error::{Error, Result};
use crate::kitti_io::{
    frame_name, parse_kitti_calib, write_depth_png, write_trajectory, write_velodyne_bin,
    CalibrationSet, Camera, LidarPoint, LidarPointCloud, Trajectory,
};

pub const IMAGE_WIDTH: u32 = 1242;
pub const IMAGE_HEIGHT: u32 = 375;

/// `calib.txt` of KITTI Odometry sequence 00.
pub const KITTI_00_CALIB: &str = "\
P0: 7.188560000000e+02 0.000000000000e+00 6.071928000000e+02 0.000000000000e+00 0.000000000000e+00 7.188560000000e+02 1.852157000000e+02 0.000000000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00
P1: 7.188560000000e+02 0.000000000000e+00 6.071928000000e+02 -3.861448000000e+02 0.000000000000e+00 7.188560000000e+02 1.852157000000e+02 0.000000000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00
P2: 7.188560000000e+02 0.000000000000e+00 6.071928000000e+02 4.538225000000e+01 0.000000000000e+00 7.188560000000e+02 1.852157000000e+02 -1.130887000000e-01 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 3.779761000000e-03
P3: 7.188560000000e+02 0.000000000000e+00 6.071928000000e+02 -3.372877000000e+02 0.000000000000e+00 7.188560000000e+02 1.852157000000e+02 2.369057000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 4.915215000000e-03
Tr: 4.276802385584e-04 -9.999672484946e-01 -8.084491683471e-03 -1.198459927713e-02 -7.210626507497e-03 8.081198471645e-03 -9.999413164504e-01 -5.403984729748e-02 9.999738645903e-01 4.859485810390e-04 -7.206933692422e-03 -2.921968648686e-01
";

const SENSOR_HEIGHT: f64 = 1.73;
const MAX_RANGE: f64 = 120.0;
const AZIMUTH_STEPS: usize = 2000;
const FRAME_ADVANCE_M: f64 = 1.0;
const FRAME_PERIOD_S: f64 = 0.1;

pub fn kitti_like_calib(camera: Camera) -> CalibrationSet {
    parse_kitti_calib(KITTI_00_CALIB, camera, IMAGE_WIDTH, IMAGE_HEIGHT)
        .expect("bundled calibration is valid")
}

/// Beam elevations of a 64-beam sensor, radians: 32 beams from +2° in 1/3°
/// steps, 32 from -8.83° in 1/2° steps.
fn beam_elevations() -> Vec<f64> {
    let upper = (0..32).map(|i| 2.0 - i as f64 / 3.0);
    let lower = (0..32).map(|i| -8.83 - i as f64 * 0.5);
    upper.chain(lower).map(f64::to_radians).collect()
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    min: Vector3<f64>,
    max: Vector3<f64>,
}

impl Aabb {
    fn hit(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            if dir[a].abs() < 1e-12 {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[a];
            let (mut near, mut far) = (
                (self.min[a] - origin[a]) * inv,
                (self.max[a] - origin[a]) * inv,
            );
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        (t0 > 1e-9).then_some(t0)
    }
}

/// Static street scene in world coordinates (x along the street, y left, z up,
/// ground at z = 0).
#[derive(Clone, Debug)]
pub struct SyntheticScene {
    boxes: Vec<Aabb>,
    seed: u64,
}

impl SyntheticScene {
    pub fn generate(seed: u64, street_length: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut boxes = Vec::new();
        for side in [-1.0, 1.0] {
            // building fronts with gaps
            let mut x = -150.0;
            while x < street_length + 150.0 {
                let len = rng.random_range(10.0..30.0);
                let front = rng.random_range(8.0..12.0);
                let height = rng.random_range(6.0..20.0);
                let (y0, y1) = if side > 0.0 {
                    (front, front + 15.0)
                } else {
                    (-front - 15.0, -front)
                };
                boxes.push(Aabb {
                    min: Vector3::new(x, y0, 0.0),
                    max: Vector3::new(x + len, y1, height),
                });
                x += len + rng.random_range(2.0..8.0);
            }
            // parked cars
            let mut x = -150.0;
            while x < street_length + 150.0 {
                x += rng.random_range(5.0..25.0);
                let y = side * rng.random_range(4.0..5.5);
                boxes.push(Aabb {
                    min: Vector3::new(x, y - 0.9, 0.0),
                    max: Vector3::new(x + 4.5, y + 0.9, 1.5),
                });
            }
            // poles
            let mut x = -150.0;
            while x < street_length + 150.0 {
                x += rng.random_range(15.0..40.0);
                let y = side * 6.5;
                boxes.push(Aabb {
                    min: Vector3::new(x, y - 0.15, 0.0),
                    max: Vector3::new(x + 0.3, y + 0.15, 7.0),
                });
            }
        }
        SyntheticScene { boxes, seed }
    }

    /// Sensor position in world coordinates at `frame`.
    pub fn sensor_origin(frame: usize) -> Vector3<f64> {
        Vector3::new(frame as f64 * FRAME_ADVANCE_M, 0.0, SENSOR_HEIGHT)
    }

    fn cast(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, candidates: &[Aabb]) -> Option<f64> {
        let mut best = f64::INFINITY;
        if dir.z < -1e-12 {
            best = -origin.z / dir.z;
        }
        for b in candidates {
            if let Some(t) = b.hit(origin, dir) {
                best = best.min(t);
            }
        }
        (best.is_finite() && best * dir.norm() <= MAX_RANGE).then_some(best)
    }

    fn nearby(&self, origin: &Vector3<f64>) -> Vec<Aabb> {
        self.boxes
            .iter()
            .filter(|b| b.max.x > origin.x - MAX_RANGE && b.min.x < origin.x + MAX_RANGE)
            .copied()
            .collect()
    }

    /// One full revolution seen from the sensor at `frame`, in the sensor frame.
    pub fn sweep(&self, frame: usize) -> LidarPointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ (frame as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
        );
        let origin = Self::sensor_origin(frame);
        let candidates = self.nearby(&origin);
        let elevations = beam_elevations();
        let mut points = Vec::with_capacity(elevations.len() * AZIMUTH_STEPS);
        for a in 0..AZIMUTH_STEPS {
            let az = a as f64 / AZIMUTH_STEPS as f64 * std::f64::consts::TAU;
            for &el in &elevations {
                let dir = Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
                if let Some(t) = self.cast(&origin, &dir, &candidates) {
                    let r = t + rng.random_range(-0.02..0.02);
                    let p = dir * r;
                    points.push(LidarPoint::new(
                        p.x as f32,
                        p.y as f32,
                        p.z as f32,
                        rng.random_range(0.0..1.0),
                    ));
                }
            }
        }
        LidarPointCloud::from_points(points)
    }

    /// Noise-free camera-frame depth for every pixel, as a ground-truth image.
    pub fn render_depth(&self, frame: usize, calib: &CalibrationSet, max_depth: f32) -> DepthMap {
        let p = calib.projection();
        let k: Matrix3<f64> = p.fixed_view::<3, 3>(0, 0).into_owned();
        let k_inv = k.try_inverse().expect("intrinsics are invertible");
        // P = K [I | c]  =>  camera center at -c in the rectified frame
        let c = k_inv * p.fixed_view::<3, 1>(0, 3);
        let cam_to_lidar = calib.lidar_to_cam().try_inverse().expect("rigid");
        let r: Matrix3<f64> = cam_to_lidar.fixed_view::<3, 3>(0, 0).into_owned();
        let sensor = Self::sensor_origin(frame);
        let center_lidar = (cam_to_lidar * (-c).push(1.0)).xyz();
        let origin = center_lidar + sensor;
        let candidates = self.nearby(&sensor);
        let t_row = calib.lidar_to_cam().fixed_view::<1, 4>(2, 0).into_owned();

        let (w, h) = (calib.image_width(), calib.image_height());
        let mut depth = DepthMap::empty(w, h);
        for v in 0..h {
            for u in 0..w {
                let ray_cam = k_inv * Vector3::new(u as f64, v as f64, 1.0);
                let dir = r * ray_cam;
                if let Some(t) = self.cast(&origin, &dir, &candidates) {
                    let hit = center_lidar + dir * t;
                    let z = (t_row * hit.push(1.0))[0] as f32;
                    if z > 0.0 && z <= max_depth {
                        depth.set(u, v, Some(z));
                    }
                }
            }
        }
        depth
    }

    /// Sensor poses as camera-to-world transforms in the rectified camera
    /// convention (z forward), starting at identity.
    pub fn ground_truth(frames: usize) -> Trajectory {
        Trajectory::new(
            (0..frames)
                .map(|i| Translation3::new(0.0, 0.0, i as f64 * FRAME_ADVANCE_M).to_homogeneous())
                .collect::<Vec<Matrix4<f64>>>(),
        )
        .expect("translations are rigid")
    }
}

/// Options for [`write_sequence`].
#[derive(Clone, Debug)]
pub struct SequenceSpec {
    pub frames: usize,
    pub seed: u64,
    /// Also write `depth_gt/NNNNNN.png` rendered ground truth.
    pub depth_gt: bool,
}

/// Writes a KITTI Odometry layout: `velodyne/`, `calib.txt`, `times.txt`,
/// `poses.txt`, a header-bearing `image_2/000000.png`, and optionally `depth_gt/`.
pub fn write_sequence(dir: impl AsRef<Path>, spec: &SequenceSpec) -> Result<()> {
    let dir = dir.as_ref();
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| Error::io(p, e));
    let velodyne = dir.join("velodyne");
    mkdir(&velodyne)?;
    let write = |p: &Path, s: &str| fs::write(p, s).map_err(|e| Error::io(p, e));
    write(&dir.join("calib.txt"), KITTI_00_CALIB)?;
    let times: String = (0..spec.frames)
        .map(|i| format!("{:e}\n", i as f64 * FRAME_PERIOD_S))
        .collect();
    write(&dir.join("times.txt"), &times)?;
    write_trajectory(
        &SyntheticScene::ground_truth(spec.frames),
        dir.join("poses.txt"),
    )?;

    let image_dir = dir.join("image_2");
    mkdir(&image_dir)?;
    write_gray_image(&image_dir.join("000000.png"), IMAGE_WIDTH, IMAGE_HEIGHT)?;

    let scene = SyntheticScene::generate(spec.seed, spec.frames as f64 * FRAME_ADVANCE_M);
    let calib = kitti_like_calib(Camera::P2);
    if spec.depth_gt {
        mkdir(&dir.join("depth_gt"))?;
    }
    for i in 0..spec.frames {
        let name = frame_name(i);
        write_velodyne_bin(&scene.sweep(i), velodyne.join(format!("{name}.bin")))?;
        if spec.depth_gt {
            let gt = scene.render_depth(i, &calib, crate::DEFAULT_MAX_DEPTH);
            write_depth_png(&gt, dir.join("depth_gt").join(format!("{name}.png")))?;
        }
    }
    Ok(())
}

fn write_gray_image(path: &Path, width: u32, height: u32) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), width, height);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let err = |e: png::EncodingError| Error::DepthEncode(e.to_string());
    let mut w = enc.write_header().map_err(err)?;
    w.write_image_data(&vec![0u8; width as usize * height as usize])
        .map_err(err)?;
    w.finish().map_err(err)
}
