//! Rasterizes a LiDAR sweep into a sparse depth image of the camera.

use crate::depth_map::{DepthMap, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::kitti_io::{CalibrationSet, LidarPointCloud};

/// Depth window for projected points: `min_depth < z <= max_depth`, in meters.
///
/// Pixel coordinates are rounded to nearest with ties away from zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionConfig {
    min_depth: f32,
    max_depth: f32,
}

impl ProjectionConfig {
    pub fn new(min_depth: f32, max_depth: f32) -> Result<Self> {
        if !(min_depth >= 0.0 && min_depth < max_depth && max_depth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "depth window must satisfy 0 <= min < max, got ({min_depth}, {max_depth}]"
            )));
        }
        Ok(ProjectionConfig {
            min_depth,
            max_depth,
        })
    }

    pub fn min_depth(&self) -> f32 {
        self.min_depth
    }

    pub fn max_depth(&self) -> f32 {
        self.max_depth
    }
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            min_depth: 0.0,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// Projects every point into the image and keeps the nearest one per pixel.
///
/// The stored value is the camera-frame forward coordinate `z`, not the
/// Euclidean range. Points outside the depth window or the image are skipped.
pub fn project(
    cloud: &LidarPointCloud,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
) -> DepthMap {
    let (width, height) = (calib.image_width(), calib.image_height());
    let mut depth = vec![0.0f32; width as usize * height as usize];
    let t = calib.lidar_to_cam();
    let p = calib.projection();
    let (w_f, h_f) = (width as f64, height as f64);

    for pt in cloud.points() {
        let (x, y, z) = (pt.x as f64, pt.y as f64, pt.z as f64);
        let xc = t[(0, 0)] * x + t[(0, 1)] * y + t[(0, 2)] * z + t[(0, 3)];
        let yc = t[(1, 0)] * x + t[(1, 1)] * y + t[(1, 2)] * z + t[(1, 3)];
        let zc = t[(2, 0)] * x + t[(2, 1)] * y + t[(2, 2)] * z + t[(2, 3)];
        let d = zc as f32;
        if !(d > cfg.min_depth && d <= cfg.max_depth) {
            continue;
        }
        let w = p[(2, 0)] * xc + p[(2, 1)] * yc + p[(2, 2)] * zc + p[(2, 3)];
        if w.is_nan() || w <= 0.0 {
            continue;
        }
        let u = (p[(0, 0)] * xc + p[(0, 1)] * yc + p[(0, 2)] * zc + p[(0, 3)]) / w;
        let v = (p[(1, 0)] * xc + p[(1, 1)] * yc + p[(1, 2)] * zc + p[(1, 3)]) / w;
        let (px, py) = (u.round(), v.round());
        if !(px >= 0.0 && px < w_f && py >= 0.0 && py < h_f) {
            continue;
        }
        let i = py as usize * width as usize + px as usize;
        let cur = depth[i];
        if cur == 0.0 || d < cur {
            depth[i] = d;
        }
    }
    DepthMap::from_vec_unchecked(width, height, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth_map::sparsity;
    use crate::kitti_io::LidarPoint;
    use nalgebra::{Matrix3x4, Matrix4};

    fn calib() -> CalibrationSet {
        #[rustfmt::skip]
        let p = Matrix3x4::new(
            500.0, 0.0, 600.0, 0.0,
            0.0, 500.0, 180.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        CalibrationSet::new(p, Matrix4::identity(), 1242, 375).unwrap()
    }

    fn cloud(pts: &[(f32, f32, f32)]) -> LidarPointCloud {
        LidarPointCloud::from_points(pts.iter().map(|&(x, y, z)| LidarPoint::new(x, y, z, 0.0)))
    }

    #[test]
    fn optical_axis_point() {
        let m = project(
            &cloud(&[(0.0, 0.0, 10.0)]),
            &calib(),
            &ProjectionConfig::default(),
        );
        assert_eq!(m.valid_count(), 1);
        assert_eq!(m.get(600, 180), Some(10.0));
    }

    #[test]
    fn nearest_point_wins() {
        // (0.5, 0, 5) and (1, 0, 10) both land on u = 650
        for pts in [
            [(0.5, 0.0, 5.0), (1.0, 0.0, 10.0)],
            [(1.0, 0.0, 10.0), (0.5, 0.0, 5.0)],
        ] {
            let m = project(&cloud(&pts), &calib(), &ProjectionConfig::default());
            assert_eq!(m.valid_count(), 1);
            assert_eq!(m.get(650, 180), Some(5.0));
        }
    }

    #[test]
    fn empty_cloud_is_all_invalid() {
        let m = project(
            &LidarPointCloud::default(),
            &calib(),
            &ProjectionConfig::default(),
        );
        assert_eq!(sparsity(&m), 1.0);
        assert_eq!(m.dims(), (1242, 375));
    }

    #[test]
    fn depth_window() {
        let cfg = ProjectionConfig::new(2.0, 50.0).unwrap();
        let m = project(
            &cloud(&[
                (0.0, 0.0, 2.0),
                (0.0, 0.0, -3.0),
                (0.0, 0.0, 50.5),
                (0.1, 0.0, 50.0),
            ]),
            &calib(),
            &cfg,
        );
        assert_eq!(m.valid_count(), 1);
        assert_eq!(m.get(601, 180), Some(50.0));
    }

    #[test]
    fn border_is_half_open() {
        // u = 600 + 500 x / z; x = -12 -> u = 0, x = 12.84 -> u = 1242 (out)
        let m = project(
            &cloud(&[(-12.0, 0.0, 10.0), (12.84, 0.0, 10.0), (12.82, 0.0, 10.0)]),
            &calib(),
            &ProjectionConfig::default(),
        );
        assert_eq!(m.get(0, 180), Some(10.0));
        assert_eq!(m.get(1241, 180), Some(10.0));
        assert_eq!(m.valid_count(), 2);
    }

    #[test]
    fn rounds_half_away_from_zero() {
        #[rustfmt::skip]
        let p = Matrix3x4::new(
            512.0, 0.0, 600.0, 0.0,
            0.0, 512.0, 180.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        let c = CalibrationSet::new(p, Matrix4::identity(), 1242, 375).unwrap();
        // u = 600.5 and v = 179.5 exactly
        let m = project(
            &cloud(&[(0.015625, -0.015625, 16.0)]),
            &c,
            &ProjectionConfig::default(),
        );
        assert_eq!(m.get(601, 180), Some(16.0));
    }

    #[test]
    fn bad_window_rejected() {
        assert!(ProjectionConfig::new(5.0, 5.0).is_err());
        assert!(ProjectionConfig::new(-1.0, 5.0).is_err());
        assert!(ProjectionConfig::new(0.0, f32::INFINITY).is_err());
    }
}
