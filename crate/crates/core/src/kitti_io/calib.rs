use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix3x4, Matrix4};

use crate::error::{Error, Result};

/// Maximum elementwise deviation of `RᵀR` from identity, and of `det R` from 1.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Which rectified KITTI camera projection to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Camera {
    /// Left grayscale camera.
    P0,
    P1,
    /// Left color camera.
    #[default]
    P2,
    P3,
}

impl Camera {
    pub fn key(self) -> &'static str {
        match self {
            Camera::P0 => "P0",
            Camera::P1 => "P1",
            Camera::P2 => "P2",
            Camera::P3 => "P3",
        }
    }

    /// Image folder holding this camera's frames.
    pub fn image_dir(self) -> &'static str {
        match self {
            Camera::P0 => "image_0",
            Camera::P1 => "image_1",
            Camera::P2 => "image_2",
            Camera::P3 => "image_3",
        }
    }
}

impl fmt::Display for Camera {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Camera {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P0" => Ok(Camera::P0),
            "P1" => Ok(Camera::P1),
            "P2" => Ok(Camera::P2),
            "P3" => Ok(Camera::P3),
            _ => Err(Error::InvalidConfig(format!("unknown camera {s:?}"))),
        }
    }
}

/// Camera intrinsics, LiDAR extrinsics and image size for one sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSet {
    projection: Matrix3x4<f64>,
    lidar_to_cam: Matrix4<f64>,
    image_width: u32,
    image_height: u32,
}

impl CalibrationSet {
    /// `projection` maps homogeneous rectified camera points to homogeneous
    /// pixels; `lidar_to_cam` is a rigid LiDAR to rectified camera transform
    /// whose bottom row must be `0 0 0 1`.
    pub fn new(
        projection: Matrix3x4<f64>,
        lidar_to_cam: Matrix4<f64>,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::CalibParse(m));
        if image_width == 0 || image_height == 0 {
            return bad(format!("image size {image_width}x{image_height}"));
        }
        if projection.iter().any(|v| !v.is_finite()) || lidar_to_cam.iter().any(|v| !v.is_finite())
        {
            return bad("non-finite matrix entry".into());
        }
        if !(projection[(0, 0)] > 0.0 && projection[(1, 1)] > 0.0) {
            return bad("focal lengths must be positive".into());
        }
        if lidar_to_cam.fixed_view::<1, 4>(3, 0) != nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0) {
            return bad("extrinsic bottom row must be 0 0 0 1".into());
        }
        let rot: Matrix3<f64> = lidar_to_cam.fixed_view::<3, 3>(0, 0).into_owned();
        if let Some(msg) = rotation_defect(&rot) {
            return bad(format!("extrinsic rotation {msg}"));
        }
        Ok(CalibrationSet {
            projection,
            lidar_to_cam,
            image_width,
            image_height,
        })
    }

    pub fn projection(&self) -> &Matrix3x4<f64> {
        &self.projection
    }

    pub fn lidar_to_cam(&self) -> &Matrix4<f64> {
        &self.lidar_to_cam
    }

    pub fn image_width(&self) -> u32 {
        self.image_width
    }

    pub fn image_height(&self) -> u32 {
        self.image_height
    }

    pub fn with_image_size(mut self, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::CalibParse(format!("image size {width}x{height}")));
        }
        self.image_width = width;
        self.image_height = height;
        Ok(self)
    }
}

/// `None` if `rot` is a proper rotation within [`ROTATION_TOLERANCE`].
pub(crate) fn rotation_defect(rot: &Matrix3<f64>) -> Option<String> {
    let ortho = (rot.transpose() * rot - Matrix3::identity()).amax();
    if ortho > ROTATION_TOLERANCE {
        return Some(format!("is not orthonormal (|RᵀR - I| = {ortho:.3e})"));
    }
    let det = rot.determinant();
    if (det - 1.0).abs() > ROTATION_TOLERANCE {
        return Some(format!("has determinant {det}"));
    }
    None
}

/// Parses the contents of a KITTI Odometry `calib.txt`.
pub fn parse_kitti_calib(
    text: &str,
    camera: Camera,
    image_width: u32,
    image_height: u32,
) -> Result<CalibrationSet> {
    let mut proj = None;
    let mut tr = None;
    for (lineno, line) in text.lines().enumerate() {
        let Some((key, rest)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        let slot = if key == camera.key() {
            &mut proj
        } else if key == "Tr" {
            &mut tr
        } else {
            continue;
        };
        let values = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::CalibParse(format!("line {}: bad number {t:?} for {key}", lineno + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 12 {
            return Err(Error::CalibParse(format!(
                "line {}: {key} has {} values, expected 12",
                lineno + 1,
                values.len()
            )));
        }
        *slot = Some(values);
    }
    let proj = proj.ok_or_else(|| Error::CalibParse(format!("missing {}: line", camera.key())))?;
    let tr = tr.ok_or_else(|| Error::CalibParse("missing Tr: line".into()))?;

    let projection = Matrix3x4::from_row_slice(&proj);
    let mut lidar_to_cam = Matrix4::identity();
    lidar_to_cam
        .fixed_view_mut::<3, 4>(0, 0)
        .copy_from(&Matrix3x4::from_row_slice(&tr));
    CalibrationSet::new(projection, lidar_to_cam, image_width, image_height)
}

pub fn load_kitti_calib(
    path: impl AsRef<Path>,
    camera: Camera,
    image_width: u32,
    image_height: u32,
) -> Result<CalibrationSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kitti_calib(&text, camera, image_width, image_height)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
P0: 500 0 600 0 0 500 180 0 0 0 1 0
P1: 500 0 600 -200 0 500 180 0 0 0 1 0
P2: 500 0 600 0 0 500 180 0 0 0 1 0
P3: 500 0 600 -190 0 500 180 0 0 0 1 0
Tr: 1 0 0 0 0 1 0 -0.08 0 0 1 -0.27
";

    #[test]
    fn parses_fixture_exactly() {
        let c = parse_kitti_calib(FIXTURE, Camera::P2, 1242, 375).unwrap();
        #[rustfmt::skip]
        let p = Matrix3x4::new(
            500.0, 0.0, 600.0, 0.0,
            0.0, 500.0, 180.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        #[rustfmt::skip]
        let t = Matrix4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, -0.08,
            0.0, 0.0, 1.0, -0.27,
            0.0, 0.0, 0.0, 1.0,
        );
        assert_eq!(c.projection(), &p);
        assert_eq!(c.lidar_to_cam(), &t);
        assert_eq!((c.image_width(), c.image_height()), (1242, 375));
    }

    #[test]
    fn camera_selection() {
        let c = parse_kitti_calib(FIXTURE, Camera::P3, 10, 10).unwrap();
        assert_eq!(c.projection()[(0, 3)], -190.0);
    }

    #[test]
    fn scaled_rotation_rejected() {
        let text = FIXTURE.replace(
            "Tr: 1 0 0 0 0 1 0 -0.08 0 0 1",
            "Tr: 1.5 0 0 0 0 1.5 0 -0.08 0 0 1.5",
        );
        assert!(matches!(
            parse_kitti_calib(&text, Camera::P2, 10, 10),
            Err(Error::CalibParse(_))
        ));
    }

    #[test]
    fn reflection_rejected() {
        let text = FIXTURE.replace("0 0 1 -0.27", "0 0 -1 -0.27");
        assert!(parse_kitti_calib(&text, Camera::P2, 10, 10).is_err());
    }

    #[test]
    fn missing_tr_rejected() {
        let text: String = FIXTURE
            .lines()
            .filter(|l| !l.starts_with("Tr"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = parse_kitti_calib(&text, Camera::P2, 10, 10).unwrap_err();
        assert!(err.to_string().contains("Tr"), "{err}");
    }

    #[test]
    fn wrong_count_rejected() {
        let text = FIXTURE.replace("P2: 500 0 600 0 ", "P2: 500 0 600 ");
        assert!(matches!(
            parse_kitti_calib(&text, Camera::P2, 10, 10),
            Err(Error::CalibParse(_))
        ));
    }

    #[test]
    fn bad_number_rejected() {
        let text = FIXTURE.replace("P2: 500", "P2: five");
        assert!(parse_kitti_calib(&text, Camera::P2, 10, 10).is_err());
    }

    #[test]
    fn non_positive_focal_rejected() {
        let text = FIXTURE.replace("P2: 500", "P2: -500");
        assert!(parse_kitti_calib(&text, Camera::P2, 10, 10).is_err());
    }

    #[test]
    fn zero_size_rejected() {
        assert!(parse_kitti_calib(FIXTURE, Camera::P2, 0, 10).is_err());
    }

    #[test]
    fn camera_names() {
        assert_eq!("p0".parse::<Camera>().unwrap(), Camera::P0);
        assert_eq!("P2".parse::<Camera>().unwrap(), Camera::P2);
        assert!("P9".parse::<Camera>().is_err());
    }
}
