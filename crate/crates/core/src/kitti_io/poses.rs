use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix4};

use super::calib::rotation_defect;
use crate::error::{Error, Result};

/// Camera-to-world poses, one per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    poses: Vec<Matrix4<f64>>,
}

impl Trajectory {
    /// Every pose must be rigid: proper rotation block and bottom row `0 0 0 1`.
    pub fn new(poses: Vec<Matrix4<f64>>) -> Result<Self> {
        for (i, p) in poses.iter().enumerate() {
            let line = i + 1;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::PoseParse {
                    line,
                    msg: "non-finite value".into(),
                });
            }
            if p.fixed_view::<1, 4>(3, 0) != nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0) {
                return Err(Error::PoseParse {
                    line,
                    msg: "bottom row must be 0 0 0 1".into(),
                });
            }
            let rot: Matrix3<f64> = p.fixed_view::<3, 3>(0, 0).into_owned();
            if let Some(msg) = rotation_defect(&rot) {
                return Err(Error::PoseParse {
                    line,
                    msg: format!("rotation {msg}"),
                });
            }
        }
        Ok(Trajectory { poses })
    }

    pub fn poses(&self) -> &[Matrix4<f64>] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Parses KITTI poses text: 12 numbers per line, row-major upper 3x4 block.
/// Blank lines are ignored.
pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let mut poses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::PoseParse {
                    line: i + 1,
                    msg: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 12 {
            return Err(Error::PoseParse {
                line: i + 1,
                msg: format!("{} values, expected 12", values.len()),
            });
        }
        let mut m = Matrix4::identity();
        for r in 0..3 {
            for c in 0..4 {
                m[(r, c)] = values[r * 4 + c];
            }
        }
        poses.push(m);
    }
    Trajectory::new(poses)
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text)
}

/// Writes shortest round-trip float text, so a reload is exact.
pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(traj.len() * 200);
    for p in traj.poses() {
        for r in 0..3 {
            for c in 0..4 {
                if r + c > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{:e}", p[(r, c)]);
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
