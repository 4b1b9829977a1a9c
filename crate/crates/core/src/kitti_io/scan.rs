use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const RECORD_BYTES: usize = 16;

/// One LiDAR return in the sensor frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LidarPoint {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub reflectance: f32,
}

impl LidarPoint {
    pub fn new(x: f32, y: f32, z: f32, reflectance: f32) -> Self {
        LidarPoint {
            x,
            y,
            z,
            reflectance,
        }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.reflectance.is_finite()
    }
}

/// A single sweep. Every stored point is finite; non-finite records seen
/// while loading are counted in `dropped`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LidarPointCloud {
    points: Vec<LidarPoint>,
    dropped: usize,
}

impl LidarPointCloud {
    /// Keeps the finite points and counts the rest as dropped.
    pub fn from_points(points: impl IntoIterator<Item = LidarPoint>) -> Self {
        let mut dropped = 0;
        let points = points
            .into_iter()
            .filter(|p| {
                let ok = p.is_finite();
                if !ok {
                    dropped += 1;
                }
                ok
            })
            .collect();
        LidarPointCloud { points, dropped }
    }

    pub fn points(&self) -> &[LidarPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of non-finite records discarded at load time.
    pub fn dropped(&self) -> usize {
        self.dropped
    }
}

/// Decodes a Velodyne scan: little-endian `f32` quadruples `(x, y, z, reflectance)`.
pub fn parse_velodyne_bytes(bytes: &[u8]) -> Option<LidarPointCloud> {
    if !bytes.len().is_multiple_of(RECORD_BYTES) {
        return None;
    }
    let f = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    Some(LidarPointCloud::from_points(
        bytes
            .chunks_exact(RECORD_BYTES)
            .map(|r| LidarPoint::new(f(&r[0..4]), f(&r[4..8]), f(&r[8..12]), f(&r[12..16]))),
    ))
}

pub fn load_velodyne_bin(path: impl AsRef<Path>) -> Result<LidarPointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_velodyne_bytes(&bytes).ok_or_else(|| Error::MalformedScan {
        path: path.to_path_buf(),
        len: bytes.len() as u64,
    })
}

pub fn write_velodyne_bin(cloud: &LidarPointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(cloud.len() * RECORD_BYTES);
    for p in cloud.points() {
        for v in [p.x, p.y, p.z, p.reflectance] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
