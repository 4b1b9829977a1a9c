use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use super::calib::{load_kitti_calib, CalibrationSet, Camera};
use crate::error::{Error, Result};

/// Six-digit zero-padded KITTI frame stem, e.g. `000042`.
pub fn frame_name(index: usize) -> String {
    format!("{index:06}")
}

/// Width and height from a PNG header, without decoding pixels.
pub fn png_dimensions(path: impl AsRef<Path>) -> Result<(u32, u32)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    let info = decoder
        .read_header_info()
        .map_err(|e| Error::DepthDecode(format!("{}: {e}", path.display())))?;
    Ok((info.width, info.height))
}

/// A KITTI Odometry sequence directory.
#[derive(Clone, Debug)]
pub struct Sequence {
    root: PathBuf,
    frames: Vec<(usize, PathBuf)>,
}

impl Sequence {
    /// Indexes `velodyne/NNNNNN.bin`; files with other names are ignored.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let velodyne = root.join("velodyne");
        let entries = fs::read_dir(&velodyne).map_err(|e| Error::io(&velodyne, e))?;
        let mut frames = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(&velodyne, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("bin") {
                continue;
            }
            let index = path
                .file_stem()
                .and_then(|s| s.to_str())
                .filter(|s| s.len() == 6)
                .and_then(|s| s.parse::<usize>().ok());
            if let Some(index) = index {
                frames.push((index, path));
            }
        }
        frames.sort();
        Ok(Sequence { root, frames })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `(frame index, scan path)` in frame order.
    pub fn frames(&self) -> &[(usize, PathBuf)] {
        &self.frames
    }

    pub fn calib_path(&self) -> PathBuf {
        self.root.join("calib.txt")
    }

    pub fn times_path(&self) -> PathBuf {
        self.root.join("times.txt")
    }

    /// Dimensions of the first camera image, if any image exists for `camera`.
    pub fn image_size(&self, camera: Camera) -> Result<Option<(u32, u32)>> {
        let dir = self.root.join(camera.image_dir());
        let Some((index, _)) = self.frames.first() else {
            return Ok(None);
        };
        let first = dir.join(format!("{}.png", frame_name(*index)));
        if first.is_file() {
            return png_dimensions(&first).map(Some);
        }
        Ok(None)
    }

    /// Calibration with image size taken from `size`, else from the camera images.
    pub fn calibration(&self, camera: Camera, size: Option<(u32, u32)>) -> Result<CalibrationSet> {
        let (w, h) = match size {
            Some(s) => s,
            None => self.image_size(camera)?.ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "no {} images under {}; pass the image size explicitly",
                    camera.image_dir(),
                    self.root.display()
                ))
            })?,
        };
        load_kitti_calib(self.calib_path(), camera, w, h)
    }
}
