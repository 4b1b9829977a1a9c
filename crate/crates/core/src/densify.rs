//! Inverse dilation: spreads each measured depth over a structuring element,
//! keeping the nearest depth wherever spreads overlap.

use std::fmt;
use std::str::FromStr;

use crate::depth_map::DepthMap;
use crate::error::{Error, Result};
use crate::kitti_io::{CalibrationSet, LidarPointCloud};
use crate::projection::{project, ProjectionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelShape {
    /// Cells within Manhattan distance `(n - 1) / 2` of the center.
    Diamond,
    Full,
    /// Center row and center column.
    Cross,
}

impl KernelShape {
    fn name(self) -> &'static str {
        match self {
            KernelShape::Diamond => "diamond",
            KernelShape::Full => "full",
            KernelShape::Cross => "cross",
        }
    }
}

/// Square boolean mask of odd size with its origin at the center cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    shape: KernelShape,
    size: usize,
    mask: Vec<bool>,
}

impl StructuringElement {
    pub fn new(shape: KernelShape, size: usize) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::InvalidKernel(format!("{}:{size}", shape.name())));
        }
        let c = (size - 1) / 2;
        let mut mask = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                mask.push(match shape {
                    KernelShape::Diamond => i.abs_diff(c) + j.abs_diff(c) <= c,
                    KernelShape::Full => true,
                    KernelShape::Cross => i == c || j == c,
                });
            }
        }
        Ok(StructuringElement { shape, size, mask })
    }

    pub fn diamond(size: usize) -> Result<Self> {
        Self::new(KernelShape::Diamond, size)
    }

    pub fn full(size: usize) -> Result<Self> {
        Self::new(KernelShape::Full, size)
    }

    pub fn cross(size: usize) -> Result<Self> {
        Self::new(KernelShape::Cross, size)
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Whether cell `(row, col)` is active.
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.size + col]
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// `(dx, dy)` of every active cell relative to the center, row-major.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let c = ((self.size - 1) / 2) as isize;
        (0..self.size)
            .flat_map(|i| (0..self.size).map(move |j| (i, j)))
            .filter(|&(i, j)| self.contains(i, j))
            .map(|(i, j)| (j as isize - c, i as isize - c))
            .collect()
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        StructuringElement::diamond(5).expect("5 is odd")
    }
}

impl fmt::Display for StructuringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.shape.name(), self.size)
    }
}

/// Parses `shape:size`, e.g. `diamond:5`, `full:1`, `cross:3`.
impl FromStr for StructuringElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidKernel(s.to_string());
        let (shape, size) = s.split_once(':').ok_or_else(bad)?;
        let shape = match shape.trim().to_ascii_lowercase().as_str() {
            "diamond" => KernelShape::Diamond,
            "full" | "square" => KernelShape::Full,
            "cross" => KernelShape::Cross,
            _ => return Err(bad()),
        };
        let size: usize = size.trim().parse().map_err(|_| bad())?;
        StructuringElement::new(shape, size).map_err(|_| bad())
    }
}

/// Dilates the valid set by `kernel`; each output pixel takes the minimum
/// depth among the valid input pixels whose kernel footprint covers it.
///
/// Neighborhoods are clipped at the image border. Measured pixels are not
/// restored afterwards, so a nearer neighbor may overwrite one.
pub fn inverse_dilate(map: &DepthMap, kernel: &StructuringElement) -> DepthMap {
    let (width, height) = (map.width() as isize, map.height() as isize);
    let offsets = kernel.offsets();
    let src = map.as_slice();
    let mut out = vec![0.0f32; src.len()];

    for (i, &d) in src.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        let (qx, qy) = ((i as isize) % width, (i as isize) / width);
        for &(dx, dy) in &offsets {
            let (x, y) = (qx + dx, qy + dy);
            if x < 0 || y < 0 || x >= width || y >= height {
                continue;
            }
            let cell = &mut out[(y * width + x) as usize];
            if *cell == 0.0 || d < *cell {
                *cell = d;
            }
        }
    }
    DepthMap::from_vec_unchecked(map.width(), map.height(), out)
}

/// Projection followed by inverse dilation: one full frame of the depth pipeline.
pub fn densify_frame(
    cloud: &LidarPointCloud,
    calib: &CalibrationSet,
    cfg: &ProjectionConfig,
    kernel: &StructuringElement,
) -> DepthMap {
    inverse_dilate(&project(cloud, calib, cfg), kernel)
}
