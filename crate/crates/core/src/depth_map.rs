//! Per-pixel depth images with a zero sentinel for missing measurements.

use crate::error::{Error, Result};

/// Depth ceiling used by default throughout the pipeline, in meters.
///
/// KITTI depth ground truth does not go beyond this range.
pub const DEFAULT_MAX_DEPTH: f32 = 80.0;

/// A row-major depth image in meters.
///
/// A pixel is valid iff its stored depth is strictly positive. Invalid pixels
/// always hold exactly `0.0`, so two maps with equal masks and depths are
/// bit-identical and serialize identically.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    depth: Vec<f32>,
}

impl DepthMap {
    /// All-invalid map.
    pub fn empty(width: u32, height: u32) -> Self {
        DepthMap {
            width,
            height,
            depth: vec![0.0; width as usize * height as usize],
        }
    }

    /// Builds a map from raw row-major values; `0.0` marks invalid pixels.
    ///
    /// Negative, NaN and infinite values are rejected.
    pub fn from_vec(width: u32, height: u32, depth: Vec<f32>) -> Result<Self> {
        let n = width as usize * height as usize;
        if depth.len() != n {
            return Err(Error::Shape(format!(
                "{} values for a {width}x{height} map",
                depth.len()
            )));
        }
        if let Some((i, d)) = depth
            .iter()
            .enumerate()
            .find(|(_, d)| !d.is_finite() || **d < 0.0)
        {
            return Err(Error::InvalidDepthMap(format!(
                "pixel {i} holds {d}; depths must be finite and non-negative"
            )));
        }
        // -0.0 normalizes to the canonical sentinel
        let depth = depth
            .into_iter()
            .map(|d| if d == 0.0 { 0.0 } else { d })
            .collect();
        Ok(DepthMap {
            width,
            height,
            depth,
        })
    }

    pub(crate) fn from_vec_unchecked(width: u32, height: u32, depth: Vec<f32>) -> Self {
        debug_assert_eq!(depth.len(), width as usize * height as usize);
        DepthMap {
            width,
            height,
            depth,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Depth at `(x, y)`, `None` when the pixel is invalid.
    pub fn get(&self, x: u32, y: u32) -> Option<f32> {
        let d = self.depth[self.index(x, y)];
        (d > 0.0).then_some(d)
    }

    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.depth[self.index(x, y)] > 0.0
    }

    /// Sets a pixel; `None` or a zero depth invalidates it.
    ///
    /// Panics on a negative or non-finite depth.
    pub fn set(&mut self, x: u32, y: u32, depth: Option<f32>) {
        let d = depth.unwrap_or(0.0);
        assert!(d.is_finite() && d >= 0.0, "invalid depth value {d}");
        let i = self.index(x, y);
        self.depth[i] = if d == 0.0 { 0.0 } else { d };
    }

    /// Raw row-major depths, `0.0` where invalid.
    pub fn as_slice(&self) -> &[f32] {
        &self.depth
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.depth
    }

    pub fn valid_mask(&self) -> Vec<bool> {
        self.depth.iter().map(|&d| d > 0.0).collect()
    }

    pub fn valid_count(&self) -> usize {
        self.depth.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn max_depth(&self) -> Option<f32> {
        self.depth
            .iter()
            .copied()
            .filter(|&d| d > 0.0)
            .reduce(f32::max)
    }
}

/// Fraction of invalid pixels, in `[0, 1]`. An empty (0x0) map counts as fully sparse.
pub fn sparsity(map: &DepthMap) -> f64 {
    if map.is_empty() {
        return 1.0;
    }
    (map.len() - map.valid_count()) as f64 / map.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparsity_all_invalid() {
        assert_eq!(sparsity(&DepthMap::empty(16, 8)), 1.0);
    }

    #[test]
    fn sparsity_all_valid() {
        let m = DepthMap::from_vec(4, 4, vec![1.5; 16]).unwrap();
        assert_eq!(sparsity(&m), 0.0);
    }

    #[test]
    fn sparsity_quarter_valid() {
        let mut m = DepthMap::empty(64, 64);
        for i in 0..1024u32 {
            m.set(i % 64, i / 64, Some(3.0));
        }
        assert_eq!(m.valid_count(), 1024);
        assert_eq!(sparsity(&m), 0.75);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(DepthMap::from_vec(2, 1, vec![1.0, -1.0]).is_err());
        assert!(DepthMap::from_vec(2, 1, vec![1.0, f32::NAN]).is_err());
        assert!(DepthMap::from_vec(2, 1, vec![f32::INFINITY, 1.0]).is_err());
        assert!(matches!(
            DepthMap::from_vec(2, 2, vec![1.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn negative_zero_is_canonical() {
        let m = DepthMap::from_vec(2, 1, vec![-0.0, 2.0]).unwrap();
        assert_eq!(m.as_slice()[0].to_bits(), 0.0f32.to_bits());
        assert_eq!(m.get(0, 0), None);
        assert_eq!(m.get(1, 0), Some(2.0));
    }
}
