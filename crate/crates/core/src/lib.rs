//! Dense camera depth maps from LiDAR sweeps, for RGB-D style visual SLAM.
//!
//! Each sweep is projected into the camera image with a per-pixel z-buffer
//! ([`project`]) and then spread by an inverse morphological dilation
//! ([`inverse_dilate`], 5x5 diamond by default). Results are written as
//! 16-bit PNGs with a depth factor of 256, the format RGB-D SLAM front ends
//! read directly.
//!
//! Evaluation helpers cover depth accuracy ([`depth_eval`]), KITTI odometry
//! drift ([`traj_eval`]) and per-stage latency ([`bench`]).

pub mod bench;
pub mod cli;
pub mod densify;
pub mod depth_eval;
mod depth_map;
mod error;
pub mod kitti_io;
pub mod projection;
pub mod synthetic;
pub mod traj_eval;

pub use densify::{densify_frame, inverse_dilate, KernelShape, StructuringElement};
pub use depth_map::{sparsity, DepthMap, DEFAULT_MAX_DEPTH};
pub use error::{Error, Result};
pub use projection::{project, ProjectionConfig};
