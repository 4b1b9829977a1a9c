//! Readers and writers for the KITTI Odometry layout and 16-bit depth PNGs.
//!
//! A sequence directory looks like
//!
//! ```text
//! calib.txt
//! times.txt
//! velodyne/000000.bin ...
//! image_2/000000.png ...   (optional, only headers are read)
//! ```

mod calib;
mod depth_png;
mod poses;
mod scan;
mod sequence;
mod times;

pub use calib::{load_kitti_calib, parse_kitti_calib, CalibrationSet, Camera, ROTATION_TOLERANCE};
pub use depth_png::{
    decode_depth_png, encode_depth_png, read_depth_png, write_depth_png, DEPTH_SCALE,
};
pub use poses::{load_trajectory, parse_trajectory, write_trajectory, Trajectory};
pub use scan::{
    load_velodyne_bin, parse_velodyne_bytes, write_velodyne_bin, LidarPoint, LidarPointCloud,
};
pub use sequence::{frame_name, png_dimensions, Sequence};
pub use times::load_times;
