//! Point cloud <-> range image conversion.
//!
//! Rows are picked by voting for the beam whose nominal elevation best
//! explains each point, columns by floor-quantized azimuth. Hole pixels are
//! `NaN` in memory and `0` on disk.

mod calib;
mod cloud;
mod holes;
mod projection;
mod range_image;

pub use calib::{BeamCalibration, CalibrationFile};
pub(crate) use cloud::check_finite;
pub use cloud::{load_scan, Point3, PointCloud, ScanFormat, KITTI_RECORD_BYTES};
pub use holes::{hole_compensate, WindowShape};
pub use projection::{azimuth_column, back_project, column_azimuth, elevation, project, vote_row};
pub use range_image::{RangeImage, RIMG_HEADER_BYTES, RIMG_MAGIC};
