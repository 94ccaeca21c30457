//! Evaluation metrics: Chamfer distance, voxel IoU, range MAE and
//! distance-banded breakdowns.

mod chamfer;
mod iou;
mod mae;
mod report;

pub use chamfer::{chamfer, NearestIndex};
pub use iou::{occupied_voxels, voxel_iou, voxel_of, VoxelKey, DEFAULT_VOXEL};
pub use mae::range_mae;
pub use report::{
    banded_report, banded_report_with, full_report, radius_band, BandMetrics, MetricsReport,
    DEFAULT_BAND_EDGES,
};
