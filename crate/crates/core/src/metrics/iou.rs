use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

/// Voxel edge used for reporting, meters.
pub const DEFAULT_VOXEL: f64 = 0.1;

pub type VoxelKey = (i64, i64, i64);

/// Voxel containing `p`; the grid is anchored at the origin with floor binning.
#[inline]
pub fn voxel_of(p: &Point3, voxel: f64) -> VoxelKey {
    (
        (p[0] / voxel).floor() as i64,
        (p[1] / voxel).floor() as i64,
        (p[2] / voxel).floor() as i64,
    )
}

pub fn occupied_voxels(cloud: &PointCloud, voxel: f64) -> HashSet<VoxelKey> {
    cloud.iter().map(|p| voxel_of(p, voxel)).collect()
}

/// Intersection over union of the occupied voxel sets.
///
/// Undefined, and reported as an error, when both clouds are empty.
pub fn voxel_iou(pred: &PointCloud, gt: &PointCloud, voxel: f64) -> Result<f64> {
    if !(voxel.is_finite() && voxel > 0.0) {
        return Err(Error::Config(format!(
            "voxel size must be positive, got {voxel}"
        )));
    }
    if pred.is_empty() && gt.is_empty() {
        return Err(Error::Input("IoU of two empty clouds is undefined".into()));
    }
    let a = occupied_voxels(pred, voxel);
    let b = occupied_voxels(gt, voxel);
    let inter = a.intersection(&b).count();
    let union = a.len() + b.len() - inter;
    Ok(inter as f64 / union as f64)
}
