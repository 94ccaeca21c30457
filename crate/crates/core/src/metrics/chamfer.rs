use kiddo::{ImmutableKdTree, SquaredEuclidean};

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

#[inline]
pub(crate) fn sq_dist(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Nearest-neighbor index over a fixed point set.
pub struct NearestIndex<'a> {
    points: &'a [Point3],
    tree: ImmutableKdTree<f64, 3>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [Point3]) -> Self {
        Self {
            points,
            tree: ImmutableKdTree::new_from_slice(points),
        }
    }

    /// Squared distance from `q` to its nearest indexed point.
    ///
    /// The winning point's distance is recomputed with the same arithmetic
    /// as a plain pairwise scan.
    pub fn nearest_sq(&self, q: &Point3) -> f64 {
        let nn = self.tree.nearest_one::<SquaredEuclidean>(q);
        sq_dist(q, &self.points[nn.item as usize])
    }
}

fn mean_nearest_sq(from: &[Point3], to: &NearestIndex<'_>) -> f64 {
    from.iter().map(|p| to.nearest_sq(p)).sum::<f64>() / from.len() as f64
}

/// Symmetric Chamfer distance in its squared form:
/// mean nearest squared distance from `pred` to `gt` plus the same from `gt` to `pred`.
pub fn chamfer(pred: &PointCloud, gt: &PointCloud) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::Input(format!(
            "chamfer needs non-empty clouds (pred {}, gt {})",
            pred.len(),
            gt.len()
        )));
    }
    let pred_index = NearestIndex::new(&pred.points);
    let gt_index = NearestIndex::new(&gt.points);
    Ok(mean_nearest_sq(&pred.points, &gt_index) + mean_nearest_sq(&gt.points, &pred_index))
}
