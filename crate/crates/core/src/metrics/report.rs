use serde::{Deserialize, Serialize};

use super::{chamfer, range_mae, voxel_iou, DEFAULT_VOXEL};
use crate::error::Result;
use crate::geometry::{PointCloud, RangeImage};

/// Horizontal-radius band edges, meters.
pub const DEFAULT_BAND_EDGES: [f64; 6] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0];

/// Metrics restricted to points whose horizontal radius lies in `[min_m, max_m)`.
///
/// `cd` is null unless both sides have points there; `iou` is null when neither does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMetrics {
    pub min_m: f64,
    pub max_m: f64,
    pub pred_points: usize,
    pub gt_points: usize,
    pub cd: Option<f64>,
    pub iou: Option<f64>,
}

impl BandMetrics {
    pub fn is_populated(&self) -> bool {
        self.pred_points > 0 || self.gt_points > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Squared-form Chamfer distance, m^2.
    pub cd: f64,
    /// Voxel IoU at `voxel_m`.
    pub iou: f64,
    /// Range MAE normalized by `r_max`; present when range images were compared.
    pub mae: Option<f64>,
    pub voxel_m: f64,
    pub bands: Vec<BandMetrics>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Points of `cloud` with horizontal radius in `[lo, hi)`.
pub fn radius_band(cloud: &PointCloud, lo: f64, hi: f64) -> PointCloud {
    PointCloud {
        points: cloud
            .iter()
            .filter(|p| {
                let r = p[0].hypot(p[1]);
                r >= lo && r < hi
            })
            .copied()
            .collect(),
    }
}

/// Whole-cloud Chamfer and IoU plus the same metrics per distance band.
pub fn banded_report(pred: &PointCloud, gt: &PointCloud) -> Result<MetricsReport> {
    banded_report_with(pred, gt, &DEFAULT_BAND_EDGES, DEFAULT_VOXEL)
}

pub fn banded_report_with(
    pred: &PointCloud,
    gt: &PointCloud,
    edges: &[f64],
    voxel: f64,
) -> Result<MetricsReport> {
    let cd = chamfer(pred, gt)?;
    let iou = voxel_iou(pred, gt, voxel)?;
    let mut bands = Vec::with_capacity(edges.len().saturating_sub(1));
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let p = radius_band(pred, lo, hi);
        let g = radius_band(gt, lo, hi);
        let cd = if p.is_empty() || g.is_empty() {
            None
        } else {
            Some(chamfer(&p, &g)?)
        };
        let iou = if p.is_empty() && g.is_empty() {
            None
        } else {
            Some(voxel_iou(&p, &g, voxel)?)
        };
        bands.push(BandMetrics {
            min_m: lo,
            max_m: hi,
            pred_points: p.len(),
            gt_points: g.len(),
            cd,
            iou,
        });
    }
    Ok(MetricsReport {
        cd,
        iou,
        mae: None,
        voxel_m: voxel,
        bands,
    })
}

/// [`banded_report`] plus range MAE between the two images.
pub fn full_report(
    pred: &PointCloud,
    gt: &PointCloud,
    pred_img: &RangeImage,
    gt_img: &RangeImage,
) -> Result<MetricsReport> {
    let mut r = banded_report(pred, gt)?;
    r.mae = Some(range_mae(pred_img, gt_img)?);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(radius: f64, n: usize, z: f64) -> Vec<[f64; 3]> {
        (0..n)
            .map(|k| {
                let a = k as f64 / n as f64 * std::f64::consts::TAU;
                [radius * a.cos(), radius * a.sin(), z]
            })
            .collect()
    }

    #[test]
    fn single_band_populated() {
        let c = PointCloud::new(ring(5.0, 30, -1.0)).unwrap();
        let r = banded_report(&c, &c).unwrap();
        assert_eq!(r.bands.len(), 5);
        assert!(r.bands[0].is_populated());
        assert_eq!(r.bands[0].cd, Some(0.0));
        assert_eq!(r.bands[0].iou, Some(1.0));
        assert!(r.bands[1..]
            .iter()
            .all(|b| !b.is_populated() && b.cd.is_none() && b.iou.is_none()));
    }

    #[test]
    fn json_has_explicit_nulls() {
        let c = PointCloud::new(ring(5.0, 10, 0.0)).unwrap();
        let json = banded_report(&c, &c).unwrap().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["bands"][3]["cd"].is_null());
        assert!(v["mae"].is_null());
        assert_eq!(v["bands"][0]["iou"], 1.0);
    }

    #[test]
    fn two_bands_match_manual_partition() {
        let mut gt = ring(5.0, 20, 0.0);
        gt.extend(ring(25.0, 40, 0.5));
        let mut pred = ring(5.2, 15, 0.1);
        pred.extend(ring(24.5, 33, 0.4));
        let (gt, pred) = (PointCloud::new(gt).unwrap(), PointCloud::new(pred).unwrap());
        let r = banded_report(&pred, &gt).unwrap();
        let near = chamfer(
            &PointCloud::new(pred.points[..15].to_vec()).unwrap(),
            &PointCloud::new(gt.points[..20].to_vec()).unwrap(),
        )
        .unwrap();
        let far = chamfer(
            &PointCloud::new(pred.points[15..].to_vec()).unwrap(),
            &PointCloud::new(gt.points[20..].to_vec()).unwrap(),
        )
        .unwrap();
        assert_eq!(r.bands[0].cd, Some(near));
        assert_eq!(r.bands[2].cd, Some(far));
        assert!(r.bands[1].cd.is_none() && r.bands[3].cd.is_none());
    }
}
