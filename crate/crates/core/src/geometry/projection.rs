use std::f64::consts::PI;

use super::{check_finite, BeamCalibration, PointCloud, RangeImage};
use crate::error::Result;

/// Elevation of a point as seen from a beam origin lifted by `delta` meters.
#[inline]
pub fn elevation(p: &[f64; 3], delta: f64) -> f64 {
    (p[2] - delta).atan2(p[0].hypot(p[1]))
}

/// Beam whose nominal angle is closest to the point's elevation.
///
/// Every beam is scanned because the elevation depends on the beam's own
/// vertical offset. Ties go to the lower index.
pub fn vote_row(p: &[f64; 3], calib: &BeamCalibration) -> usize {
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (b, (&phi, &delta)) in calib.phi().iter().zip(calib.delta()).enumerate() {
        let err = (phi - elevation(p, delta)).abs();
        if err < best_err {
            best = b;
            best_err = err;
        }
    }
    best
}

/// Azimuth column, floor-quantized and clamped to `[0, width - 1]`.
#[inline]
pub fn azimuth_column(x: f64, y: f64, width: usize) -> usize {
    let u = (1.0 - (y.atan2(x) + PI) / (2.0 * PI)) * width as f64;
    (u.floor().max(0.0) as usize).min(width - 1)
}

/// Projects a cloud onto the range image defined by `calib`.
///
/// Ranges are measured from the winning beam's origin and clamped to
/// `r_max`. The nearest point wins a contested pixel. Points at exactly zero
/// range have no representable value and are dropped.
pub fn project(cloud: &PointCloud, calib: &BeamCalibration) -> Result<RangeImage> {
    check_finite(&cloud.points)?;
    let width = calib.width();
    let r_max = calib.r_max();
    let mut img = RangeImage::empty(calib.clone());
    let values = img.values_mut();
    for p in &cloud.points {
        let v = vote_row(p, calib);
        let u = azimuth_column(p[0], p[1], width);
        let dz = p[2] - calib.delta()[v];
        let r = (p[0] * p[0] + p[1] * p[1] + dz * dz).sqrt().min(r_max);
        if r <= 0.0 {
            continue;
        }
        let slot = &mut values[v * width + u];
        if slot.is_nan() || r < *slot {
            *slot = r;
        }
    }
    Ok(img)
}

/// Pixel-center azimuth of column `u`.
#[inline]
pub fn column_azimuth(u: usize, width: usize) -> f64 {
    (1.0 - (u as f64 + 0.5) / width as f64) * 2.0 * PI - PI
}

/// Lifts every valid pixel back to 3D using its beam angle and offset.
pub fn back_project(img: &RangeImage) -> PointCloud {
    let calib = img.calibration();
    let width = img.width();
    let mut points = Vec::with_capacity(img.valid_count());
    for v in 0..img.height() {
        let (phi, delta) = (calib.phi()[v], calib.delta()[v]);
        let (sin_p, cos_p) = phi.sin_cos();
        for u in 0..width {
            if let Some(r) = img.get(v, u) {
                let yaw = column_azimuth(u, width);
                let rho = r * cos_p;
                points.push([rho * yaw.cos(), rho * yaw.sin(), delta + r * sin_p]);
            }
        }
    }
    PointCloud { points }
}
