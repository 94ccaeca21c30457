//! Full chain on a synthetic 16-beam scan: project, fill holes, upsample 4x
//! vertically, lift back to 3D and score against the 64-beam scan of the
//! same scene.

use rangesr::geometry::{
    back_project, hole_compensate, project, BeamCalibration, PointCloud, WindowShape,
};
use rangesr::metrics::full_report;
use rangesr::model::{build, forward, NetworkConfig};

fn scene(calib: &BeamCalibration) -> PointCloud {
    let mut points = Vec::new();
    let w = calib.width();
    for &phi in calib.phi() {
        for k in 0..w {
            let az = (k as f64 + 0.5) / w as f64 * std::f64::consts::TAU - std::f64::consts::PI;
            let (dx, dy, dz) = (phi.cos() * az.cos(), phi.cos() * az.sin(), phi.sin());
            let mut t = f64::INFINITY;
            if dz < 0.0 {
                t = t.min(-1.73 / dz);
            }
            if dy.abs() > 1e-9 {
                t = t.min(7.5 / dy.abs());
            }
            // a pole ahead of the sensor
            if (az - 0.3).abs() < 0.02 {
                t = t.min(9.0);
            }
            if t < calib.r_max() {
                points.push([t * dx, t * dy, t * dz]);
            }
        }
    }
    PointCloud::new(points).unwrap()
}

fn main() -> rangesr::Result<()> {
    let dense = BeamCalibration::uniform(64, 2.0, -24.8, 80.0, 1024)?;
    let sparse = dense.select_beams(4)?;
    let gt = scene(&dense);
    let input = scene(&sparse);

    let img = hole_compensate(&project(&input, &sparse)?, WindowShape::VERTICAL)?;
    let cfg = NetworkConfig::desk(img.height(), img.width());
    let weights = build(&cfg, 0)?;
    let hr = forward(&img, &weights, &cfg)?;
    let pred = back_project(&hr);
    let gt_img = project(&gt, hr.calibration())?;

    println!(
        "input {} points ({}x{}), output {} points ({}x{}), ground truth {} points",
        input.len(),
        img.height(),
        img.width(),
        pred.len(),
        hr.height(),
        hr.width(),
        gt.len()
    );
    // untrained weights: the numbers show the plumbing, not model quality
    let report = full_report(&pred, &gt, &hr, &gt_img)?;
    println!("{}", report.to_json());
    Ok(())
}
