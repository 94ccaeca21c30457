//! Projects a synthetic street scan into a range image and back.
//!
//! ```text
//! cargo run --example project_scan
//! ```

use rangesr::geometry::{back_project, project, BeamCalibration, PointCloud};

/// Ray-cast a flat road 1.73 m below the sensor between two walls 12 m apart.
fn street(calib: &BeamCalibration, columns: usize) -> PointCloud {
    let mut points = Vec::new();
    for &phi in calib.phi() {
        for k in 0..columns {
            let az =
                (k as f64 + 0.5) / columns as f64 * std::f64::consts::TAU - std::f64::consts::PI;
            let (dx, dy, dz) = (phi.cos() * az.cos(), phi.cos() * az.sin(), phi.sin());
            let mut t = f64::INFINITY;
            if dz < 0.0 {
                t = t.min(-1.73 / dz);
            }
            if dy.abs() > 1e-9 {
                t = t.min(6.0 / dy.abs());
            }
            if t < calib.r_max() {
                points.push([t * dx, t * dy, t * dz]);
            }
        }
    }
    PointCloud::new(points).unwrap()
}

fn main() -> rangesr::Result<()> {
    let calib = BeamCalibration::hdl64_like();
    let cloud = street(&calib, 2048);
    let img = project(&cloud, &calib)?;
    println!(
        "{} points -> {}x{} image, {} valid pixels, {} holes",
        cloud.len(),
        img.height(),
        img.width(),
        img.valid_count(),
        img.hole_count()
    );

    let back = back_project(&img);
    println!("back-projected {} points", back.len());

    let rimg = img.to_rimg_bytes()?;
    let png = img.to_png_bytes()?;
    println!("RIMG {} bytes, PNG preview {} bytes", rimg.len(), png.len());
    Ok(())
}
