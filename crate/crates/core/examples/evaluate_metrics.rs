//! Compares a jittered, thinned copy of a point cloud against the original
//! with Chamfer distance, voxel IoU and per-distance bands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangesr::geometry::PointCloud;
use rangesr::metrics::{banded_report, chamfer, voxel_iou, DEFAULT_VOXEL};

fn main() -> rangesr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gt: Vec<[f64; 3]> = (0..20_000)
        .map(|_| {
            let r: f64 = rng.random_range(2.0..55.0);
            let a: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            [r * a.cos(), r * a.sin(), rng.random_range(-1.8..0.5)]
        })
        .collect();
    let pred: Vec<[f64; 3]> = gt
        .iter()
        .step_by(2)
        .map(|p| p.map(|v| v + rng.random_range(-0.03..0.03)))
        .collect();
    let (gt, pred) = (PointCloud::new(gt)?, PointCloud::new(pred)?);

    println!("chamfer  {:.5} m^2", chamfer(&pred, &gt)?);
    println!(
        "IoU      {:.4} at {DEFAULT_VOXEL} m",
        voxel_iou(&pred, &gt, DEFAULT_VOXEL)?
    );
    println!("IoU      {:.4} at 0.5 m", voxel_iou(&pred, &gt, 0.5)?);
    println!("{}", banded_report(&pred, &gt)?.to_json());
    Ok(())
}
