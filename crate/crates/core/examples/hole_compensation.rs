//! Drops a third of the pixels of a range image and fills them back with
//! vertical and horizontal windows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangesr::geometry::{hole_compensate, BeamCalibration, RangeImage, WindowShape};

fn main() -> rangesr::Result<()> {
    let calib = BeamCalibration::uniform(32, 2.0, -24.8, 80.0, 512)?;
    let (h, w) = (calib.height(), calib.width());
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // smooth "truth": range grows with column and falls with row
    let truth: Vec<f64> = (0..h * w)
        .map(|i| 5.0 + (i % w) as f64 * 0.05 + (h - i / w) as f64 * 0.3)
        .collect();
    let sparse: Vec<f64> = truth
        .iter()
        .map(|&r| if rng.random_bool(0.33) { f64::NAN } else { r })
        .collect();
    let img = RangeImage::new(sparse, calib)?;

    for window in [WindowShape::VERTICAL, WindowShape::HORIZONTAL] {
        let filled = hole_compensate(&img, window)?;
        let (mut err, mut n) = (0.0, 0);
        for (i, (&a, &b)) in img.values().iter().zip(filled.values()).enumerate() {
            if a.is_nan() && !b.is_nan() {
                err += (b - truth[i]).abs();
                n += 1;
            }
        }
        println!(
            "{window}: holes {} -> {}, mean fill error {:.3} m over {n} pixels",
            img.hole_count(),
            filled.hole_count(),
            err / n as f64
        );
    }
    Ok(())
}
