//! Upsamples a 16-beam range image to 64 beams with randomly initialized
//! weights and reports the shapes and timing.

use std::time::Instant;

use rangesr::geometry::{BeamCalibration, RangeImage};
use rangesr::model::{build, forward, NetworkConfig, DEPTH_VARIANTS};

fn main() -> rangesr::Result<()> {
    let calib = BeamCalibration::uniform(16, 2.0, -24.8, 80.0, 1024)?;
    let values = (0..16 * 1024)
        .map(|i| 4.0 + (i % 1024) as f64 / 64.0 + (i / 1024) as f64)
        .collect();
    let img = RangeImage::new(values, calib)?;

    let cfg = NetworkConfig::desk(16, 1024);
    cfg.validate()?;
    let weights = build(&cfg, 42)?;
    println!("{cfg:?}");
    println!("{} parameters", weights.param_count());

    let start = Instant::now();
    let hr = forward(&img, &weights, &cfg)?;
    println!(
        "{}x{} -> {}x{} in {:.2?}",
        img.height(),
        img.width(),
        hr.height(),
        hr.width(),
        start.elapsed()
    );
    println!(
        "output beams {} (top {:.2} deg, bottom {:.2} deg)",
        hr.calibration().height(),
        hr.calibration().phi()[0].to_degrees(),
        hr.calibration().phi()[hr.height() - 1].to_degrees()
    );

    for (name, depths) in DEPTH_VARIANTS {
        let mut c = cfg.clone();
        c.depths = depths.to_vec();
        println!(
            "{name:>6} {depths:?}: {} parameters",
            build(&c, 0)?.param_count()
        );
    }
    Ok(())
}
