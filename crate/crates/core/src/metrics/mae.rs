use crate::error::{Error, Result};
use crate::geometry::RangeImage;

/// Mean absolute range error over valid ground-truth pixels, divided by `r_max`.
///
/// A hole in `pred` where `gt` is valid counts as a prediction of 0.
pub fn range_mae(pred: &RangeImage, gt: &RangeImage) -> Result<f64> {
    if (pred.height(), pred.width()) != (gt.height(), gt.width()) {
        return Err(Error::Input(format!(
            "cannot compare {}x{} with {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    let r_max = gt.calibration().r_max();
    let mut sum = 0.0;
    let mut n = 0usize;
    for (&p, &g) in pred.values().iter().zip(gt.values()) {
        if g.is_nan() {
            continue;
        }
        let p = if p.is_nan() { 0.0 } else { p };
        sum += (p - g).abs() / r_max;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Input("ground truth has no valid pixels".into()));
    }
    Ok(sum / n as f64)
}
