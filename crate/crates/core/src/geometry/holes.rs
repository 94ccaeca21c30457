use std::fmt;
use std::str::FromStr;

use super::RangeImage;
use crate::error::{Error, Result};

/// Neighborhood used to fill a hole, centered on the hole pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowShape {
    pub rows: usize,
    pub cols: usize,
}

impl WindowShape {
    /// One pixel above and one below.
    pub const VERTICAL: WindowShape = WindowShape { rows: 3, cols: 1 };
    /// One pixel left and one right.
    pub const HORIZONTAL: WindowShape = WindowShape { rows: 1, cols: 3 };

    fn check(self) -> Result<()> {
        if self == Self::VERTICAL || self == Self::HORIZONTAL {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "unsupported hole window {self}; use 3x1 or 1x3"
            )))
        }
    }
}

impl Default for WindowShape {
    fn default() -> Self {
        Self::VERTICAL
    }
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for WindowShape {
    type Err = Error;

    /// Parses `ROWSxCOLS`, e.g. `3x1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse window shape `{s}`"));
        let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let shape = WindowShape {
            rows: r.trim().parse().map_err(|_| bad())?,
            cols: c.trim().parse().map_err(|_| bad())?,
        };
        shape.check()?;
        Ok(shape)
    }
}

/// Fills holes with the plain average of their valid window neighbors.
///
/// One pass, reading only the input grid, so filled values never feed other
/// fills. Holes without a valid neighbor stay holes; valid pixels are copied
/// as-is. Windows are truncated at the image border.
pub fn hole_compensate(img: &RangeImage, window: WindowShape) -> Result<RangeImage> {
    window.check()?;
    let (h, w) = (img.height(), img.width());
    let (dr, dc) = (window.rows / 2, window.cols / 2);
    let mut out = img.clone();
    let values = out.values_mut();
    for v in 0..h {
        for u in 0..w {
            if !img.is_hole(v, u) {
                continue;
            }
            let mut sum = 0.0;
            let mut count = 0u32;
            for nv in v.saturating_sub(dr)..=(v + dr).min(h - 1) {
                for nu in u.saturating_sub(dc)..=(u + dc).min(w - 1) {
                    if (nv, nu) == (v, u) {
                        continue;
                    }
                    if let Some(r) = img.get(nv, nu) {
                        sum += r;
                        count += 1;
                    }
                }
            }
            if count > 0 {
                values[v * w + u] = sum / count as f64;
            }
        }
    }
    Ok(out)
}
