use std::io::Cursor;

use image::{ImageBuffer, ImageFormat, Luma};

use super::BeamCalibration;
use crate::error::{Error, Result};

pub const RIMG_MAGIC: &[u8; 4] = b"RIMG";
pub const RIMG_HEADER_BYTES: usize = 8;

/// Row-major `H x W` grid of ranges in meters. Holes are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    values: Vec<f64>,
    calib: BeamCalibration,
}

impl RangeImage {
    /// Image with every pixel a hole.
    pub fn empty(calib: BeamCalibration) -> Self {
        let n = calib.height() * calib.width();
        Self {
            values: vec![f64::NAN; n],
            calib,
        }
    }

    /// Wraps raw values. `NaN` marks a hole; every other value must lie in `(0, r_max]`.
    pub fn new(values: Vec<f64>, calib: BeamCalibration) -> Result<Self> {
        let (h, w) = (calib.height(), calib.width());
        if values.len() != h * w {
            return Err(Error::Input(format!(
                "range image has {} values, calibration expects {h}x{w}",
                values.len()
            )));
        }
        let r_max = calib.r_max();
        if let Some(i) = values
            .iter()
            .position(|&v| !v.is_nan() && !(v > 0.0 && v <= r_max))
        {
            return Err(Error::Input(format!(
                "pixel ({}, {}) holds {} outside (0, {r_max}]",
                i / w,
                i % w,
                values[i]
            )));
        }
        Ok(Self { values, calib })
    }

    pub fn height(&self) -> usize {
        self.calib.height()
    }

    pub fn width(&self) -> usize {
        self.calib.width()
    }

    pub fn calibration(&self) -> &BeamCalibration {
        &self.calib
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Range at row `v`, column `u`, or `None` for a hole.
    pub fn get(&self, v: usize, u: usize) -> Option<f64> {
        let r = self.values[v * self.width() + u];
        (!r.is_nan()).then_some(r)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_hole(&self, v: usize, u: usize) -> bool {
        self.values[v * self.width() + u].is_nan()
    }

    pub fn hole_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    pub fn valid_count(&self) -> usize {
        self.values.len() - self.hole_count()
    }

    /// Binary export: `RIMG`, u16 H, u16 W, then H*W little-endian f32 ranges, holes as 0.
    pub fn to_rimg_bytes(&self) -> Result<Vec<u8>> {
        let (h, w) = (self.height(), self.width());
        let (h16, w16) = match (u16::try_from(h), u16::try_from(w)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                return Err(Error::Config(format!(
                    "image {h}x{w} exceeds the 65535 limit of the RIMG header"
                )))
            }
        };
        let mut out = Vec::with_capacity(RIMG_HEADER_BYTES + 4 * h * w);
        out.extend_from_slice(RIMG_MAGIC);
        out.extend_from_slice(&h16.to_le_bytes());
        out.extend_from_slice(&w16.to_le_bytes());
        for &v in &self.values {
            let f = if v.is_nan() { 0.0f32 } else { v as f32 };
            out.extend_from_slice(&f.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses an RIMG buffer; the header must agree with `calib`.
    pub fn from_rimg_bytes(bytes: &[u8], calib: BeamCalibration) -> Result<Self> {
        if bytes.len() < RIMG_HEADER_BYTES || &bytes[..4] != RIMG_MAGIC {
            return Err(Error::Parse {
                offset: 0,
                message: "missing RIMG header".into(),
            });
        }
        let h = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
        let w = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
        if (h, w) != (calib.height(), calib.width()) {
            return Err(Error::Config(format!(
                "RIMG is {h}x{w} but calibration is {}x{}",
                calib.height(),
                calib.width()
            )));
        }
        let expected = RIMG_HEADER_BYTES + 4 * h * w;
        if bytes.len() != expected {
            return Err(Error::Parse {
                offset: bytes.len().min(expected) as u64,
                message: format!("RIMG payload is {} bytes, expected {expected}", bytes.len()),
            });
        }
        let r_max = calib.r_max();
        let mut values = Vec::with_capacity(h * w);
        for (i, chunk) in bytes[RIMG_HEADER_BYTES..].chunks_exact(4).enumerate() {
            let f = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
            let offset = (RIMG_HEADER_BYTES + 4 * i) as u64;
            if f == 0.0 {
                values.push(f64::NAN);
            } else if f > 0.0 && f <= r_max * (1.0 + 1e-6) {
                // f32 storage may round a clamped range just past r_max
                values.push(f.min(r_max));
            } else {
                return Err(Error::Parse {
                    offset,
                    message: format!("range {f} outside (0, {r_max}]"),
                });
            }
        }
        Self::new(values, calib)
    }

    /// 16-bit grayscale PNG for viewing: `(0, r_max]` maps linearly onto `[1, 65535]`, holes are 0.
    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let (h, w) = (self.height() as u32, self.width() as u32);
        let r_max = self.calib.r_max();
        let pixels: Vec<u16> = self
            .values
            .iter()
            .map(|&v| {
                if v.is_nan() {
                    0
                } else {
                    (1.0 + (v / r_max) * 65534.0).round().clamp(1.0, 65535.0) as u16
                }
            })
            .collect();
        let img: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(w, h, pixels).expect("buffer matches dims");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Input(format!("PNG encoding failed: {e}")))?;
        Ok(out.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calib() -> BeamCalibration {
        BeamCalibration::uniform(2, 0.0, -1.0, 80.0, 4).unwrap()
    }

    #[test]
    fn rimg_layout_is_bit_exact() {
        let mut img = RangeImage::empty(calib());
        img.values_mut()[1] = 2.5;
        let bytes = img.to_rimg_bytes().unwrap();
        assert_eq!(&bytes[..8], b"RIMG\x02\x00\x04\x00");
        assert_eq!(bytes.len(), 8 + 4 * 8);
        assert_eq!(&bytes[8..12], &0f32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2.5f32.to_le_bytes());
        let back = RangeImage::from_rimg_bytes(&bytes, calib()).unwrap();
        assert_eq!(back.get(0, 1), Some(2.5));
        assert_eq!(back.hole_count(), 7);
    }

    #[test]
    fn rimg_rejects_dimension_mismatch_and_truncation() {
        let bytes = RangeImage::empty(calib()).to_rimg_bytes().unwrap();
        let other = BeamCalibration::uniform(2, 0.0, -1.0, 80.0, 8).unwrap();
        assert!(matches!(
            RangeImage::from_rimg_bytes(&bytes, other),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RangeImage::from_rimg_bytes(&bytes[..bytes.len() - 1], calib()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn new_enforces_range_bounds() {
        assert!(RangeImage::new(vec![f64::NAN; 8], calib()).is_ok());
        let mut v = vec![f64::NAN; 8];
        v[3] = 81.0;
        assert!(RangeImage::new(v.clone(), calib()).is_err());
        v[3] = 0.0;
        assert!(RangeImage::new(v, calib()).is_err());
    }

    #[test]
    fn png_encodes() {
        let mut img = RangeImage::empty(calib());
        img.values_mut()[0] = 80.0;
        let png = img.to_png_bytes().unwrap();
        assert_eq!(&png[1..4], b"PNG");
        let decoded = image::load_from_memory(&png).unwrap().into_luma16();
        assert_eq!(decoded.get_pixel(0, 0).0[0], 65535);
        assert_eq!(decoded.get_pixel(1, 0).0[0], 0);
    }
}
