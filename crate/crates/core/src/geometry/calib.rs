use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-beam vertical geometry of a spinning LiDAR plus the image width.
///
/// `phi[b]` is the elevation angle of beam `b` in radians, strictly
/// descending from the top beam (row 0) to the bottom beam. `delta[b]` is the
/// vertical offset of that beam's origin in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamCalibration {
    phi: Vec<f64>,
    delta: Vec<f64>,
    r_max: f64,
    width: usize,
}

/// On-disk calibration layout. Angles are in degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub phi_deg: Vec<f64>,
    pub delta_m: Vec<f64>,
    pub r_max_m: f64,
    pub width: usize,
}

impl BeamCalibration {
    pub fn new(phi: Vec<f64>, delta: Vec<f64>, r_max: f64, width: usize) -> Result<Self> {
        if phi.len() < 2 {
            return Err(Error::Config(format!(
                "calibration needs at least 2 beams, got {}",
                phi.len()
            )));
        }
        if phi.len() != delta.len() {
            return Err(Error::Config(format!(
                "phi has {} entries but delta has {}",
                phi.len(),
                delta.len()
            )));
        }
        if width < 4 {
            return Err(Error::Config(format!("width must be >= 4, got {width}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Config(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        if let Some(i) = phi.iter().chain(&delta).position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite calibration entry {i}")));
        }
        if let Some(b) = phi.windows(2).position(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!(
                "beam angles must be strictly descending (beam {} -> {})",
                b,
                b + 1
            )));
        }
        Ok(Self {
            phi,
            delta,
            r_max,
            width,
        })
    }

    /// Uniform fan of `beams` elevations from `top_deg` down to `bottom_deg`, zero offsets.
    pub fn uniform(
        beams: usize,
        top_deg: f64,
        bottom_deg: f64,
        r_max: f64,
        width: usize,
    ) -> Result<Self> {
        if beams < 2 {
            return Err(Error::Config(format!("need at least 2 beams, got {beams}")));
        }
        let step = (top_deg - bottom_deg) / (beams - 1) as f64;
        let phi = (0..beams)
            .map(|b| (top_deg - step * b as f64).to_radians())
            .collect();
        Self::new(phi, vec![0.0; beams], r_max, width)
    }

    /// 64-beam fan from +2.0 deg to -24.8 deg, 80 m range, 1024 columns.
    pub fn hdl64_like() -> Self {
        Self::uniform(64, 2.0, -24.8, 80.0, 1024).expect("built-in calibration is valid")
    }

    pub fn from_file_repr(file: CalibrationFile) -> Result<Self> {
        let phi = file.phi_deg.iter().map(|d| d.to_radians()).collect();
        Self::new(phi, file.delta_m, file.r_max_m, file.width)
    }

    pub fn to_file_repr(&self) -> CalibrationFile {
        CalibrationFile {
            phi_deg: self.phi.iter().map(|r| r.to_degrees()).collect(),
            delta_m: self.delta.clone(),
            r_max_m: self.r_max,
            width: self.width,
        }
    }

    /// Reads a JSON calibration file. Any failure is a configuration error.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read calibration {}: {e}", path.display()))
        })?;
        let file: CalibrationFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("malformed calibration {}: {e}", path.display())))?;
        Self::from_file_repr(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_repr()).expect("calibration serializes")
    }

    pub fn height(&self) -> usize {
        self.phi.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Largest angular gap between adjacent beams, radians.
    pub fn max_beam_gap(&self) -> f64 {
        self.phi.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }

    /// Keeps every `step`-th beam starting from the top one.
    ///
    /// Used to simulate a sparse sensor from a dense calibration.
    pub fn select_beams(&self, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::Config("beam step must be >= 1".into()));
        }
        let phi = self.phi.iter().copied().step_by(step).collect();
        let delta = self.delta.iter().copied().step_by(step).collect();
        Self::new(phi, delta, self.r_max, self.width)
    }

    /// Calibration of the super-resolved image.
    ///
    /// Each gap between consecutive beams receives `s_v - 1` beams linearly
    /// interpolated in angle and offset. The `s_v - 1` beams after the last
    /// source beam continue the last gap, so the result has exactly
    /// `s_v * H` beams and `s_h * W` columns.
    pub fn upsampled(&self, s_v: usize, s_h: usize) -> Result<Self> {
        if s_v == 0 || s_h == 0 {
            return Err(Error::Config(format!(
                "upscale factors must be >= 1, got {s_v}x{s_h}"
            )));
        }
        let h = self.height();
        let mut phi = Vec::with_capacity(h * s_v);
        let mut delta = Vec::with_capacity(h * s_v);
        for b in 0..h {
            // the last beam extrapolates along the previous gap
            let (p0, p1, d0, d1) = if b + 1 < h {
                (
                    self.phi[b],
                    self.phi[b + 1],
                    self.delta[b],
                    self.delta[b + 1],
                )
            } else {
                let gp = self.phi[b] - self.phi[b - 1];
                let gd = self.delta[b] - self.delta[b - 1];
                (
                    self.phi[b],
                    self.phi[b] + gp,
                    self.delta[b],
                    self.delta[b] + gd,
                )
            };
            for k in 0..s_v {
                let t = k as f64 / s_v as f64;
                phi.push(p0 + t * (p1 - p0));
                delta.push(d0 + t * (d1 - d0));
            }
        }
        Self::new(phi, delta, self.r_max, self.width * s_h)
    }
}

impl Default for BeamCalibration {
    fn default() -> Self {
        Self::hdl64_like()
    }
}
