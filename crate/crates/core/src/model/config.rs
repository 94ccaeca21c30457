use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the encoder-decoder network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Input range-image rows.
    pub height: usize,
    /// Input range-image columns.
    pub width: usize,
    /// VSS blocks per encoder stage; the stage count is `depths.len()`.
    pub depths: Vec<usize>,
    /// Channel width of the first stage; doubles at every downsampling.
    pub base_dim: usize,
    /// Patch-embedding kernel and stride `(rows, cols)`.
    pub patch: (usize, usize),
    /// Output/input size ratio `(rows, cols)`.
    pub upscale: (usize, usize),
    /// State dimension of every scan.
    pub ssm_state: usize,
}

/// VSS blocks in every decoder stage.
pub const DECODER_DEPTH: usize = 1;

/// Named depth presets, lightest first.
pub const DEPTH_VARIANTS: [(&str, [usize; 4]); 4] = [
    ("tiny", [2, 2, 2, 2]),
    ("small", [2, 2, 9, 2]),
    ("medium", [2, 2, 12, 2]),
    ("large", [2, 2, 27, 2]),
];

impl NetworkConfig {
    /// Desk-scale defaults for an `height x width` input: four stages of two
    /// blocks, width 16, state 8, `(1, 4)` patches and 4x vertical upscaling.
    pub fn desk(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            depths: vec![2, 2, 2, 2],
            base_dim: 16,
            patch: (1, 4),
            upscale: (4, 1),
            ssm_state: 8,
        }
    }

    pub fn stages(&self) -> usize {
        self.depths.len()
    }

    /// Channel width of encoder stage `i`.
    pub fn stage_dim(&self, i: usize) -> usize {
        self.base_dim << i
    }

    /// Total pixel-shuffle factor of the output head: undoes the patch
    /// stride and applies the upscale.
    pub fn head_factor(&self) -> (usize, usize) {
        (self.patch.0 * self.upscale.0, self.patch.1 * self.upscale.1)
    }

    pub fn output_dims(&self) -> (usize, usize) {
        (self.height * self.upscale.0, self.width * self.upscale.1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depths.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 stages, got {}",
                self.depths.len()
            )));
        }
        if let Some(i) = self.depths.iter().position(|&d| d == 0) {
            return Err(Error::Config(format!("stage {i} has depth 0")));
        }
        for (name, v) in [
            ("base_dim", self.base_dim),
            ("ssm_state", self.ssm_state),
            ("patch rows", self.patch.0),
            ("patch cols", self.patch.1),
            ("upscale rows", self.upscale.0),
            ("upscale cols", self.upscale.1),
            ("height", self.height),
            ("width", self.width),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        let reduce = 1usize << (self.stages() - 1);
        let (rv, rh) = (self.patch.0 * reduce, self.patch.1 * reduce);
        if !self.height.is_multiple_of(rv) {
            return Err(Error::Config(format!(
                "height {} is not divisible by patch rows {} x 2^{} = {rv}",
                self.height,
                self.patch.0,
                self.stages() - 1
            )));
        }
        if !self.width.is_multiple_of(rh) {
            return Err(Error::Config(format!(
                "width {} is not divisible by patch cols {} x 2^{} = {rh}",
                self.width,
                self.patch.1,
                self.stages() - 1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_config_is_valid() {
        let c = NetworkConfig::desk(16, 1024);
        c.validate().unwrap();
        assert_eq!(c.output_dims(), (64, 1024));
        assert_eq!(c.head_factor(), (4, 4));
        assert_eq!(c.stage_dim(3), 128);
        NetworkConfig::desk(8, 1024).validate().unwrap();
    }

    #[test]
    fn divisibility_errors_name_the_axis() {
        let mut c = NetworkConfig::desk(12, 1024);
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("height 12"), "{msg}");
        c.height = 16;
        c.width = 1000;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("width 1000"), "{msg}");
        c.width = 1024;
        c.depths = vec![2];
        assert!(c.validate().is_err());
        c.depths = vec![2, 0];
        assert!(c.validate().is_err());
    }
}
