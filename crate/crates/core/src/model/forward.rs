use super::{weights::ModelWeights, NetworkConfig, DECODER_DEPTH};
use crate::error::{Error, Result};
use crate::geometry::RangeImage;
use crate::nn::{downsample, fuse, head, patch_embed, upsample, vss_block, Tensor};

/// Smallest normalized range the network may emit; one step of 16-bit quantization.
pub const MIN_NORMALIZED_RANGE: f64 = 1.0 / 65535.0;

fn finite(t: Tensor, path: &str) -> Result<Tensor> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::Numerical {
            path: path.to_string(),
            message: "non-finite activation".into(),
        })
    }
}

/// Range image as a `[1, H, W]` tensor scaled by `1 / r_max`, holes as 0.
pub fn normalize(img: &RangeImage) -> Tensor {
    let r_max = img.calibration().r_max();
    let data = img
        .values()
        .iter()
        .map(|&v| if v.is_nan() { 0.0 } else { v / r_max })
        .collect();
    Tensor::new([1, img.height(), img.width()], data).expect("image dims")
}

/// Super-resolves a range image.
///
/// The encoder embeds patches and alternates VSS stages with downsampling.
/// Each decoder stage upsamples, fuses the matching encoder skip and runs
/// its VSS blocks. The head shuffles the result to `upscale` times the
/// input size, which is then denormalized and clamped to
/// `[MIN_NORMALIZED_RANGE * r_max, r_max]`.
pub fn forward(img: &RangeImage, w: &ModelWeights, cfg: &NetworkConfig) -> Result<RangeImage> {
    cfg.validate()?;
    if (img.height(), img.width()) != (cfg.height, cfg.width) {
        return Err(Error::Config(format!(
            "image is {}x{}, network expects {}x{}",
            img.height(),
            img.width(),
            cfg.height,
            cfg.width
        )));
    }
    w.check_config(cfg)?;
    let out_calib = img.calibration().upsampled(cfg.upscale.0, cfg.upscale.1)?;

    let mut x = finite(
        patch_embed(&normalize(img), cfg.patch, w.block("embed")?)?,
        "embed",
    )?;
    let stages = cfg.stages();
    let mut skips = Vec::with_capacity(stages - 1);
    for (i, &depth) in cfg.depths.iter().enumerate() {
        for j in 0..depth {
            let path = format!("encoder.{i}.block.{j}");
            x = finite(vss_block(&x, w.block(&path)?)?, &path)?;
        }
        if i + 1 < stages {
            skips.push(x.clone());
            let path = format!("encoder.{i}.down");
            x = finite(downsample(&x, w.block(&path)?)?, &path)?;
        }
    }
    for l in (0..stages - 1).rev() {
        let path = format!("decoder.{l}.up");
        x = finite(upsample(&x, w.block(&path)?)?, &path)?;
        let skip = &skips[l];
        assert_eq!(
            x.shape()[1..],
            skip.shape()[1..],
            "decoder stage {l} and its skip disagree spatially"
        );
        let path = format!("decoder.{l}.fuse");
        x = finite(fuse(&x, skip, w.block(&path)?)?, &path)?;
        for j in 0..DECODER_DEPTH {
            let path = format!("decoder.{l}.block.{j}");
            x = finite(vss_block(&x, w.block(&path)?)?, &path)?;
        }
    }
    let y = finite(head(&x, cfg.head_factor(), w.block("head")?)?, "head")?;

    let (oh, ow) = cfg.output_dims();
    debug_assert_eq!(y.shape(), &[1, oh, ow]);
    let r_max = out_calib.r_max();
    let values = y
        .into_data()
        .into_iter()
        .map(|v| v.clamp(MIN_NORMALIZED_RANGE, 1.0) * r_max)
        .collect();
    RangeImage::new(values, out_calib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BeamCalibration;
    use crate::model::build;

    fn tiny() -> NetworkConfig {
        NetworkConfig {
            height: 8,
            width: 32,
            depths: vec![1, 1],
            base_dim: 8,
            patch: (1, 4),
            upscale: (4, 1),
            ssm_state: 4,
        }
    }

    fn image(h: usize, w: usize) -> RangeImage {
        let calib = BeamCalibration::uniform(h, 2.0, -24.8, 80.0, w).unwrap();
        let values = (0..h * w)
            .map(|i| {
                if i % 7 == 3 {
                    f64::NAN
                } else {
                    2.0 + (i % 50) as f64
                }
            })
            .collect();
        RangeImage::new(values, calib).unwrap()
    }

    #[test]
    fn tiny_forward_is_finite_and_deterministic() {
        let cfg = tiny();
        let w = build(&cfg, 3).unwrap();
        let img = image(8, 32);
        let a = forward(&img, &w, &cfg).unwrap();
        let b = forward(&img, &w, &cfg).unwrap();
        assert_eq!((a.height(), a.width()), (32, 32));
        assert_eq!(a.values(), b.values());
        assert_eq!(a.hole_count(), 0);
        assert!(a.values().iter().all(|&v| v > 0.0 && v <= 80.0));
    }

    #[test]
    fn mismatched_image_is_config_error() {
        let cfg = tiny();
        let w = build(&cfg, 3).unwrap();
        assert!(matches!(
            forward(&image(8, 64), &w, &cfg),
            Err(Error::Config(_))
        ));
        let mut other = cfg.clone();
        other.base_dim = 4;
        assert!(matches!(
            forward(&image(8, 32), &w, &other),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_finite_weights_name_the_block() {
        let cfg = tiny();
        let mut w = build(&cfg, 3).unwrap();
        w.block_mut("encoder.1.block.0")
            .unwrap()
            .get_mut("out.bias")
            .unwrap()
            .data_mut()[0] = f64::INFINITY;
        match forward(&image(8, 32), &w, &cfg) {
            Err(Error::Numerical { path, .. }) => assert_eq!(path, "encoder.1.block.0"),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }
}
