//! Tensor type, primitive layers and the composite network blocks.

mod blocks;
mod ops;
mod tensor;

pub use blocks::{
    downsample, fuse, head, patch_embed, upsample, vss_block, BlockKind, BlockWeights, Init,
    ParamSpec, DT_INIT_RANGE, FFN_EXPANSION,
};
pub use ops::{
    conv2d, depthwise_conv2d, layer_norm, pixel_shuffle, pixel_unshuffle, pointwise, silu,
    LAYER_NORM_EPS,
};
pub use tensor::Tensor;
