//! Encoder-decoder assembly, inference and weight files.

mod config;
mod forward;
mod weights;

pub use config::{NetworkConfig, DECODER_DEPTH, DEPTH_VARIANTS};
pub use forward::{forward, normalize, MIN_NORMALIZED_RANGE};
pub use weights::{
    block_layout, build, decode_weights, encode_weights, load_weights, save_weights, ModelWeights,
    WEIGHTS_MAGIC, WEIGHTS_VERSION,
};
