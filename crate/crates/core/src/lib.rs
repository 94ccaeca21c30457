pub mod cli;
pub mod error;
pub mod fsutil;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod selfcheck;
pub mod ssm;

pub use error::{Error, Result};
