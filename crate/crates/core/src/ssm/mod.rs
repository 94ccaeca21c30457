//! Diagonal state-space recurrences and the four-direction 2-D scan.

mod params;
mod scan;
mod ss2d;

pub use params::{
    discretize, zoh_discretize, DiscreteSsm, Discretization, SsmParams, TAYLOR_THRESHOLD,
};
pub use scan::{
    scan_1d, selective_scan_1d, softplus, softplus_inverse, state_trajectory, SelectiveProjections,
};
pub use ss2d::{refold, ss2d, ss2d_invocations, unfold, ScanDirection};
