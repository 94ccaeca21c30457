use std::cell::Cell;

use super::{selective_scan_1d, SelectiveProjections};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// One of the four grid traversals used by [`ss2d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanDirection {
    /// Rows top to bottom, each left to right.
    RowMajorForward,
    /// Exact reverse of `RowMajorForward`.
    RowMajorReverse,
    /// Columns left to right, each top to bottom.
    ColMajorForward,
    /// Exact reverse of `ColMajorForward`.
    ColMajorReverse,
}

impl ScanDirection {
    pub const ALL: [ScanDirection; 4] = [
        ScanDirection::RowMajorForward,
        ScanDirection::RowMajorReverse,
        ScanDirection::ColMajorForward,
        ScanDirection::ColMajorReverse,
    ];

    /// `order[t]` is the flat grid index (`row * width + col`) visited at step `t`.
    pub fn traversal(self, height: usize, width: usize) -> Vec<usize> {
        let row_major = || 0..height * width;
        let col_major = || (0..width).flat_map(move |c| (0..height).map(move |r| r * width + c));
        match self {
            ScanDirection::RowMajorForward => row_major().collect(),
            ScanDirection::RowMajorReverse => row_major().rev().collect(),
            ScanDirection::ColMajorForward => col_major().collect(),
            ScanDirection::ColMajorReverse => {
                let mut v: Vec<_> = col_major().collect();
                v.reverse();
                v
            }
        }
    }
}

/// Flattens `[C, H, W]` into `[C, H*W]` along `order`.
pub fn unfold(x: &Tensor, order: &[usize]) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    let hw = h * w;
    if order.len() != hw {
        return Err(Error::Input(format!(
            "traversal has {} steps for a {h}x{w} grid",
            order.len()
        )));
    }
    let src = x.data();
    let mut out = Vec::with_capacity(c * hw);
    for ch in 0..c {
        let plane = &src[ch * hw..(ch + 1) * hw];
        out.extend(order.iter().map(|&i| plane[i]));
    }
    Tensor::new([c, hw], out)
}

/// Inverse of [`unfold`]: scatters `[C, H*W]` back onto the grid.
pub fn refold(seq: &Tensor, order: &[usize], height: usize, width: usize) -> Result<Tensor> {
    let (c, len) = seq.dims2()?;
    let hw = height * width;
    if len != hw || order.len() != hw {
        return Err(Error::Input(format!(
            "cannot refold {len} steps onto a {height}x{width} grid"
        )));
    }
    let src = seq.data();
    let mut out = vec![0.0; c * hw];
    for ch in 0..c {
        let plane = &mut out[ch * hw..(ch + 1) * hw];
        for (t, &i) in order.iter().enumerate() {
            plane[i] = src[ch * hw + t];
        }
    }
    Tensor::new([c, height, width], out)
}

thread_local! {
    static SS2D_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of [`ss2d`] invocations made on the current thread.
pub fn ss2d_invocations() -> u64 {
    SS2D_CALLS.with(Cell::get)
}

/// Four-direction selective scan over a `[C, H, W]` feature map.
///
/// `branches[i]` drives the scan along `ScanDirection::ALL[i]`; the four
/// refolded outputs are summed.
pub fn ss2d(x: &Tensor, branches: &[SelectiveProjections; 4]) -> Result<Tensor> {
    SS2D_CALLS.with(|c| c.set(c.get() + 1));
    let (c, h, w) = x.dims3()?;
    if h == 0 || w == 0 {
        return Err(Error::Input("ss2d needs a non-empty grid".into()));
    }
    let mut acc = Tensor::zeros([c, h, w]);
    for (dir, proj) in ScanDirection::ALL.iter().zip(branches) {
        let order = dir.traversal(h, w);
        let seq = unfold(x, &order)?;
        let scanned = selective_scan_1d(&seq, proj)?;
        acc.add_assign(&refold(&scanned, &order, h, w)?)?;
    }
    Ok(acc)
}
