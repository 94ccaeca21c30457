use super::Tensor;
use crate::error::{Error, Result};

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// 2-D cross-correlation with zero padding.
///
/// `x` is `[Cin, H, W]`, `kernel` is `[Cout, Cin, KH, KW]`, `bias` is `[Cout]`.
/// Output extent per axis is `(in + 2 * pad - k) / stride + 1`.
pub fn conv2d(
    x: &Tensor,
    kernel: &Tensor,
    bias: Option<&Tensor>,
    stride: (usize, usize),
    padding: (usize, usize),
) -> Result<Tensor> {
    let (cin, h, w) = x.dims3()?;
    let (cout, kcin, kh, kw) = kernel.dims4()?;
    if kcin != cin {
        return Err(Error::Input(format!(
            "conv kernel expects {kcin} input channels, got {cin}"
        )));
    }
    check_bias(bias, cout)?;
    let (sv, sh) = stride;
    let (pv, ph) = padding;
    if sv == 0 || sh == 0 {
        return Err(Error::Config("conv stride must be >= 1".into()));
    }
    if h + 2 * pv < kh || w + 2 * ph < kw {
        return Err(Error::Input(format!(
            "{kh}x{kw} kernel does not fit a padded {h}x{w} input"
        )));
    }
    let ho = (h + 2 * pv - kh) / sv + 1;
    let wo = (w + 2 * ph - kw) / sh + 1;
    let src = x.data();
    let k = kernel.data();
    let mut out = vec![0.0; cout * ho * wo];
    for co in 0..cout {
        let plane = &mut out[co * ho * wo..(co + 1) * ho * wo];
        if let Some(b) = bias {
            plane.fill(b.data()[co]);
        }
        for ci in 0..cin {
            let input = &src[ci * h * w..(ci + 1) * h * w];
            for ki in 0..kh {
                for kj in 0..kw {
                    let wv = k[((co * cin + ci) * kh + ki) * kw + kj];
                    if wv == 0.0 {
                        continue;
                    }
                    for oy in 0..ho {
                        let iy = (oy * sv + ki) as isize - pv as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = &input[iy as usize * w..(iy as usize + 1) * w];
                        let orow = &mut plane[oy * wo..(oy + 1) * wo];
                        for (ox, o) in orow.iter_mut().enumerate() {
                            let ix = (ox * sh + kj) as isize - ph as isize;
                            if ix >= 0 && ix < w as isize {
                                *o += wv * row[ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new([cout, ho, wo], out)
}

/// Per-channel 2-D convolution, stride 1. `kernel` is `[C, 1, KH, KW]`.
pub fn depthwise_conv2d(
    x: &Tensor,
    kernel: &Tensor,
    bias: Option<&Tensor>,
    padding: (usize, usize),
) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    let (kc, one, kh, kw) = kernel.dims4()?;
    if kc != c || one != 1 {
        return Err(Error::Input(format!(
            "depthwise kernel {:?} does not match {c} channels",
            kernel.shape()
        )));
    }
    check_bias(bias, c)?;
    let mut out = Vec::with_capacity(x.len());
    let mut ho_wo = (0, 0);
    for ch in 0..c {
        let plane = Tensor::new([1, h, w], x.data()[ch * h * w..(ch + 1) * h * w].to_vec())?;
        let k = Tensor::new(
            [1, 1, kh, kw],
            kernel.data()[ch * kh * kw..(ch + 1) * kh * kw].to_vec(),
        )?;
        let b = bias.map(|b| Tensor::full([1], b.data()[ch]));
        let y = conv2d(&plane, &k, b.as_ref(), (1, 1), padding)?;
        ho_wo = (y.shape()[1], y.shape()[2]);
        out.extend_from_slice(y.data());
    }
    Tensor::new([c, ho_wo.0, ho_wo.1], out)
}

/// Channel mixing at every location: `weight` is `[Cout, Cin]`.
pub fn pointwise(x: &Tensor, weight: &Tensor, bias: Option<&Tensor>) -> Result<Tensor> {
    let (cin, h, w) = x.dims3()?;
    let (cout, wcin) = weight.dims2()?;
    if wcin != cin {
        return Err(Error::Input(format!(
            "linear map expects {wcin} input channels, got {cin}"
        )));
    }
    check_bias(bias, cout)?;
    let hw = h * w;
    let src = x.data();
    let wt = weight.data();
    let mut out = vec![0.0; cout * hw];
    for co in 0..cout {
        let plane = &mut out[co * hw..(co + 1) * hw];
        if let Some(b) = bias {
            plane.fill(b.data()[co]);
        }
        for ci in 0..cin {
            let wv = wt[co * cin + ci];
            if wv == 0.0 {
                continue;
            }
            let input = &src[ci * hw..(ci + 1) * hw];
            plane.iter_mut().zip(input).for_each(|(o, &v)| *o += wv * v);
        }
    }
    Tensor::new([cout, h, w], out)
}

fn check_bias(bias: Option<&Tensor>, channels: usize) -> Result<()> {
    match bias {
        Some(b) if b.len() != channels => Err(Error::Input(format!(
            "bias has {} entries, expected {channels}",
            b.len()
        ))),
        _ => Ok(()),
    }
}

/// Normalizes over the channel axis at every spatial location, then applies
/// a per-channel affine map.
pub fn layer_norm(x: &Tensor, scale: &Tensor, offset: &Tensor) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    if scale.len() != c || offset.len() != c {
        return Err(Error::Input(format!(
            "layer norm affine has {}/{} entries for {c} channels",
            scale.len(),
            offset.len()
        )));
    }
    let hw = h * w;
    let src = x.data();
    let mut out = vec![0.0; c * hw];
    for p in 0..hw {
        let mean = (0..c).map(|ch| src[ch * hw + p]).sum::<f64>() / c as f64;
        let var = (0..c)
            .map(|ch| {
                let d = src[ch * hw + p] - mean;
                d * d
            })
            .sum::<f64>()
            / c as f64;
        let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        for ch in 0..c {
            out[ch * hw + p] =
                (src[ch * hw + p] - mean) * inv * scale.data()[ch] + offset.data()[ch];
        }
    }
    Tensor::new([c, h, w], out)
}

#[inline]
pub fn silu(v: f64) -> f64 {
    v / (1.0 + (-v).exp())
}

/// Moves `gv * gh` channel groups into space:
/// `out[c][i*gv + dv][j*gh + dh] = in[c*gv*gh + dv*gh + dh][i][j]`.
pub fn pixel_shuffle(x: &Tensor, gv: usize, gh: usize) -> Result<Tensor> {
    let (cin, h, w) = x.dims3()?;
    let g = gv * gh;
    if g == 0 || cin % g != 0 {
        return Err(Error::Config(format!(
            "{cin} channels are not divisible by the {gv}x{gh} shuffle factor"
        )));
    }
    let c = cin / g;
    let (ho, wo) = (h * gv, w * gh);
    let src = x.data();
    let mut out = vec![0.0; x.len()];
    for ch in 0..c {
        for dv in 0..gv {
            for dh in 0..gh {
                let plane = &src[(ch * g + dv * gh + dh) * h * w..][..h * w];
                for i in 0..h {
                    for j in 0..w {
                        out[(ch * ho + i * gv + dv) * wo + j * gh + dh] = plane[i * w + j];
                    }
                }
            }
        }
    }
    Tensor::new([c, ho, wo], out)
}

/// Inverse of [`pixel_shuffle`].
pub fn pixel_unshuffle(x: &Tensor, gv: usize, gh: usize) -> Result<Tensor> {
    let (c, ho, wo) = x.dims3()?;
    if gv == 0 || gh == 0 || ho % gv != 0 || wo % gh != 0 {
        return Err(Error::Config(format!(
            "{ho}x{wo} is not divisible by the {gv}x{gh} unshuffle factor"
        )));
    }
    let (h, w) = (ho / gv, wo / gh);
    let g = gv * gh;
    let src = x.data();
    let mut out = vec![0.0; x.len()];
    for ch in 0..c {
        for dv in 0..gv {
            for dh in 0..gh {
                let plane = &mut out[(ch * g + dv * gh + dh) * h * w..][..h * w];
                for i in 0..h {
                    for j in 0..w {
                        plane[i * w + j] = src[(ch * ho + i * gv + dv) * wo + j * gh + dh];
                    }
                }
            }
        }
    }
    Tensor::new([c * g, h, w], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(shape: &[usize]) -> Tensor {
        let n = shape.iter().product::<usize>();
        Tensor::new(
            shape,
            (0..n).map(|i| ((i * 7919) % 23) as f64 - 11.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_kernel_is_identity() {
        let x = seq(&[2, 3, 4]);
        let mut k = Tensor::zeros([2, 2, 1, 1]);
        k.data_mut()[0] = 1.0;
        k.data_mut()[3] = 1.0;
        assert_eq!(conv2d(&x, &k, None, (1, 1), (0, 0)).unwrap(), x);
    }

    #[test]
    fn ones_kernel_sums_window() {
        let x = Tensor::full([1, 5, 5], 1.0);
        let k = Tensor::full([1, 1, 3, 3], 1.0);
        let y = conv2d(&x, &k, None, (1, 1), (1, 1)).unwrap();
        assert_eq!(y.shape(), &[1, 5, 5]);
        assert_eq!(y.data()[2 * 5 + 2], 9.0);
        assert_eq!(y.data()[0], 4.0);
    }

    #[test]
    fn output_extent_formula() {
        let x = Tensor::zeros([1, 7, 10]);
        let k = Tensor::zeros([2, 1, 3, 2]);
        let y = conv2d(&x, &k, None, (2, 3), (1, 0)).unwrap();
        assert_eq!(y.shape(), &[2, (7 + 2 - 3) / 2 + 1, (10 - 2) / 3 + 1]);
        assert!(conv2d(&x, &Tensor::zeros([2, 2, 1, 1]), None, (1, 1), (0, 0)).is_err());
    }

    #[test]
    fn depthwise_matches_per_channel_conv() {
        let x = seq(&[3, 4, 5]);
        let k = seq(&[3, 1, 3, 3]);
        let y = depthwise_conv2d(&x, &k, None, (1, 1)).unwrap();
        for ch in 0..3 {
            let xc = Tensor::new([1, 4, 5], x.data()[ch * 20..(ch + 1) * 20].to_vec()).unwrap();
            let kc = Tensor::new([1, 1, 3, 3], k.data()[ch * 9..(ch + 1) * 9].to_vec()).unwrap();
            let yc = conv2d(&xc, &kc, None, (1, 1), (1, 1)).unwrap();
            assert_eq!(&y.data()[ch * 20..(ch + 1) * 20], yc.data());
        }
    }

    #[test]
    fn pointwise_equals_one_by_one_conv() {
        let x = seq(&[3, 2, 5]);
        let wt = seq(&[4, 3]);
        let b = seq(&[4]);
        let conv = conv2d(
            &x,
            &wt.clone().reshape([4, 3, 1, 1]).unwrap(),
            Some(&b),
            (1, 1),
            (0, 0),
        )
        .unwrap();
        let pw = pointwise(&x, &wt, Some(&b)).unwrap();
        assert!(conv.max_abs_diff(&pw) < 1e-12);
    }

    #[test]
    fn layer_norm_constant_input_is_offset() {
        let x = Tensor::full([4, 2, 2], 3.5);
        let y = layer_norm(&x, &Tensor::full([4], 1.0), &Tensor::zeros([4])).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shuffle_small_case() {
        let x = Tensor::new([4, 1, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = pixel_shuffle(&x, 2, 2).unwrap();
        assert_eq!(y.shape(), &[1, 2, 2]);
        assert_eq!(y.data(), &[1.0, 2.0, 3.0, 4.0]);
        let x = seq(&[3, 2, 2]);
        assert_eq!(pixel_shuffle(&x, 1, 1).unwrap(), x);
        assert!(matches!(pixel_shuffle(&x, 2, 1), Err(Error::Config(_))));
    }

    #[test]
    fn anisotropic_shuffle_index_formula() {
        let x = seq(&[12, 2, 3]);
        let (gv, gh) = (4, 1);
        let y = pixel_shuffle(&x, gv, gh).unwrap();
        assert_eq!(y.shape(), &[3, 8, 3]);
        for c in 0..3 {
            for i in 0..2 {
                for j in 0..3 {
                    for dv in 0..gv {
                        let src = x.data()[((c * gv * gh + dv) * 2 + i) * 3 + j];
                        assert_eq!(y.data()[(c * 8 + i * gv + dv) * 3 + j], src);
                    }
                }
            }
        }
        assert_eq!(pixel_unshuffle(&y, gv, gh).unwrap(), x);
    }

    #[test]
    fn silu_basics() {
        assert_eq!(silu(0.0), 0.0);
        let mut prev = silu(0.0);
        for i in 1..=200 {
            let v = silu(i as f64 * 0.05);
            assert!(v > prev);
            prev = v;
        }
        assert!(silu(-1.0) < 0.0);
    }
}
