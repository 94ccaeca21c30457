use indexmap::IndexMap;
use rand::Rng;

use super::ops::{conv2d, depthwise_conv2d, layer_norm, pixel_shuffle, pointwise, silu};
use super::Tensor;
use crate::error::{Error, Result};
use crate::ssm::{softplus_inverse, ss2d, SelectiveProjections};

/// Hidden-width multiplier inside the VSS feed-forward network.
pub const FFN_EXPANSION: usize = 2;

/// Range of the initial per-channel scan time scale.
pub const DT_INIT_RANGE: (f64, f64) = (0.01, 0.1);

/// Structural description of one block; determines its parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Strided `(P1, P2)` convolution from one channel to `dim`, then layer norm.
    PatchEmbed { dim: usize, patch: (usize, usize) },
    /// Layer norm, four-direction scan, projection, feed-forward network.
    Vss { dim: usize, state: usize },
    /// 2x2 stride-2 convolution doubling `dim`.
    Downsample { dim: usize },
    /// Pointwise expansion then a 2x2 pixel shuffle, halving `dim`.
    Upsample { dim: usize },
    /// Concatenate with a skip of equal width, mix back down to `dim`.
    Fuse { dim: usize },
    /// Pointwise expansion, `factor` pixel shuffle, projection to one channel.
    Head { dim: usize, factor: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Zero-mean uniform with bound `1 / sqrt(fan_in)`.
    Uniform {
        fan_in: usize,
    },
    Const(f64),
    /// `a[d][n] = -(n + 1)`.
    StateDecay {
        state: usize,
    },
    /// Softplus-inverse of a log-uniform time scale in [`DT_INIT_RANGE`].
    DtBias,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

fn spec(name: impl Into<String>, shape: &[usize], init: Init) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        shape: shape.to_vec(),
        init,
    }
}

impl BlockKind {
    pub fn layout(&self) -> Vec<ParamSpec> {
        use Init::*;
        match *self {
            BlockKind::PatchEmbed {
                dim,
                patch: (p1, p2),
            } => vec![
                spec(
                    "conv.weight",
                    &[dim, 1, p1, p2],
                    Uniform { fan_in: p1 * p2 },
                ),
                spec("conv.bias", &[dim], Uniform { fan_in: p1 * p2 }),
                spec("norm.scale", &[dim], Const(1.0)),
                spec("norm.offset", &[dim], Const(0.0)),
            ],
            BlockKind::Vss { dim: d, state: n } => {
                let hidden = FFN_EXPANSION * d;
                let mut v = vec![
                    spec("ln1.scale", &[d], Const(1.0)),
                    spec("ln1.offset", &[d], Const(0.0)),
                ];
                for k in 0..4 {
                    let p = |s: &str| format!("ss2d.{k}.{s}");
                    v.extend([
                        spec(p("a"), &[d, n], StateDecay { state: n }),
                        spec(p("d"), &[d], Const(1.0)),
                        spec(p("w_b"), &[n, d], Uniform { fan_in: d }),
                        spec(p("b_b"), &[n], Const(0.0)),
                        spec(p("w_c"), &[n, d], Uniform { fan_in: d }),
                        spec(p("b_c"), &[n], Const(0.0)),
                        spec(p("w_dt"), &[d, d], Uniform { fan_in: d }),
                        spec(p("b_dt"), &[d], DtBias),
                    ]);
                }
                v.extend([
                    spec("out.weight", &[d, d], Uniform { fan_in: d }),
                    spec("out.bias", &[d], Const(0.0)),
                    spec("ln2.scale", &[d], Const(1.0)),
                    spec("ln2.offset", &[d], Const(0.0)),
                    spec("ffn.fc1.weight", &[hidden, d], Uniform { fan_in: d }),
                    spec("ffn.fc1.bias", &[hidden], Const(0.0)),
                    spec("ffn.dw.weight", &[hidden, 1, 3, 3], Uniform { fan_in: 9 }),
                    spec("ffn.dw.bias", &[hidden], Const(0.0)),
                    spec("ffn.fc2.weight", &[d, hidden], Uniform { fan_in: hidden }),
                    spec("ffn.fc2.bias", &[d], Const(0.0)),
                ]);
                v
            }
            BlockKind::Downsample { dim } => vec![
                spec(
                    "conv.weight",
                    &[2 * dim, dim, 2, 2],
                    Uniform { fan_in: 4 * dim },
                ),
                spec("conv.bias", &[2 * dim], Const(0.0)),
            ],
            BlockKind::Upsample { dim } => vec![
                spec("expand.weight", &[2 * dim, dim], Uniform { fan_in: dim }),
                spec("expand.bias", &[2 * dim], Const(0.0)),
            ],
            BlockKind::Fuse { dim } => vec![
                spec("conv.weight", &[dim, 2 * dim], Uniform { fan_in: 2 * dim }),
                spec("conv.bias", &[dim], Const(0.0)),
            ],
            BlockKind::Head {
                dim,
                factor: (fv, fh),
            } => vec![
                spec(
                    "expand.weight",
                    &[dim * fv * fh, dim],
                    Uniform { fan_in: dim },
                ),
                spec("expand.bias", &[dim * fv * fh], Const(0.0)),
                spec("out.weight", &[1, dim], Uniform { fan_in: dim }),
                spec("out.bias", &[1], Const(0.0)),
            ],
        }
    }
}

/// Named parameter tensors of one block, in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    tensors: IndexMap<String, Tensor>,
}

impl BlockWeights {
    pub fn from_tensors(tensors: IndexMap<String, Tensor>) -> Self {
        Self { tensors }
    }

    /// Fresh parameters for `kind`. All values are exactly representable as `f32`.
    pub fn init<R: Rng>(kind: &BlockKind, rng: &mut R) -> Self {
        let tensors = kind
            .layout()
            .into_iter()
            .map(|s| {
                let n: usize = s.shape.iter().product();
                let data: Vec<f64> = match s.init {
                    Init::Uniform { fan_in } => {
                        let bound = (1.0 / (fan_in as f64).sqrt()) as f32;
                        (0..n)
                            .map(|_| rng.random_range(-bound..bound) as f64)
                            .collect()
                    }
                    Init::Const(c) => vec![c as f32 as f64; n],
                    Init::StateDecay { state } => {
                        (0..n).map(|i| -((i % state) as f64 + 1.0)).collect()
                    }
                    Init::DtBias => {
                        let (lo, hi) = (DT_INIT_RANGE.0.ln(), DT_INIT_RANGE.1.ln());
                        (0..n)
                            .map(|_| {
                                let dt = rng.random_range(lo..hi).exp();
                                softplus_inverse(dt) as f32 as f64
                            })
                            .collect()
                    }
                };
                let t = Tensor::new(s.shape, data).expect("layout shape matches data");
                (s.name, t)
            })
            .collect();
        Self { tensors }
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::Config(format!("missing parameter `{name}`")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| Error::Config(format!("missing parameter `{name}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.tensors.iter()
    }

    pub fn param_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    /// Checks names, order and shapes against the layout of `kind`.
    pub fn check_layout(&self, kind: &BlockKind) -> Result<()> {
        let layout = kind.layout();
        for (i, s) in layout.iter().enumerate() {
            match self.tensors.get_index(i) {
                Some((name, t)) if *name == s.name && t.shape() == s.shape.as_slice() => {}
                Some((name, t)) if *name == s.name => {
                    return Err(Error::Config(format!(
                        "parameter `{name}` has shape {:?}, expected {:?}",
                        t.shape(),
                        s.shape
                    )))
                }
                _ => return Err(Error::Config(format!("missing parameter `{}`", s.name))),
            }
        }
        if let Some((extra, _)) = self.tensors.get_index(layout.len()) {
            return Err(Error::Config(format!("unexpected parameter `{extra}`")));
        }
        Ok(())
    }

    /// Zeroes the last projection of both residual branches of a VSS block.
    pub fn zero_vss_branches(&mut self) -> Result<()> {
        for name in ["out.weight", "out.bias", "ffn.fc2.weight", "ffn.fc2.bias"] {
            self.get_mut(name)?.data_mut().fill(0.0);
        }
        Ok(())
    }

    fn projections(&self, k: usize) -> Result<SelectiveProjections> {
        let g = |s: &str| self.get(&format!("ss2d.{k}.{s}"));
        let a = g("a")?;
        let (channels, state) = a.dims2()?;
        let p = SelectiveProjections {
            channels,
            state,
            a: a.data().to_vec(),
            d: g("d")?.data().to_vec(),
            w_b: g("w_b")?.data().to_vec(),
            b_b: g("b_b")?.data().to_vec(),
            w_c: g("w_c")?.data().to_vec(),
            b_c: g("b_c")?.data().to_vec(),
            w_dt: g("w_dt")?.data().to_vec(),
            b_dt: g("b_dt")?.data().to_vec(),
        };
        p.check_shapes()?;
        Ok(p)
    }
}

/// Anisotropic patch embedding: `(P1, P2)` kernel with equal stride, then layer norm.
pub fn patch_embed(img: &Tensor, patch: (usize, usize), w: &BlockWeights) -> Result<Tensor> {
    let (_, h, wd) = img.dims3()?;
    let (p1, p2) = patch;
    if p1 == 0 || p2 == 0 || h % p1 != 0 || wd % p2 != 0 {
        return Err(Error::Config(format!(
            "{h}x{wd} input is not divisible by the {p1}x{p2} patch"
        )));
    }
    let e = conv2d(
        img,
        w.get("conv.weight")?,
        Some(w.get("conv.bias")?),
        patch,
        (0, 0),
    )?;
    layer_norm(&e, w.get("norm.scale")?, w.get("norm.offset")?)
}

/// `m = proj(SS2D(LN(x))) + x`, then `FFN(LN(m)) + m`.
///
/// The feed-forward network is pointwise expansion, 3x3 depthwise
/// convolution, SiLU and pointwise projection.
pub fn vss_block(x: &Tensor, w: &BlockWeights) -> Result<Tensor> {
    let normed = layer_norm(x, w.get("ln1.scale")?, w.get("ln1.offset")?)?;
    let branches = [
        w.projections(0)?,
        w.projections(1)?,
        w.projections(2)?,
        w.projections(3)?,
    ];
    let scanned = ss2d(&normed, &branches)?;
    let mut m = pointwise(&scanned, w.get("out.weight")?, Some(w.get("out.bias")?))?;
    m.add_assign(x)?;

    let f = layer_norm(&m, w.get("ln2.scale")?, w.get("ln2.offset")?)?;
    let f = pointwise(&f, w.get("ffn.fc1.weight")?, Some(w.get("ffn.fc1.bias")?))?;
    let f = depthwise_conv2d(
        &f,
        w.get("ffn.dw.weight")?,
        Some(w.get("ffn.dw.bias")?),
        (1, 1),
    )?;
    let f = f.map(silu);
    let mut out = pointwise(&f, w.get("ffn.fc2.weight")?, Some(w.get("ffn.fc2.bias")?))?;
    out.add_assign(&m)?;
    Ok(out)
}

/// Halves both spatial extents and doubles the channel count.
pub fn downsample(x: &Tensor, w: &BlockWeights) -> Result<Tensor> {
    let (_, h, wd) = x.dims3()?;
    if h % 2 != 0 || wd % 2 != 0 {
        return Err(Error::Config(format!(
            "cannot downsample odd extent {h}x{wd}"
        )));
    }
    conv2d(
        x,
        w.get("conv.weight")?,
        Some(w.get("conv.bias")?),
        (2, 2),
        (0, 0),
    )
}

/// Doubles both spatial extents and halves the channel count.
pub fn upsample(x: &Tensor, w: &BlockWeights) -> Result<Tensor> {
    let e = pointwise(x, w.get("expand.weight")?, Some(w.get("expand.bias")?))?;
    pixel_shuffle(&e, 2, 2)
}

/// Concatenates `x` with its encoder `skip` and mixes back to the width of `x`.
pub fn fuse(x: &Tensor, skip: &Tensor, w: &BlockWeights) -> Result<Tensor> {
    if x.shape()[1..] != skip.shape()[1..] {
        return Err(Error::Config(format!(
            "decoder feature {:?} and skip {:?} differ spatially",
            x.shape(),
            skip.shape()
        )));
    }
    let cat = x.concat_channels(skip)?;
    pointwise(&cat, w.get("conv.weight")?, Some(w.get("conv.bias")?))
}

/// Super-resolving head: expansion, `factor` pixel shuffle, projection to one channel.
pub fn head(x: &Tensor, factor: (usize, usize), w: &BlockWeights) -> Result<Tensor> {
    let e = pointwise(x, w.get("expand.weight")?, Some(w.get("expand.bias")?))?;
    let s = pixel_shuffle(&e, factor.0, factor.1)?;
    pointwise(&s, w.get("out.weight")?, Some(w.get("out.bias")?))
}
