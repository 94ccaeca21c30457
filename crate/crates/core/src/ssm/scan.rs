use super::{DiscreteSsm, SsmParams};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Runs a fixed (time-invariant) discrete SSM over `x` of shape `[channels, len]`.
///
/// Every channel starts from a zero state.
pub fn scan_1d(ssm: &DiscreteSsm, x: &Tensor) -> Result<Tensor> {
    let (channels, len) = x.dims2()?;
    if channels != ssm.channels {
        return Err(Error::Input(format!(
            "scan input has {channels} channels, SSM has {}",
            ssm.channels
        )));
    }
    if len == 0 {
        return Err(Error::Input("scan needs at least one step".into()));
    }
    let n = ssm.state;
    let mut y = vec![0.0; channels * len];
    let mut h = vec![0.0; n];
    for d in 0..channels {
        let a_bar = &ssm.a_bar[d * n..(d + 1) * n];
        let b_bar = &ssm.b_bar[d * n..(d + 1) * n];
        let c = &ssm.c[d * n..(d + 1) * n];
        h.fill(0.0);
        let xs = &x.data()[d * len..(d + 1) * len];
        for (t, &xt) in xs.iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                h[k] = a_bar[k] * h[k] + b_bar[k] * xt;
                acc += c[k] * h[k];
            }
            y[d * len + t] = acc + ssm.d[d] * xt;
        }
    }
    Tensor::new([channels, len], y)
}

/// Hidden states of one channel, `states[t][k]`, for inspecting the recurrence.
pub fn state_trajectory(ssm: &DiscreteSsm, channel: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let n = ssm.state;
    let a_bar = &ssm.a_bar[channel * n..(channel + 1) * n];
    let b_bar = &ssm.b_bar[channel * n..(channel + 1) * n];
    let mut h = vec![0.0; n];
    x.iter()
        .map(|&xt| {
            for k in 0..n {
                h[k] = a_bar[k] * h[k] + b_bar[k] * xt;
            }
            h.clone()
        })
        .collect()
}

/// Numerically stable `ln(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 20.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for `y > 0`.
#[inline]
pub fn softplus_inverse(y: f64) -> f64 {
    if y > 20.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// Learned maps that make the SSM input-dependent.
///
/// At each step `t`, with `x_t` the vector of all channels:
/// `B_t = w_b x_t + b_b`, `C_t = w_c x_t + b_c` (both length `state`,
/// shared by all channels) and `delta_t = softplus(w_dt x_t + b_dt)` per channel.
/// `a` and `d` are the per-channel state coefficients and skip terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveProjections {
    pub channels: usize,
    pub state: usize,
    /// `[channels, state]`, negative.
    pub a: Vec<f64>,
    /// `[channels]`
    pub d: Vec<f64>,
    /// `[state, channels]`
    pub w_b: Vec<f64>,
    /// `[state]`
    pub b_b: Vec<f64>,
    /// `[state, channels]`
    pub w_c: Vec<f64>,
    /// `[state]`
    pub b_c: Vec<f64>,
    /// `[channels, channels]`
    pub w_dt: Vec<f64>,
    /// `[channels]`
    pub b_dt: Vec<f64>,
}

impl SelectiveProjections {
    pub fn check_shapes(&self) -> Result<()> {
        let (dc, n) = (self.channels, self.state);
        for (name, len, want) in [
            ("a", self.a.len(), dc * n),
            ("d", self.d.len(), dc),
            ("w_b", self.w_b.len(), n * dc),
            ("b_b", self.b_b.len(), n),
            ("w_c", self.w_c.len(), n * dc),
            ("b_c", self.b_c.len(), n),
            ("w_dt", self.w_dt.len(), dc * dc),
            ("b_dt", self.b_dt.len(), dc),
        ] {
            if len != want {
                return Err(Error::Input(format!(
                    "selective projection `{name}` has {len} entries, expected {want}"
                )));
            }
        }
        Ok(())
    }

    /// Input-independent configuration equivalent to `p`.
    ///
    /// Requires every channel of `p` to share the same `b` and `c` rows,
    /// since the selective branch shares them across channels.
    pub fn constant(p: &SsmParams) -> Result<Self> {
        let (dc, n) = (p.channels, p.state);
        let row_b = &p.b[..n];
        let row_c = &p.c[..n];
        for d in 1..dc {
            if &p.b[d * n..(d + 1) * n] != row_b || &p.c[d * n..(d + 1) * n] != row_c {
                return Err(Error::Input(
                    "constant projections need b and c shared across channels".into(),
                ));
            }
        }
        Ok(Self {
            channels: dc,
            state: n,
            a: p.a.clone(),
            d: p.d.clone(),
            w_b: vec![0.0; n * dc],
            b_b: row_b.to_vec(),
            w_c: vec![0.0; n * dc],
            b_c: row_c.to_vec(),
            w_dt: vec![0.0; dc * dc],
            b_dt: p.delta.iter().map(|&dt| softplus_inverse(dt)).collect(),
        })
    }

    /// All-zero projections with the given state coefficients.
    pub fn zeros(channels: usize, state: usize) -> Self {
        Self {
            channels,
            state,
            a: vec![-1.0; channels * state],
            d: vec![0.0; channels],
            w_b: vec![0.0; state * channels],
            b_b: vec![0.0; state],
            w_c: vec![0.0; state * channels],
            b_c: vec![0.0; state],
            w_dt: vec![0.0; channels * channels],
            b_dt: vec![0.0; channels],
        }
    }
}

/// Input-dependent scan over `x` of shape `[channels, len]`.
///
/// `a_bar_t = exp(delta_t * a)` and `b_bar_t = delta_t * B_t`.
pub fn selective_scan_1d(x: &Tensor, proj: &SelectiveProjections) -> Result<Tensor> {
    proj.check_shapes()?;
    let (channels, len) = x.dims2()?;
    if channels != proj.channels {
        return Err(Error::Input(format!(
            "scan input has {channels} channels, projections expect {}",
            proj.channels
        )));
    }
    if len == 0 {
        return Err(Error::Input("scan needs at least one step".into()));
    }
    let n = proj.state;
    let xs = x.data();
    let mut y = vec![0.0; channels * len];
    let mut h = vec![0.0; channels * n];
    let mut xt = vec![0.0; channels];
    let mut b_t = vec![0.0; n];
    let mut c_t = vec![0.0; n];
    for t in 0..len {
        for d in 0..channels {
            xt[d] = xs[d * len + t];
        }
        for k in 0..n {
            b_t[k] = proj.b_b[k] + dot(&proj.w_b[k * channels..(k + 1) * channels], &xt);
            c_t[k] = proj.b_c[k] + dot(&proj.w_c[k * channels..(k + 1) * channels], &xt);
        }
        for d in 0..channels {
            let dt =
                softplus(proj.b_dt[d] + dot(&proj.w_dt[d * channels..(d + 1) * channels], &xt));
            let hd = &mut h[d * n..(d + 1) * n];
            let ad = &proj.a[d * n..(d + 1) * n];
            let mut acc = 0.0;
            for k in 0..n {
                hd[k] = (dt * ad[k]).exp() * hd[k] + dt * b_t[k] * xt[d];
                acc += c_t[k] * hd[k];
            }
            y[d * len + t] = acc + proj.d[d] * xt[d];
        }
    }
    Tensor::new([channels, len], y)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
