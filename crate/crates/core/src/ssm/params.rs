use crate::error::{Error, Result};

/// Below this `|a|` the input matrix uses its first-order limit `delta * b`.
pub const TAYLOR_THRESHOLD: f64 = 1e-8;

/// Continuous diagonal state-space parameters for `channels` independent
/// channels of `state` dimension each. Matrices are flattened channel-major,
/// so entry `(d, n)` lives at `d * state + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmParams {
    pub channels: usize,
    pub state: usize,
    /// Diagonal state coefficients, negative for a stable system.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Per-channel skip term.
    pub d: Vec<f64>,
    /// Per-channel positive time scale.
    pub delta: Vec<f64>,
}

impl SsmParams {
    pub fn new(
        channels: usize,
        state: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
        delta: Vec<f64>,
    ) -> Result<Self> {
        let p = Self {
            channels,
            state,
            a,
            b,
            c,
            d,
            delta,
        };
        p.check_shapes()?;
        Ok(p)
    }

    fn check_shapes(&self) -> Result<()> {
        if self.channels == 0 || self.state == 0 {
            return Err(Error::Config(
                "SSM needs at least one channel and state".into(),
            ));
        }
        let dn = self.channels * self.state;
        for (name, len, want) in [
            ("a", self.a.len(), dn),
            ("b", self.b.len(), dn),
            ("c", self.c.len(), dn),
            ("d", self.d.len(), self.channels),
            ("delta", self.delta.len(), self.channels),
        ] {
            if len != want {
                return Err(Error::Input(format!(
                    "SSM `{name}` has {len} entries, expected {want}"
                )));
            }
        }
        Ok(())
    }

    /// Full validity: shapes, finiteness, `a < 0`, `delta > 0`.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        let all = self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .chain(&self.d)
            .chain(&self.delta);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("SSM parameters must be finite".into()));
        }
        if self.a.iter().any(|&a| a >= 0.0) {
            return Err(Error::Input("state coefficients must be negative".into()));
        }
        if self.delta.iter().any(|&dt| dt <= 0.0) {
            return Err(Error::Input("time scales must be positive".into()));
        }
        Ok(())
    }
}

/// Discrete recurrence `h_t = a_bar * h_{t-1} + b_bar * x_t`, `y_t = <c, h_t> + d * x_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSsm {
    pub channels: usize,
    pub state: usize,
    pub a_bar: Vec<f64>,
    pub b_bar: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// How the input matrix is discretized. The state matrix is always `exp(delta * a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Exact zero-order hold, `(exp(delta * a) - 1) / a * b`.
    #[default]
    Zoh,
    /// `delta * b`, the form used by the input-dependent scan.
    SimplifiedEuler,
    /// Zero-order hold without the small-`a` limit. Only for fault injection.
    #[doc(hidden)]
    ZohUnguarded,
}

pub fn zoh_discretize(p: &SsmParams) -> DiscreteSsm {
    discretize(p, Discretization::Zoh)
}

pub fn discretize(p: &SsmParams, mode: Discretization) -> DiscreteSsm {
    let n = p.state;
    let mut a_bar = Vec::with_capacity(p.a.len());
    let mut b_bar = Vec::with_capacity(p.b.len());
    for (i, (&a, &b)) in p.a.iter().zip(&p.b).enumerate() {
        let dt = p.delta[i / n];
        a_bar.push((dt * a).exp());
        b_bar.push(match mode {
            Discretization::SimplifiedEuler => dt * b,
            Discretization::Zoh if a.abs() < TAYLOR_THRESHOLD => dt * b,
            Discretization::Zoh | Discretization::ZohUnguarded => (dt * a).exp_m1() / a * b,
        });
    }
    DiscreteSsm {
        channels: p.channels,
        state: n,
        a_bar,
        b_bar,
        c: p.c.clone(),
        d: p.d.clone(),
    }
}
