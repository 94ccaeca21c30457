//! Reference computations that deliberately avoid the production code paths.
//!
//! Each one is slow and obvious: adaptive ODE integration instead of the
//! closed-form discretization, explicit convolution kernels instead of the
//! recurrence, pairwise scans instead of a k-d tree, dense grids instead of
//! hash sets.

use crate::geometry::Point3;

/// Integrates the scalar ODE `h' = a h + b x` from `h0` over `[0, dt]` with
/// constant `x`, using an adaptive Dormand-Prince 5(4) pair.
pub fn integrate_linear_ode(a: f64, b: f64, x: f64, h0: f64, dt: f64) -> f64 {
    let f = |h: f64| a * h + b * x;
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    const RTOL: f64 = 1e-13;

    let mut t = 0.0;
    let mut h = h0;
    let mut step = dt / 64.0;
    while t < dt {
        if t + step > dt {
            step = dt - t;
        }
        let mut k = [0.0; 7];
        k[0] = f(h);
        for s in 0..6 {
            let inc: f64 = (0..=s).map(|j| C[s][j] * k[j]).sum();
            k[s + 1] = f(h + step * inc);
        }
        let y5 = h + step * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let y4 = h + step * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let err = (y5 - y4).abs();
        let tol = RTOL * y5.abs().max(h.abs()).max(1e-300);
        if err <= tol || step < 1e-14 * dt {
            t += step;
            h = y5;
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            0.9 * (tol / err).powf(0.2)
        };
        step *= factor.clamp(0.2, 4.0);
    }
    h
}

/// Output of a time-invariant diagonal SSM computed as an explicit causal
/// convolution: `y_t = sum_s K_{t-s} x_s + d x_t` with
/// `K_j = sum_k c_k a_bar_k^j b_bar_k`. One channel.
pub fn convolution_kernel_scan(
    a_bar: &[f64],
    b_bar: &[f64],
    c: &[f64],
    d: f64,
    x: &[f64],
) -> Vec<f64> {
    let len = x.len();
    let kernel: Vec<f64> = (0..len)
        .map(|j| {
            (0..a_bar.len())
                .map(|k| c[k] * a_bar[k].powi(j as i32) * b_bar[k])
                .sum()
        })
        .collect();
    (0..len)
        .map(|t| (0..=t).map(|s| kernel[t - s] * x[s]).sum::<f64>() + d * x[t])
        .collect()
}

/// Pairwise-scan Chamfer distance, squared form.
pub fn brute_force_chamfer(pred: &[Point3], gt: &[Point3]) -> f64 {
    let d2 = |a: &Point3, b: &Point3| {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let dz = a[2] - b[2];
        dx * dx + dy * dy + dz * dz
    };
    let one_way = |from: &[Point3], to: &[Point3]| {
        from.iter()
            .map(|p| to.iter().map(|q| d2(p, q)).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / from.len() as f64
    };
    one_way(pred, gt) + one_way(gt, pred)
}

/// Voxel IoU through dense boolean occupancy grids over the joint bounding box.
pub fn dense_grid_iou(pred: &[Point3], gt: &[Point3], voxel: f64) -> f64 {
    let cell = |p: &Point3, axis: usize| (p[axis] / voxel).floor() as i64;
    let all = pred.iter().chain(gt);
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for p in all {
        for axis in 0..3 {
            lo[axis] = lo[axis].min(cell(p, axis));
            hi[axis] = hi[axis].max(cell(p, axis));
        }
    }
    let dims: Vec<usize> = (0..3).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
    let index = |p: &Point3| {
        let i = (cell(p, 0) - lo[0]) as usize;
        let j = (cell(p, 1) - lo[1]) as usize;
        let k = (cell(p, 2) - lo[2]) as usize;
        (i * dims[1] + j) * dims[2] + k
    };
    let total = dims[0] * dims[1] * dims[2];
    let mut a = vec![false; total];
    let mut b = vec![false; total];
    pred.iter().for_each(|p| a[index(p)] = true);
    gt.iter().for_each(|p| b[index(p)] = true);
    let inter = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(&b).filter(|(x, y)| **x || **y).count();
    inter as f64 / union as f64
}

/// Direct quadruple-loop cross-correlation on raw slices.
/// `x` is `[cin][h][w]`, `k` is `[cout][cin][kh][kw]`.
#[allow(clippy::too_many_arguments)]
pub fn naive_conv2d(
    x: &[f64],
    (cin, h, w): (usize, usize, usize),
    k: &[f64],
    (cout, kh, kw): (usize, usize, usize),
    (sv, sh): (usize, usize),
    (pv, ph): (usize, usize),
) -> (Vec<f64>, usize, usize) {
    let ho = (h + 2 * pv - kh) / sv + 1;
    let wo = (w + 2 * ph - kw) / sh + 1;
    let mut out = vec![0.0; cout * ho * wo];
    for co in 0..cout {
        for oy in 0..ho {
            for ox in 0..wo {
                let mut acc = 0.0;
                for ci in 0..cin {
                    for ki in 0..kh {
                        for kj in 0..kw {
                            let iy = (oy * sv + ki) as isize - pv as isize;
                            let ix = (ox * sh + kj) as isize - ph as isize;
                            if iy >= 0 && ix >= 0 && (iy as usize) < h && (ix as usize) < w {
                                acc += k[((co * cin + ci) * kh + ki) * kw + kj]
                                    * x[(ci * h + iy as usize) * w + ix as usize];
                            }
                        }
                    }
                }
                out[(co * ho + oy) * wo + ox] = acc;
            }
        }
    }
    (out, ho, wo)
}

/// Mean and (population) variance in two passes.
pub fn two_pass_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}
