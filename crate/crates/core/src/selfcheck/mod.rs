//! Oracle suite run by the `selfcheck` command.
//!
//! Every check compares a production routine against an independent
//! reference from [`oracles`] on random instances and reports the worst
//! deviation. The checks are public so larger test suites can run them at
//! bigger sizes.

pub mod oracles;

use std::collections::HashSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{back_project, project, BeamCalibration, PointCloud};
use crate::metrics::{chamfer, voxel_iou};
use crate::nn::{pixel_shuffle, pixel_unshuffle, Tensor};
use crate::ssm::{
    discretize, scan_1d, selective_scan_1d, Discretization, SelectiveProjections, SsmParams,
};

/// A deliberate defect to confirm the suite notices it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Zero-order hold without its small-`a` limit.
    ZohTaylorLimitDisabled,
}

#[derive(Debug, Clone, Default)]
pub struct SelfCheckOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

type Check = Result<String, String>;
type Oracle = Box<dyn FnOnce(&mut ChaCha8Rng) -> Check>;

/// Runs every oracle at self-check sizes.
pub fn run(options: &SelfCheckOptions) -> Vec<OracleOutcome> {
    let zoh_mode = match options.fault {
        Some(Fault::ZohTaylorLimitDisabled) => Discretization::ZohUnguarded,
        None => Discretization::Zoh,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let checks: Vec<(&'static str, Oracle)> = vec![
        (
            "zoh-discretization",
            Box::new(move |r| check_zoh(r, 200, zoh_mode)),
        ),
        (
            "lti-convolution-kernel",
            Box::new(|r| check_lti_kernel(r, 20, 4, 8, 64)),
        ),
        (
            "selective-degenerate-lti",
            Box::new(|r| check_selective_lti(r, 10)),
        ),
        (
            "chamfer-brute-force",
            Box::new(|r| check_chamfer(r, 10, 100)),
        ),
        (
            "voxel-iou-dense-grid",
            Box::new(|r| check_voxel_iou(r, 10, 50, 0.5)),
        ),
        (
            "projection-round-trip",
            Box::new(|r| check_round_trip(r, 200)),
        ),
        ("pixel-shuffle-bijection", Box::new(check_pixel_shuffle)),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let result = check(&mut rng);
            let elapsed = start.elapsed();
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            OracleOutcome {
                name,
                passed,
                detail,
                elapsed,
            }
        })
        .collect()
}

/// One-step discretization against adaptive ODE integration, relative 1e-6,
/// plus continuity of the input matrix at `a = +/-1e-9` within `1e-12 |b|`.
pub fn check_zoh(rng: &mut impl Rng, samples: usize, mode: Discretization) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = rng.random_range(-5.0..-0.01);
        let dt = rng.random_range(0.001..1.0);
        let b = rng.random_range(-2.0..2.0);
        let p = SsmParams::new(1, 1, vec![a], vec![b], vec![1.0], vec![0.0], vec![dt])
            .map_err(|e| e.to_string())?;
        let s = discretize(&p, mode);
        // unit step from rest isolates b_bar; free decay from 1 isolates a_bar
        for (got, h0, x) in [(s.b_bar[0], 0.0, 1.0), (s.a_bar[0], 1.0, 0.0)] {
            let want = oracles::integrate_linear_ode(a, b, x, h0, dt);
            let rel = (got - want).abs() / want.abs();
            worst = worst.max(rel);
            if rel > 1e-6 {
                return Err(format!(
                    "a={a} dt={dt} b={b}: {got} vs integrated {want} (rel {rel:.2e})"
                ));
            }
        }
    }
    for a in [1e-9, -1e-9] {
        for (b, dt) in [(1.0, 1.0), (-2.0, 0.7), (0.5, 0.3)] {
            let p = SsmParams::new(1, 1, vec![a], vec![b], vec![1.0], vec![0.0], vec![dt])
                .map_err(|e| e.to_string())?;
            let got = discretize(&p, mode).b_bar[0];
            let gap = (got - dt * b).abs();
            if gap > 1e-12 * f64::abs(b) {
                return Err(format!(
                    "discontinuous at a={a:e}: b_bar {got} vs limit {} (gap {gap:.2e})",
                    dt * b
                ));
            }
        }
    }
    Ok(format!(
        "{samples} samples, worst relative error {worst:.2e}"
    ))
}

pub(crate) fn random_stable_params(rng: &mut impl Rng, channels: usize, state: usize) -> SsmParams {
    let dn = channels * state;
    SsmParams::new(
        channels,
        state,
        (0..dn).map(|_| rng.random_range(-3.0..-0.05)).collect(),
        (0..dn).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..dn).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..channels).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..channels).map(|_| rng.random_range(0.01..0.5)).collect(),
    )
    .expect("generated shapes are consistent")
}

/// Recurrence against the explicit convolution kernel, absolute 1e-5.
pub fn check_lti_kernel(
    rng: &mut impl Rng,
    sets: usize,
    max_channels: usize,
    max_state: usize,
    max_len: usize,
) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..sets {
        let dc = rng.random_range(1..=max_channels);
        let n = rng.random_range(1..=max_state);
        let len = rng.random_range(1..=max_len);
        let ssm = discretize(&random_stable_params(rng, dc, n), Discretization::Zoh);
        let x: Vec<f64> = (0..dc * len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = scan_1d(
            &ssm,
            &Tensor::new([dc, len], x.clone()).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        for d in 0..dc {
            let r = d * n..(d + 1) * n;
            let want = oracles::convolution_kernel_scan(
                &ssm.a_bar[r.clone()],
                &ssm.b_bar[r.clone()],
                &ssm.c[r],
                ssm.d[d],
                &x[d * len..(d + 1) * len],
            );
            for (g, w) in y.data()[d * len..(d + 1) * len].iter().zip(&want) {
                worst = worst.max((g - w).abs());
            }
        }
        if worst > 1e-5 {
            return Err(format!("D={dc} N={n} L={len}: deviation {worst:.2e}"));
        }
    }
    Ok(format!(
        "{sets} parameter sets, worst deviation {worst:.2e}"
    ))
}

/// Constant selective projections against the LTI scan with the same
/// simplified input discretization, absolute 1e-6.
pub fn check_selective_lti(rng: &mut impl Rng, inputs: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..inputs {
        let dc = rng.random_range(1..=4);
        let n = rng.random_range(1..=8);
        let len = rng.random_range(1..=64);
        let mut p = random_stable_params(rng, dc, n);
        // the selective branch shares B and C across channels
        for d in 1..dc {
            for k in 0..n {
                p.b[d * n + k] = p.b[k];
                p.c[d * n + k] = p.c[k];
            }
        }
        let proj = SelectiveProjections::constant(&p).map_err(|e| e.to_string())?;
        let x = Tensor::new(
            [dc, len],
            (0..dc * len).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .map_err(|e| e.to_string())?;
        let lti = scan_1d(&discretize(&p, Discretization::SimplifiedEuler), &x)
            .map_err(|e| e.to_string())?;
        let sel = selective_scan_1d(&x, &proj).map_err(|e| e.to_string())?;
        worst = worst.max(lti.max_abs_diff(&sel));
        if worst > 1e-6 {
            return Err(format!("D={dc} N={n} L={len}: deviation {worst:.2e}"));
        }
    }
    Ok(format!("{inputs} inputs, worst deviation {worst:.2e}"))
}

fn random_cloud(rng: &mut impl Rng, n: usize, extent: f64) -> PointCloud {
    PointCloud {
        points: (0..n)
            .map(|_| {
                [
                    rng.random_range(-extent..extent),
                    rng.random_range(-extent..extent),
                    rng.random_range(-extent..extent),
                ]
            })
            .collect(),
    }
}

/// Indexed Chamfer against the pairwise scan, absolute 1e-9.
pub fn check_chamfer(rng: &mut impl Rng, pairs: usize, points: usize) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = random_cloud(rng, points, 10.0);
        let b = random_cloud(rng, points, 10.0);
        let got = chamfer(&a, &b).map_err(|e| e.to_string())?;
        let want = oracles::brute_force_chamfer(&a.points, &b.points);
        worst = worst.max((got - want).abs());
        if worst > 1e-9 {
            return Err(format!("chamfer {got} vs brute force {want}"));
        }
    }
    Ok(format!(
        "{pairs} pairs of {points} points, worst deviation {worst:.2e}"
    ))
}

/// Hash-set IoU against dense occupancy grids; must agree exactly.
pub fn check_voxel_iou(rng: &mut impl Rng, pairs: usize, points: usize, voxel: f64) -> Check {
    for _ in 0..pairs {
        let a = random_cloud(rng, points, 1.5);
        let mut b = random_cloud(rng, points, 1.5);
        b.points.extend(a.points.iter().take(points / 3).copied());
        let got = voxel_iou(&a, &b, voxel).map_err(|e| e.to_string())?;
        let want = oracles::dense_grid_iou(&a.points, &b.points, voxel);
        if got != want {
            return Err(format!("IoU {got} vs dense grid {want}"));
        }
    }
    Ok(format!(
        "{pairs} pairs of {points} points at voxel {voxel} m"
    ))
}

/// Worst errors seen when lifting projected points back to 3D.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundTripStats {
    pub points: usize,
    pub max_range_err: f64,
    pub max_yaw_err: f64,
    pub max_pitch_err: f64,
}

/// Projects random in-fan points landing in distinct pixels and lifts them
/// back. Pixels are assigned independently of the projection code.
pub fn round_trip(
    rng: &mut impl Rng,
    calib: &BeamCalibration,
    n: usize,
) -> Result<RoundTripStats, String> {
    let (h, w) = (calib.height(), calib.width());
    let top = calib.phi()[0];
    let bottom = calib.phi()[h - 1];
    let mut taken = HashSet::new();
    let mut pts = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n);
    while pts.len() < n {
        let elev: f64 = rng.random_range(bottom..top);
        let az: f64 = rng.random_range(-PI..PI);
        let r: f64 = rng.random_range(1.0..calib.r_max() * 0.99);
        let p = [
            r * elev.cos() * az.cos(),
            r * elev.cos() * az.sin(),
            r * elev.sin(),
        ];
        let elev_p = p[2].atan2(p[0].hypot(p[1]));
        let v = (0..h)
            .min_by(|&i, &j| {
                (calib.phi()[i] - elev_p)
                    .abs()
                    .partial_cmp(&(calib.phi()[j] - elev_p).abs())
                    .unwrap()
            })
            .unwrap();
        let frac = 1.0 - (p[1].atan2(p[0]) + PI) / (2.0 * PI);
        let u = ((frac * w as f64).floor() as usize).min(w - 1);
        if taken.insert((v, u)) {
            pts.push(p);
            pixels.push((v, u));
        }
    }
    let cloud = PointCloud::new(pts).map_err(|e| e.to_string())?;
    let img = project(&cloud, calib).map_err(|e| e.to_string())?;
    if img.valid_count() != n {
        return Err(format!("{} valid pixels for {n} points", img.valid_count()));
    }
    let lifted = back_project(&img);
    // back_project emits valid pixels in row-major order
    let mut order: Vec<(usize, usize)> = pixels.clone();
    order.sort_unstable();
    let mut stats = RoundTripStats {
        points: n,
        ..Default::default()
    };
    for (p, px) in cloud.points.iter().zip(&pixels) {
        let idx = order
            .binary_search(px)
            .map_err(|_| "pixel not found".to_string())?;
        let q = lifted.points[idx];
        let norm = |a: &[f64; 3]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let mut dyaw = (q[1].atan2(q[0]) - p[1].atan2(p[0])).abs();
        if dyaw > PI {
            dyaw = 2.0 * PI - dyaw;
        }
        let pitch = |a: &[f64; 3]| a[2].atan2(a[0].hypot(a[1]));
        stats.max_range_err = stats.max_range_err.max((norm(&q) - norm(p)).abs());
        stats.max_yaw_err = stats.max_yaw_err.max(dyaw);
        stats.max_pitch_err = stats.max_pitch_err.max((pitch(&q) - pitch(p)).abs());
    }
    Ok(stats)
}

pub fn check_round_trip(rng: &mut impl Rng, n: usize) -> Check {
    let calib = BeamCalibration::hdl64_like();
    let s = round_trip(rng, &calib, n)?;
    let yaw_bound = PI / calib.width() as f64 + 1e-12;
    let pitch_bound = calib.max_beam_gap();
    if s.max_range_err > 1e-5 || s.max_yaw_err > yaw_bound || s.max_pitch_err > pitch_bound {
        return Err(format!(
            "{s:?} exceeds bounds (range 1e-5, yaw {yaw_bound:.2e}, pitch {pitch_bound:.2e})"
        ));
    }
    Ok(format!(
        "{n} points, range {:.1e} m, yaw {:.1e} rad, pitch {:.1e} rad",
        s.max_range_err, s.max_yaw_err, s.max_pitch_err
    ))
}

pub fn check_pixel_shuffle(rng: &mut ChaCha8Rng) -> Check {
    for (c, gv, gh) in [(2, 2, 2), (3, 4, 1), (1, 1, 3)] {
        let (h, w) = (rng.random_range(1..5), rng.random_range(1..5));
        let n = c * gv * gh * h * w;
        let x = Tensor::new(
            [c * gv * gh, h, w],
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .map_err(|e| e.to_string())?;
        let y = pixel_shuffle(&x, gv, gh).map_err(|e| e.to_string())?;
        let mut a = x.data().to_vec();
        let mut b = y.data().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if a != b || pixel_unshuffle(&y, gv, gh).map_err(|e| e.to_string())? != x {
            return Err(format!("shuffle {gv}x{gh} is not a bijection"));
        }
    }
    Ok("3 factor pairs".into())
}
