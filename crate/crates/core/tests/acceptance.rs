//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rangesr::geometry::{hole_compensate, BeamCalibration, PointCloud, RangeImage, WindowShape};
use rangesr::metrics::{chamfer, range_mae, voxel_iou, DEFAULT_VOXEL};
use rangesr::model::{build, forward, load_weights, save_weights, NetworkConfig, DEPTH_VARIANTS};
use rangesr::nn::{vss_block, BlockKind, BlockWeights, Tensor};
use rangesr::selfcheck::{
    check_chamfer, check_lti_kernel, check_selective_lti, check_zoh, round_trip,
};
use rangesr::ssm::{refold, unfold, Discretization, ScanDirection};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&mut ChaCha8Rng) -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1_zoh(rng: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let detail = check_zoh(rng, 1000, Discretization::Zoh)?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("{detail}, {t:.2?}"))
}

fn ac2_lti_kernel(rng: &mut ChaCha8Rng) -> Outcome {
    check_lti_kernel(rng, 200, 4, 8, 64)
}

fn ac3_ss2d_permutations(rng: &mut ChaCha8Rng) -> Outcome {
    let mut grids = 0;
    for h in 1..=5 {
        for w in 1..=7 {
            let mut row = Vec::new();
            for r in 0..h {
                for c in 0..w {
                    row.push(r * w + c);
                }
            }
            let mut col = Vec::new();
            for c in 0..w {
                for r in 0..h {
                    col.push(r * w + c);
                }
            }
            let rev = |v: &Vec<usize>| v.iter().rev().copied().collect::<Vec<_>>();
            let expected = [row.clone(), rev(&row), col.clone(), rev(&col)];
            let ch = 3;
            let x = Tensor::new(
                [ch, h, w],
                (0..ch * h * w)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            for (dir, want) in ScanDirection::ALL.iter().zip(&expected) {
                let order = dir.traversal(h, w);
                ensure(&order == want, || format!("{dir:?} on {h}x{w}: {order:?}"))?;
                let seq = unfold(&x, &order).map_err(|e| e.to_string())?;
                for c in 0..ch {
                    for (t, &idx) in want.iter().enumerate() {
                        ensure(
                            seq.data()[c * h * w + t] == x.data()[c * h * w + idx],
                            || format!("{dir:?} unfold mismatch on {h}x{w}"),
                        )?;
                    }
                }
                let back = refold(&seq, &order, h, w).map_err(|e| e.to_string())?;
                ensure(back == x, || {
                    format!("{dir:?} refold is not the inverse on {h}x{w}")
                })?;
            }
            grids += 1;
        }
    }
    Ok(format!("{grids} grids x 4 directions"))
}

fn ac4_round_trip(rng: &mut ChaCha8Rng) -> Outcome {
    let calib = BeamCalibration::hdl64_like();
    let s = round_trip(rng, &calib, 500)?;
    let yaw = PI / calib.width() as f64;
    let pitch = calib.max_beam_gap();
    ensure(s.max_range_err <= 1e-5, || {
        format!("range error {:.3e}", s.max_range_err)
    })?;
    ensure(s.max_yaw_err <= yaw, || {
        format!("yaw error {:.3e} > {yaw:.3e}", s.max_yaw_err)
    })?;
    ensure(s.max_pitch_err <= pitch, || {
        format!("pitch error {:.3e} > {pitch:.3e}", s.max_pitch_err)
    })?;
    Ok(format!(
        "500 points: range {:.1e} m, yaw {:.2e} <= {yaw:.2e}, pitch {:.2e} <= {pitch:.2e}",
        s.max_range_err, s.max_yaw_err, s.max_pitch_err
    ))
}

fn ac5_holes(rng: &mut ChaCha8Rng) -> Outcome {
    let calib = BeamCalibration::uniform(32, 2.0, -24.8, 80.0, 128).map_err(|e| e.to_string())?;
    let (h, w) = (calib.height(), calib.width());
    let values: Vec<f64> = (0..h * w)
        .map(|_| {
            if rng.random_bool(0.3) {
                f64::NAN
            } else {
                rng.random_range(0.5..80.0)
            }
        })
        .collect();
    let img = RangeImage::new(values, calib).map_err(|e| e.to_string())?;
    let out = hole_compensate(&img, WindowShape::VERTICAL).map_err(|e| e.to_string())?;
    let at = |im: &RangeImage, v: usize, u: usize| im.values()[v * w + u];
    let neighbors = |v: usize, u: usize| -> Vec<f64> {
        [v.checked_sub(1), Some(v + 1).filter(|&r| r < h)]
            .into_iter()
            .flatten()
            .map(|r| at(&img, r, u))
            .filter(|x| !x.is_nan())
            .collect()
    };
    let mut holes = Vec::new();
    for v in 0..h {
        for u in 0..w {
            let (a, b) = (at(&img, v, u), at(&out, v, u));
            if a.is_nan() {
                let has = !neighbors(v, u).is_empty();
                ensure(!has || b.is_finite(), || {
                    format!("hole ({v},{u}) left unfilled")
                })?;
                if has {
                    holes.push((v, u));
                }
            } else {
                ensure(a.to_bits() == b.to_bits(), || {
                    format!("valid pixel ({v},{u}) changed")
                })?;
            }
        }
    }
    ensure(out.hole_count() < img.hole_count(), || {
        "hole count did not decrease".into()
    })?;
    for _ in 0..10 {
        let (v, u) = holes[rng.random_range(0..holes.len())];
        let n = neighbors(v, u);
        let want = n.iter().sum::<f64>() / n.len() as f64;
        let got = at(&out, v, u);
        ensure((got - want).abs() <= 1e-12 * want, || {
            format!("pixel ({v},{u}): {got} vs hand mean {want}")
        })?;
    }
    Ok(format!(
        "{} -> {} holes, 10 sampled means match",
        img.hole_count(),
        out.hole_count()
    ))
}

fn ac6_forward_shape(rng: &mut ChaCha8Rng) -> Outcome {
    let calib = BeamCalibration::uniform(16, 2.0, -24.8, 80.0, 1024).map_err(|e| e.to_string())?;
    let r_max = calib.r_max();
    let values = (0..16 * 1024)
        .map(|_| {
            if rng.random_bool(0.1) {
                f64::NAN
            } else {
                rng.random_range(1.0..r_max)
            }
        })
        .collect();
    let img = RangeImage::new(values, calib).map_err(|e| e.to_string())?;
    let cfg = NetworkConfig::desk(16, 1024);
    let start = Instant::now();
    let w = build(&cfg, 7).map_err(|e| e.to_string())?;
    let a = forward(&img, &w, &cfg).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let b = forward(&img, &w, &cfg).map_err(|e| e.to_string())?;
    ensure((a.height(), a.width()) == (64, 1024), || {
        format!("output {}x{}", a.height(), a.width())
    })?;
    ensure(
        a.values()
            .iter()
            .all(|v| v.is_finite() && *v > 0.0 && *v <= r_max),
        || "output outside (0, r_max]".into(),
    )?;
    ensure(
        a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()),
        || "two runs differ".into(),
    )?;
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("16x1024 -> 64x1024, {t:.2?} per run"))
}

fn cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(-10.0..10.0)))
            .collect(),
    )
    .unwrap()
}

fn ac7_metrics(rng: &mut ChaCha8Rng) -> Outcome {
    let a = cloud(rng, 300);
    let cd = chamfer(&a, &a).map_err(|e| e.to_string())?;
    let iou = voxel_iou(&a, &a, DEFAULT_VOXEL).map_err(|e| e.to_string())?;
    let calib = BeamCalibration::hdl64_like();
    let img = rangesr::geometry::project(&a, &calib).map_err(|e| e.to_string())?;
    let mae = range_mae(&img, &img).map_err(|e| e.to_string())?;
    ensure(cd == 0.0 && iou == 1.0 && mae == 0.0, || {
        format!("identities: cd {cd}, iou {iou}, mae {mae}")
    })?;
    let brute = check_chamfer(rng, 100, 200)?;
    let pred = PointCloud::new(vec![[0.0, 0.0, 0.0]]).unwrap();
    let gt = PointCloud::new(vec![[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
    let hand = chamfer(&pred, &gt).map_err(|e| e.to_string())?;
    ensure((hand - 3.5).abs() <= 1e-12, || format!("hand case {hand}"))?;
    Ok(format!("identities exact; {brute}; hand case {hand}"))
}

fn ac8_selective_lti(rng: &mut ChaCha8Rng) -> Outcome {
    check_selective_lti(rng, 50)
}

fn random_config(rng: &mut ChaCha8Rng) -> NetworkConfig {
    let stages = rng.random_range(2..=4);
    let patch = (rng.random_range(1..=2), rng.random_range(1..=4));
    let reduce = 1 << (stages - 1);
    NetworkConfig {
        height: patch.0 * reduce * rng.random_range(1..=2),
        width: patch.1 * reduce * rng.random_range(1..=3),
        depths: (0..stages).map(|_| rng.random_range(1..=3)).collect(),
        base_dim: rng.random_range(1..=4) * 2,
        patch,
        upscale: (rng.random_range(1..=4), rng.random_range(1..=2)),
        ssm_state: rng.random_range(1..=8),
    }
}

fn ac9_weights(rng: &mut ChaCha8Rng) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut flips = 0;
    for i in 0..20 {
        let cfg = random_config(rng);
        cfg.validate().map_err(|e| format!("{cfg:?}: {e}"))?;
        let w = build(&cfg, rng.random()).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("w{i}.rsrw"));
        save_weights(&w, &cfg, &path).map_err(|e| e.to_string())?;
        let (back, back_cfg) = load_weights(&path).map_err(|e| e.to_string())?;
        ensure(back_cfg == cfg, || format!("config {i} changed"))?;
        let same = w.tensors().zip(back.tensors()).all(|((na, ta), (nb, tb))| {
            na == nb
                && ta.shape() == tb.shape()
                && ta
                    .data()
                    .iter()
                    .zip(tb.data())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
        });
        ensure(
            same && w.tensors().count() == back.tensors().count(),
            || format!("config {i} tensors differ after reload"),
        )?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let mut bad = bytes.clone();
            let at = rng.random_range(0..bad.len());
            bad[at] ^= rng.random_range(1..=255u8);
            let err = rangesr::model::decode_weights(&bad);
            ensure(matches!(err, Err(rangesr::Error::Corruption(_))), || {
                format!(
                    "config {i}: flip at byte {at} of {} not detected",
                    bad.len()
                )
            })?;
            flips += 1;
        }
    }
    Ok(format!(
        "20 configs bit-identical, {flips}/{flips} corruptions detected"
    ))
}

fn ac10_vss_identity(rng: &mut ChaCha8Rng) -> Outcome {
    for i in 0..20 {
        let dim = rng.random_range(1..=8) * 2;
        let kind = BlockKind::Vss {
            dim,
            state: rng.random_range(1..=8),
        };
        let mut w = BlockWeights::init(&kind, rng);
        w.zero_vss_branches().map_err(|e| e.to_string())?;
        let (h, wd) = (rng.random_range(1..=6), rng.random_range(1..=9));
        let x = Tensor::new(
            [dim, h, wd],
            (0..dim * h * wd)
                .map(|_| rng.random_range(-5.0..5.0))
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let y = vss_block(&x, &w).map_err(|e| e.to_string())?;
        ensure(y == x, || {
            format!("input {i}: max deviation {:e}", y.max_abs_diff(&x))
        })?;
    }
    Ok("20 inputs reproduced exactly".into())
}

fn ac11_param_order(_: &mut ChaCha8Rng) -> Outcome {
    let mut counts = Vec::new();
    for (name, depths) in DEPTH_VARIANTS {
        let mut cfg = NetworkConfig::desk(16, 1024);
        cfg.depths = depths.to_vec();
        counts.push((
            name,
            build(&cfg, 0).map_err(|e| e.to_string())?.param_count(),
        ));
    }
    let listing = counts
        .iter()
        .map(|(n, c)| format!("{n} {c}"))
        .collect::<Vec<_>>()
        .join(" < ");
    ensure(counts.windows(2).all(|p| p[0].1 < p[1].1), || {
        listing.clone()
    })?;
    Ok(listing)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("zoh-vs-ode", ac1_zoh),
        ("lti-scan-vs-kernel", ac2_lti_kernel),
        ("ss2d-permutations", ac3_ss2d_permutations),
        ("projection-round-trip", ac4_round_trip),
        ("hole-compensation", ac5_holes),
        ("end-to-end-shape", ac6_forward_shape),
        ("metric-identities", ac7_metrics),
        ("selective-degenerates-to-lti", ac8_selective_lti),
        ("weight-round-trip", ac9_weights),
        ("vss-residual-identity", ac10_vss_identity),
        ("param-count-ordering", ac11_param_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        match check(&mut rng) {
            Ok(detail) => println!("PASS AC{:<2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL AC{:<2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
