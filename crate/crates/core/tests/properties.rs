use proptest::prelude::*;

use rangesr::geometry::{
    back_project, hole_compensate, project, vote_row, BeamCalibration, PointCloud, RangeImage,
    WindowShape,
};
use rangesr::metrics::chamfer;
use rangesr::nn::{conv2d, layer_norm, pixel_shuffle, Tensor};
use rangesr::selfcheck::oracles::{convolution_kernel_scan, two_pass_stats};
use rangesr::ssm::{discretize, scan_1d, Discretization, SsmParams};

fn ssm_params(channels: usize, state: usize) -> impl Strategy<Value = SsmParams> {
    let dn = channels * state;
    (
        prop::collection::vec(-3.0..-0.05f64, dn),
        prop::collection::vec(-1.0..1.0f64, dn),
        prop::collection::vec(-1.0..1.0f64, dn),
        prop::collection::vec(-1.0..1.0f64, channels),
        prop::collection::vec(0.01..0.5f64, channels),
    )
        .prop_map(move |(a, b, c, d, dt)| SsmParams::new(channels, state, a, b, c, d, dt).unwrap())
}

fn ssm_case() -> impl Strategy<Value = (SsmParams, usize)> {
    (1usize..4, 1usize..6, 1usize..40).prop_flat_map(|(dc, n, len)| (ssm_params(dc, n), Just(len)))
}

fn cloud(max: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-20.0..20.0f64), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lti_scan_is_linear(
        (p, len) in ssm_case(),
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        xs in prop::collection::vec(-1.0..1.0f64, 160),
        ys in prop::collection::vec(-1.0..1.0f64, 160),
    ) {
        let ssm = discretize(&p, Discretization::Zoh);
        let dc = p.channels;
        let x1 = Tensor::new([dc, len], xs[..dc * len].to_vec()).unwrap();
        let x2 = Tensor::new([dc, len], ys[..dc * len].to_vec()).unwrap();
        let mix = x1.scale(alpha).add(&x2.scale(beta)).unwrap();
        let lhs = scan_1d(&ssm, &mix).unwrap();
        let rhs = scan_1d(&ssm, &x1).unwrap().scale(alpha)
            .add(&scan_1d(&ssm, &x2).unwrap().scale(beta)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn recurrence_equals_convolution_kernel((p, len) in ssm_case(), xs in prop::collection::vec(-1.0..1.0f64, 160)) {
        let ssm = discretize(&p, Discretization::Zoh);
        let (dc, n) = (p.channels, p.state);
        let x: Vec<f64> = xs.iter().cycle().take(dc * len).copied().collect();
        let y = scan_1d(&ssm, &Tensor::new([dc, len], x.clone()).unwrap()).unwrap();
        for d in 0..dc {
            let r = d * n..(d + 1) * n;
            let want = convolution_kernel_scan(&ssm.a_bar[r.clone()], &ssm.b_bar[r.clone()], &ssm.c[r], ssm.d[d], &x[d * len..(d + 1) * len]);
            for (g, w) in y.data()[d * len..(d + 1) * len].iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn discretized_decay_is_contractive(p in ssm_params(3, 4)) {
        let s = discretize(&p, Discretization::Zoh);
        prop_assert!(s.a_bar.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn pixel_shuffle_permutes((c, gv, gh, h, w) in (1usize..3, 1usize..4, 1usize..4, 1usize..4, 1usize..4)) {
        let n = c * gv * gh * h * w;
        let x = Tensor::new([c * gv * gh, h, w], (0..n).map(|i| i as f64).collect()).unwrap();
        let y = pixel_shuffle(&x, gv, gh).unwrap();
        prop_assert_eq!(y.shape(), &[c, h * gv, w * gh][..]);
        let mut seen = vec![false; n];
        for &v in y.data() {
            let i = v as usize;
            prop_assert!(!seen[i]);
            seen[i] = true;
        }
    }

    #[test]
    fn conv_is_linear_in_input(
        xs in prop::collection::vec(-1.0..1.0f64, 2 * 5 * 5),
        ys in prop::collection::vec(-1.0..1.0f64, 2 * 5 * 5),
        ks in prop::collection::vec(-1.0..1.0f64, 3 * 2 * 3 * 3),
        alpha in -2.0..2.0f64,
    ) {
        let k = Tensor::new([3, 2, 3, 3], ks).unwrap();
        let x = Tensor::new([2, 5, 5], xs).unwrap();
        let y = Tensor::new([2, 5, 5], ys).unwrap();
        let lhs = conv2d(&x.scale(alpha).add(&y).unwrap(), &k, None, (1, 1), (1, 1)).unwrap();
        let rhs = conv2d(&x, &k, None, (1, 1), (1, 1)).unwrap().scale(alpha)
            .add(&conv2d(&y, &k, None, (1, 1), (1, 1)).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn layer_norm_standardizes_channels(xs in prop::collection::vec(-100.0..100.0f64, 8 * 6)) {
        prop_assume!({
            let (_, v) = two_pass_stats(&xs[..8]);
            v > 1e-3
        });
        let x = Tensor::new([8, 2, 3], xs).unwrap();
        let y = layer_norm(&x, &Tensor::full([8], 1.0), &Tensor::zeros([8])).unwrap();
        for pix in 0..6 {
            let col: Vec<f64> = (0..8).map(|c| y.data()[c * 6 + pix]).collect();
            let (_, in_var) = two_pass_stats(&(0..8).map(|c| x.data()[c * 6 + pix]).collect::<Vec<_>>());
            let (m, v) = two_pass_stats(&col);
            prop_assert!(m.abs() <= 1e-9);
            // the epsilon shrinks the variance by var / (var + eps)
            prop_assert!((v - in_var / (in_var + 1e-5)).abs() <= 1e-9);
        }
    }

    #[test]
    fn chamfer_symmetric_and_translation_invariant(a in cloud(40), b in cloud(40), t in prop::array::uniform3(-50.0..50.0f64)) {
        let pa = PointCloud::new(a.clone()).unwrap();
        let pb = PointCloud::new(b.clone()).unwrap();
        let ab = chamfer(&pa, &pb).unwrap();
        prop_assert!((ab - chamfer(&pb, &pa).unwrap()).abs() <= 1e-9);
        let shift = |v: &[[f64; 3]]| PointCloud::new(v.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect()).unwrap();
        prop_assert!((ab - chamfer(&shift(&a), &shift(&b)).unwrap()).abs() <= 1e-9);
        prop_assert!(chamfer(&pa, &pa).unwrap() == 0.0);
    }

    #[test]
    fn voted_row_is_optimal(p in prop::array::uniform3(-50.0..50.0f64)) {
        let calib = BeamCalibration::hdl64_like();
        prop_assume!(p[0].hypot(p[1]) > 1e-3);
        let v = vote_row(&p, &calib);
        let elev = p[2].atan2(p[0].hypot(p[1]));
        let best = (calib.phi()[v] - elev).abs();
        prop_assert!(calib.phi().iter().all(|phi| best <= (phi - elev).abs()));
    }

    #[test]
    fn projection_keeps_nearest_and_bounds_range(pts in cloud(300)) {
        let calib = BeamCalibration::uniform(16, 2.0, -24.8, 25.0, 256).unwrap();
        let img = project(&PointCloud::new(pts).unwrap(), &calib).unwrap();
        prop_assert!(img.values().iter().all(|v| v.is_nan() || (*v > 0.0 && *v <= 25.0)));
        let back = back_project(&img);
        prop_assert_eq!(back.len(), img.valid_count());
    }

    #[test]
    fn compensation_never_adds_holes(mask in prop::collection::vec(any::<bool>(), 8 * 32), vertical in any::<bool>()) {
        let calib = BeamCalibration::uniform(8, 2.0, -24.8, 80.0, 32).unwrap();
        let values = mask.iter().enumerate().map(|(i, &m)| if m { f64::NAN } else { 1.0 + (i % 50) as f64 }).collect();
        let img = RangeImage::new(values, calib).unwrap();
        let w = if vertical { WindowShape::VERTICAL } else { WindowShape::HORIZONTAL };
        let out = hole_compensate(&img, w).unwrap();
        prop_assert!(out.hole_count() <= img.hole_count());
        for (a, b) in img.values().iter().zip(out.values()) {
            if !a.is_nan() {
                prop_assert_eq!(a, b);
            }
        }
    }
}
