mod common;

use common::*;
use misre::data::{generate, scenario, to_json};
use misre::hypothesis::{sample_hypotheses, select_best, sorted_sequence};
use misre::mode::Projections;
use misre::model::{lift, LiftedPoints};
use misre::scale::{expand, segment_counts, segment_limit};
use misre::{run, EstimationConfig, InputPoint, ModelKind};
use proptest::prelude::*;

const NONLINEAR: [ModelKind; 5] =
    [ModelKind::Ellipse2d, ModelKind::Sphere3d, ModelKind::Cylinder3d, ModelKind::Fundamental, ModelKind::Homography];

fn coords(l: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-300.0..300.0f64, l)
}

proptest! {
    #[test]
    fn jacobians_match_central_differences(kind in prop::sample::select(NONLINEAR.to_vec()), y in coords(4)) {
        let spec = kind.spec();
        let y = &y[..spec.input_dim];
        let set = lift(&spec, &InputPoint::new(y.to_vec())).unwrap();
        for c in 0..spec.channels {
            let analytic: Vec<f64> = set.jacobians[c].transpose().iter().copied().collect();
            let numeric = fd_jacobian(kind, y, c);
            prop_assert!(max_relative(&analytic, &numeric) <= 1e-5, "{kind} channel {c}");
        }
    }

    #[test]
    fn points_on_an_ellipse_have_zero_distance(
        cx in -50.0..50.0f64, cy in -50.0..50.0f64, a in 10.0..60.0f64, ratio in 0.15..1.0f64,
        angle in -3.2..3.2f64, t in 0.0..6.3f64,
    ) {
        let (theta, alpha) = ellipse_theta([cx, cy], a, a * ratio, angle);
        let y = ellipse_point([cx, cy], a, a * ratio, angle, t);
        prop_assert!(distance(ModelKind::Ellipse2d, &y, &theta, alpha) <= 1e-10);
    }

    #[test]
    fn points_on_a_sphere_have_zero_distance(
        c in prop::array::uniform3(-50.0..50.0f64), r in 5.0..80.0f64,
        dir in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let y: Vec<f64> = (0..3).map(|k| c[k] + r * dir[k] / n).collect();
        let (theta, alpha) = sphere_theta(c, r);
        prop_assert!(distance(ModelKind::Sphere3d, &y, &theta, alpha) <= 1e-10);
    }

    #[test]
    fn points_on_lines_and_planes_have_zero_distance(
        normal in prop::array::uniform3(-1.0..1.0f64), offset in -100.0..100.0f64,
        s in -100.0..100.0f64, t in -100.0..100.0f64,
    ) {
        let n = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(n > 1e-2);
        let u = [normal[0] / n, normal[1] / n, normal[2] / n];
        // two directions orthogonal to u
        let helper = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = cross(u, helper);
        let e2 = cross(u, e1);
        let y: Vec<f64> = (0..3).map(|k| offset * u[k] + s * e1[k] + t * e2[k]).collect();
        prop_assert!(distance(ModelKind::Plane3d, &y, &u, offset) <= 1e-10);

        let n2 = (u[0] * u[0] + u[1] * u[1]).sqrt();
        prop_assume!(n2 > 1e-2);
        let v = [u[0] / n2, u[1] / n2];
        let y2 = [offset * v[0] - s * v[1], offset * v[1] + s * v[0]];
        prop_assert!(distance(ModelKind::Line2d, &y2, &v, offset) <= 1e-10);
    }

    #[test]
    fn exact_correspondences_have_zero_distance(
        h in prop::array::uniform9(-1.0..1.0f64), u in 0.0..640.0f64, v in 0.0..480.0f64,
    ) {
        // well-conditioned homography: identity plus a small perturbation
        let hm = [
            1.0 + 0.1 * h[0], 0.1 * h[1], 20.0 * h[2],
            0.1 * h[3], 1.0 + 0.1 * h[4], 20.0 * h[5],
            1e-4 * h[6], 1e-4 * h[7], 1.0,
        ];
        let w = hm[6] * u + hm[7] * v + hm[8];
        let up = (hm[0] * u + hm[1] * v + hm[2]) / w;
        let vp = (hm[3] * u + hm[4] * v + hm[5]) / w;
        let norm = hm.iter().map(|x| x * x).sum::<f64>().sqrt();
        let theta: Vec<f64> = hm.iter().map(|x| x / norm).collect();
        prop_assert!(distance(ModelKind::Homography, &[u, v, up, vp], &theta, 0.0) <= 1e-10);

        // the same pair lies on the epipolar locus of F = [e']ₓ H for any e'
        let e = [h[0], h[1], 1.0];
        let m = [[hm[0], hm[1], hm[2]], [hm[3], hm[4], hm[5]], [hm[6], hm[7], hm[8]]];
        let ex = [[0.0, -e[2], e[1]], [e[2], 0.0, -e[0]], [-e[1], e[0], 0.0]];
        let mut f = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                f[i][j] = (0..3).map(|k| ex[i][k] * m[k][j]).sum();
            }
        }
        let raw = [f[2][0], f[2][1], f[0][2], f[1][2], f[0][0], f[1][0], f[0][1], f[1][1]];
        let fn_ = (raw.iter().map(|x| x * x).sum::<f64>() + f[2][2] * f[2][2]).sqrt();
        let theta: Vec<f64> = raw.iter().map(|x| x / fn_).collect();
        let d = distance(ModelKind::Fundamental, &[u, v, up, vp], &theta, -f[2][2] / fn_);
        prop_assert!(d <= 1e-10, "{d}");
    }

    #[test]
    fn quadric_distances_are_translation_invariant(
        c in prop::array::uniform3(-50.0..50.0f64), t in prop::array::uniform3(-200.0..200.0f64),
        a in 10.0..60.0f64, ratio in 0.2..1.0f64, angle in -3.2..3.2f64,
        y in prop::array::uniform3(-100.0..100.0f64),
    ) {
        let (th, al) = ellipse_theta([c[0], c[1]], a, a * ratio, angle);
        let (th2, al2) = ellipse_theta([c[0] + t[0], c[1] + t[1]], a, a * ratio, angle);
        let d1 = distance(ModelKind::Ellipse2d, &[y[0], y[1]], &th, al);
        let d2 = distance(ModelKind::Ellipse2d, &[y[0] + t[0], y[1] + t[1]], &th2, al2);
        prop_assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0), "{d1} vs {d2}");

        let (th, al) = sphere_theta(c, a);
        let (th2, al2) = sphere_theta([c[0] + t[0], c[1] + t[1], c[2] + t[2]], a);
        let d1 = distance(ModelKind::Sphere3d, &y, &th, al);
        let d2 = distance(ModelKind::Sphere3d, &[y[0] + t[0], y[1] + t[1], y[2] + t[2]], &th2, al2);
        prop_assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0), "{d1} vs {d2}");
    }

    #[test]
    fn distance_ignores_the_sign_of_the_structure(
        theta in prop::collection::vec(-1.0..1.0f64, 5), alpha in -1.0..1.0f64, y in coords(2),
    ) {
        let n = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let th: Vec<f64> = theta.iter().map(|v| v / n).collect();
        let neg: Vec<f64> = th.iter().map(|v| -v).collect();
        let d1 = distance(ModelKind::Ellipse2d, &y, &th, alpha);
        let d2 = distance(ModelKind::Ellipse2d, &y, &neg, -alpha);
        prop_assert!(d1 == d2 || (d1.is_infinite() && d2.is_infinite()));
    }

    #[test]
    fn mean_shift_climbs_the_density(
        zs in prop::collection::vec(-10.0..10.0f64, 5..120),
        hs in prop::collection::vec(0.2..4.0f64, 120),
        start in 0usize..120,
    ) {
        let bs: Vec<f64> = zs.iter().zip(&hs).map(|(_, h)| h * h).collect();
        let p = Projections::new(zs.clone(), bs.clone(), 1.0);
        let z0 = zs[start % zs.len()];
        let mut previous = kde_direct(z0, &zs, &bs, 1.0);
        for k in 1..=30 {
            let r = p.mean_shift(z0, 0.0, k);
            let h = kde_direct(r.mode, &zs, &bs, 1.0);
            prop_assert!((r.height - h).abs() <= 1e-9 * h.max(1e-300), "reported height");
            prop_assert!(h >= previous * (1.0 - 1e-12), "iteration {k}: {h} < {previous}");
            previous = h;
            if r.iterations < k {
                break;
            }
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    [c[0] / n, c[1] / n, c[2] / n]
}

/// Sorted sequences mixing exact segment boundaries, repeated values,
/// zeros, dense clusters and sparse tails.
fn distance_sequence() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (0.05..5.0f64, prop::collection::vec((0u8..4, 0.0..1.0f64, 0u32..40), 1..400)).prop_map(|(width, raw)| {
        let mut d: Vec<f64> = raw
            .into_iter()
            .map(|(kind, x, k)| match kind {
                0 => k as f64 * width,
                1 => x * width * 3.0,
                2 => x * width * 40.0,
                _ => 0.0,
            })
            .collect();
        d.sort_by(f64::total_cmp);
        (d, width)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn expansion_matches_brute_force((sorted, width) in distance_sequence()) {
        let k_max = segment_limit(&sorted, width);
        prop_assert_eq!(k_max, brute_limit(&sorted, width));
        prop_assert_eq!(segment_counts(&sorted, width, k_max + 1).unwrap(), brute_counts(&sorted, width, k_max + 1));
        prop_assert_eq!(expand(&sorted, width).unwrap(), brute_expand(&sorted, width));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selection_matches_full_sort(
        n in 10usize..=200, m in 1usize..=50, seed in any::<u64>(), eps_frac in 0.01..1.0f64,
        ellipse in any::<bool>(),
    ) {
        let kind = if ellipse { ModelKind::Ellipse2d } else { ModelKind::Line2d };
        let data = generate(&scenario::single_line(5.0, seed).with_seed(seed)).unwrap();
        let pts: Vec<InputPoint> = data.points.into_iter().take(n).map(|p| InputPoint::new(vec![p.y[0] / 100.0, p.y[1] / 100.0])).collect();
        let lifted = LiftedPoints::new(kind, &pts).unwrap();
        let n_eps = ((eps_frac * n as f64).ceil() as usize).clamp(1, n);
        let Ok(batch) = sample_hypotheses(&lifted, m, seed) else { return Ok(()) };
        let best = select_best(&lifted, &batch.hypotheses, n_eps).unwrap();
        let (score, index) = full_sort_best(&lifted, &batch.hypotheses, n_eps);
        prop_assert_eq!(best.hypothesis.index, index);
        prop_assert_eq!(best.score, score);
        let seq = sorted_sequence(&lifted, &best.hypothesis.theta, best.hypothesis.alpha);
        prop_assert_eq!(best.sorted, seq);
    }
}

fn document_with_threads(threads: usize, points: &[InputPoint], config: &EstimationConfig) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| to_json(&run(points, config).unwrap()).unwrap())
}

#[test]
fn one_and_eight_workers_give_identical_documents() {
    let cases = [
        (scenario::five_lines(3), 1000),
        (scenario::three_ellipses(4), 2000),
        (scenario::two_planes_homography(5), 1000),
    ];
    for (spec, trials) in cases {
        let data = generate(&spec).unwrap();
        let config = EstimationConfig::new(spec.model).trials(trials).seed(17);
        let one = document_with_threads(1, &data.points, &config);
        let eight = document_with_threads(8, &data.points, &config);
        assert!(one == eight, "{} differs between 1 and 8 workers", spec.name);
    }
}

#[test]
fn generation_is_reproducible() {
    for preset in misre::data::Preset::ALL {
        let a = generate(&preset.spec(99)).unwrap();
        let b = generate(&preset.spec(99)).unwrap();
        assert_eq!(a, b, "{preset}");
        for (label, model) in a.spec.models.iter().enumerate() {
            assert_eq!(a.count(label as i64), model.n_in, "{preset}");
        }
        assert_eq!(a.count(-1), a.spec.n_out, "{preset}");
    }
}
