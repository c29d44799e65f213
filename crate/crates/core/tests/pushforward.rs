use geoexplore::belief::{epistemic_value, GaussianBelief, SensorModel};
use geoexplore::geometry::{transition_map, Frame, GeometryKind, Point, Transform};
use geoexplore::oracle::mc_mutual_information;
use geoexplore::pushforward::{
    pushforward_affine, pushforward_projective, pushforward_projective_with_stats,
    IntegrationConfig,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (GaussianBelief, geoexplore::geometry::AffineMap) {
    let mean = Point::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
    let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
    let cov = &a * a.transpose() + DMatrix::identity(2, 2) * 0.1;
    let f = |rng: &mut ChaCha8Rng| {
        Frame::planar(
            [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            rng.random_range(0.0..6.0),
        )
    };
    let (from, to) = (f(rng), f(rng));
    let Transform::Affine(map) = transition_map(&from, &to, GeometryKind::Euclidean) else {
        unreachable!()
    };
    (GaussianBelief::new(mean, cov).unwrap(), map)
}

fn deviation(sampled: &GaussianBelief, exact: &GaussianBelief) -> f64 {
    (sampled.mean() - exact.mean()).norm() + (sampled.cov() - exact.cov()).norm()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    (xs[n / 2 - 1] + xs[n / 2]) / 2.0
}

#[test]
fn doubling_samples_shrinks_median_deviation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<_> = (0..20).map(|_| random_case(&mut rng)).collect();
    let median_at = |n: usize| {
        median(
            cases
                .iter()
                .enumerate()
                .map(|(i, (belief, map))| {
                    let exact = pushforward_affine(belief, map).unwrap();
                    let cfg = IntegrationConfig::monte_carlo(n, 1000 + i as u64);
                    let sampled = pushforward_projective(belief, &map.to_homogeneous(), &cfg).unwrap();
                    deviation(&sampled, &exact)
                })
                .collect(),
        )
    };
    let (single, double) = (median_at(10_000), median_at(20_000));
    assert!(double < single, "{single} -> {double}");
}

#[test]
fn grid_quadrature_is_exact_for_affine_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (belief, map) = random_case(&mut rng);
        let exact = pushforward_affine(&belief, &map).unwrap();
        // ±6σ: truncation at 5σ alone would drop ~1.5e-5 of the variance
        let grid = pushforward_projective(&belief, &map.to_homogeneous(), &IntegrationConfig::grid(41, 6.0))
            .unwrap();
        assert!(deviation(&grid, &exact) < 1e-5);
    }
}

#[test]
fn monte_carlo_and_grid_agree_on_a_projective_map() {
    let kind = GeometryKind::Projective { gamma: 1.0 };
    let from = Frame::planar([0.0, 0.0], 0.0);
    let to = Frame::planar([0.0, 0.1], 0.0);
    let Transform::Projective(h) = transition_map(&from, &to, kind) else {
        unreachable!()
    };
    let belief = GaussianBelief::isotropic(Point::from_column_slice(&[0.0, 2.0 / 3.0]), 0.3).unwrap();
    let (mc, stats) =
        pushforward_projective_with_stats(&belief, &h, &IntegrationConfig::monte_carlo(200_000, 3)).unwrap();
    assert_eq!(stats.rejected, 0);
    let grid = pushforward_projective(&belief, &h, &IntegrationConfig::grid(61, 6.0)).unwrap();
    // 200k samples: standard errors near 1e-3 on these moments
    assert!((mc.mean() - grid.mean()).amax() < 5e-3);
    assert!((mc.cov() - grid.cov()).amax() < 5e-3);
}

#[test]
fn mutual_information_z_scores_are_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut sum_sq = 0.0;
    let n = 100;
    for i in 0..n {
        let d = 2 + i % 2;
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let belief = GaussianBelief::new(Point::zeros(d), &a * a.transpose() + DMatrix::identity(d, d) * 0.05)
            .unwrap();
        let sensor = SensorModel::gaussian(rng.random_range(0.2..2.0)).unwrap();
        let exact = epistemic_value(&belief, &sensor).unwrap();
        let est = mc_mutual_information(&belief, &sensor, 100_000, i as u64).unwrap();
        sum_sq += ((est.value - exact) / est.std_error).powi(2);
    }
    let rms = (sum_sq / n as f64).sqrt();
    // near 1 when the reported standard errors are honest
    assert!((0.7..1.25).contains(&rms), "rms z = {rms}");
}
