use geoexplore::belief::{
    condition, epistemic_value, epistemic_value_det_ratio, loewner_le, GaussianBelief, SensorModel,
};
use geoexplore::geometry::{
    face_object_frame, rho, rho_inverse, transition_map, Frame, GeometryKind, Point, Transform,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn planar_frame() -> impl Strategy<Value = Frame> {
    (-5.0..5.0f64, -5.0..5.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(x, y, a)| Frame::planar([x, y], a))
}

fn spatial_frame() -> impl Strategy<Value = Frame> {
    (prop::array::uniform3(-5.0..5.0f64), prop::array::uniform3(-3.0..3.0f64))
        .prop_map(|(o, r)| Frame::spatial(o, r))
}

fn kind() -> impl Strategy<Value = GeometryKind> {
    prop_oneof![
        Just(GeometryKind::Euclidean),
        (0.2..3.0f64).prop_map(|gamma| GeometryKind::Projective { gamma }),
    ]
}

fn same(a: &Transform, b: &Transform) -> f64 {
    let (a, b) = (a.to_homogeneous(), b.to_homogeneous());
    let (a, b) = (a.matrix(), b.matrix());
    (a - b).amax().min((a + b).amax())
}

/// Covariance `AAᵀ + 0.05 I` from free entries.
fn covariance(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.5..1.5f64, d * d).prop_map(move |v| {
        let a = DMatrix::from_vec(d, d, v);
        &a * a.transpose() + DMatrix::identity(d, d) * 0.05
    })
}

fn belief3() -> impl Strategy<Value = GaussianBelief> {
    (prop::array::uniform3(-2.0..2.0f64), covariance(3))
        .prop_map(|(m, c)| GaussianBelief::new(Point::from_column_slice(&m), c).unwrap())
}

proptest! {
    #[test]
    fn transitions_compose_through_an_intermediate_frame(
        a in spatial_frame(), b in spatial_frame(), c in spatial_frame(), k in kind()
    ) {
        let direct = transition_map(&a, &c, k);
        let via = transition_map(&b, &c, k).compose(&transition_map(&a, &b, k));
        prop_assert!(same(&direct, &via) < 1e-10);
    }

    #[test]
    fn reversed_transition_is_the_inverse(a in planar_frame(), b in planar_frame(), k in kind()) {
        let forward = transition_map(&a, &b, k);
        prop_assert!(same(&transition_map(&b, &a, k), &forward.inverse()) < 1e-10);
    }

    #[test]
    fn euclidean_transitions_are_rigid(
        a in spatial_frame(), b in spatial_frame(),
        p in prop::array::uniform3(-4.0..4.0f64), q in prop::array::uniform3(-4.0..4.0f64)
    ) {
        let t = transition_map(&a, &b, GeometryKind::Euclidean);
        let (p, q) = (Point::from_column_slice(&p), Point::from_column_slice(&q));
        let mapped = (t.apply(&p).unwrap() - t.apply(&q).unwrap()).norm();
        prop_assert!((mapped - (p - q).norm()).abs() < 1e-10);
    }

    #[test]
    fn rho_round_trips(x in -3.0..3.0f64, y in -3.0..3.0f64, z in 0.0..20.0f64, gamma in 0.1..4.0f64) {
        let p = Point::from_column_slice(&[x, y, z]);
        let back = rho_inverse(&rho(&p, gamma).unwrap(), gamma).unwrap();
        prop_assert!((back - &p).amax() < 1e-12 * (1.0 + p.amax()));
    }

    #[test]
    fn rho_keeps_the_front_half_space_below_the_horizon(z in 0.0..1e6f64, gamma in 0.1..4.0f64) {
        let p = Point::from_column_slice(&[0.0, z]);
        let depth = rho(&p, gamma).unwrap()[1];
        prop_assert!((0.0..=1.0 / gamma).contains(&depth));
    }

    #[test]
    fn facing_frame_sees_the_object_straight_ahead(
        p in prop::array::uniform3(-5.0..5.0f64), o in prop::array::uniform3(-5.0..5.0f64)
    ) {
        let (p, o) = (Point::from_column_slice(&p), Point::from_column_slice(&o));
        prop_assume!((&o - &p).norm() > 1e-3);
        let frame = face_object_frame(&p, &o).unwrap();
        let local = frame.frame_map().apply(&o);
        prop_assert!(local[0].abs() < 1e-10 && local[1].abs() < 1e-10);
        prop_assert!((local[2] - (&o - &p).norm()).abs() < 1e-10);
        prop_assert!((frame.basis().determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn posterior_shrinks_and_loses_value(
        b in belief3(), eps in 0.05..3.0f64, obs in prop::array::uniform3(-3.0..3.0f64)
    ) {
        let sensor = SensorModel::gaussian(eps).unwrap();
        let post = condition(&b, &sensor, &Point::from_column_slice(&obs)).unwrap();
        prop_assert!(loewner_le(post.cov(), b.cov(), 1e-10));
        prop_assert!(
            epistemic_value(&post, &sensor).unwrap() < epistemic_value(&b, &sensor).unwrap()
        );
    }

    #[test]
    fn value_forms_agree_and_ignore_rotation(b in belief3(), eps in 0.05..3.0f64, axis in prop::array::uniform3(-3.0..3.0f64)) {
        let sensor = SensorModel::gaussian(eps).unwrap();
        let c = epistemic_value(&b, &sensor).unwrap();
        prop_assert!((epistemic_value_det_ratio(&b, &sensor).unwrap() - c).abs() < 1e-10);
        let q = Frame::spatial([0.0; 3], axis).basis().clone();
        let rotated = GaussianBelief::new(b.mean().clone(), &q * b.cov() * q.transpose()).unwrap();
        prop_assert!((epistemic_value(&rotated, &sensor).unwrap() - c).abs() < 1e-10);
    }

    #[test]
    fn value_grows_with_covariance_scale(b in belief3(), eps in 0.05..3.0f64, alpha in 1.001..5.0f64) {
        let sensor = SensorModel::gaussian(eps).unwrap();
        let scaled = GaussianBelief::new(b.mean().clone(), b.cov() * alpha).unwrap();
        prop_assert!(epistemic_value(&scaled, &sensor).unwrap() > epistemic_value(&b, &sensor).unwrap());
    }
}
