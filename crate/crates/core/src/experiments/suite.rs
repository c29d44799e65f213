//! Verification suites. Each check returns one [`CheckResult`] row.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::agent::{enumerate_moves, score_all, select_move, AgentState, Candidate, ExplorationConfig};
use crate::belief::{
    condition, epistemic_value, epistemic_value_det_ratio, GaussianBelief, SensorModel,
};
use crate::geometry::{
    face_object_frame, rho, rho_inverse, rho_transform, transition_map, Frame, GeometryKind,
    HomTransform, Point, Transform,
};
use crate::oracle::{
    check_epsilon, facing_frames, jacobian_preference_check, mc_mutual_information,
    replicated_ball_values, spearman, Estimate, SampleCloud,
};
use crate::pushforward::{pushforward_affine, pushforward_projective, IntegrationConfig};

use super::output::write_report;
use super::{CheckResult, ExperimentConfig, ExperimentError, Report};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_point(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Point {
    Point::from_fn(d, |_, _| scale * normal(rng))
}

fn random_frame(d: usize, rng: &mut ChaCha8Rng) -> Frame {
    let mut u = || rng.random_range(-5.0..5.0);
    if d == 2 {
        Frame::planar([u(), u()], rng.random_range(0.0..TAU))
    } else {
        let origin = [u(), u(), u()];
        let axis = [normal(rng), normal(rng), normal(rng)];
        Frame::spatial(origin, axis)
    }
}

/// Well-conditioned random covariance.
fn random_spd(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| normal(rng));
    &a * a.transpose() / d as f64 + DMatrix::identity(d, d) * 0.05
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| normal(rng)).qr().q()
}

/// Largest entry-wise difference of two canonical homogeneous matrices,
/// up to overall sign.
fn hom_distance(a: &HomTransform, b: &HomTransform) -> f64 {
    let (a, b) = (a.matrix(), b.matrix());
    (a - b).amax().min((a + b).amax())
}

fn transform_distance(a: &Transform, b: &Transform) -> f64 {
    hom_distance(&a.to_homogeneous(), &b.to_homogeneous())
}

fn kinds_for(rng: &mut ChaCha8Rng) -> [GeometryKind; 2] {
    [
        GeometryKind::Euclidean,
        GeometryKind::Projective {
            gamma: rng.random_range(0.2..3.0),
        },
    ]
}

/// Identity, inverse, composition and associativity of transition maps over
/// `frames` random frames per dimension and geometry.
pub fn check_group_axioms(frames: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let list: Vec<Frame> = (0..frames.max(4)).map(|_| random_frame(d, &mut rng)).collect();
        for kind in kinds_for(&mut rng) {
            let id = Transform::Affine(crate::geometry::AffineMap::identity(d));
            for i in 0..list.len() {
                let (a, b, c) = (&list[i], &list[(i + 1) % list.len()], &list[(i + 2) % list.len()]);
                let c3 = &list[(i + 3) % list.len()];
                let ab = transition_map(a, b, kind);
                let bc = transition_map(b, c, kind);
                let cd = transition_map(c, c3, kind);
                worst = worst
                    .max(transform_distance(&transition_map(a, a, kind), &id))
                    .max(transform_distance(&transition_map(b, a, kind), &ab.inverse()))
                    .max(transform_distance(&ab.compose(&ab.inverse()), &id))
                    .max(transform_distance(&transition_map(a, c, kind), &bc.compose(&ab)))
                    .max(transform_distance(
                        &cd.compose(&bc).compose(&ab),
                        &cd.compose(&bc.compose(&ab)),
                    ));
            }
        }
    }
    CheckResult::at_most("group_axioms", worst, 1e-10)
}

/// Euclidean transition maps preserve distances.
pub fn check_rigidity(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let d = 2 + i % 2;
        let (a, b) = (random_frame(d, &mut rng), random_frame(d, &mut rng));
        let t = transition_map(&a, &b, GeometryKind::Euclidean);
        let (p, q) = (random_point(d, 3.0, &mut rng), random_point(d, 3.0, &mut rng));
        let mapped = (t.apply(&p).unwrap() - t.apply(&q).unwrap()).norm();
        worst = worst.max((mapped - (p - q).norm()).abs());
    }
    CheckResult::at_most("euclidean_rigidity", worst, 1e-10)
}

/// The projective embedding of a frame acts as `ρ` after the frame map.
pub fn check_embedding_factorization(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let d = 2 + i % 2;
        let frame = random_frame(d, &mut rng);
        let gamma = rng.random_range(0.2..3.0);
        let embed = crate::geometry::projective_embedding(&frame, gamma);
        // a point in front of the frame
        let mut local = random_point(d, 1.0, &mut rng);
        local[d - 1] = rng.random_range(0.0..5.0);
        let world = frame.frame_map().inverse().apply(&local);
        let direct = embed.apply(&world).unwrap();
        let factored = rho(&local, gamma).unwrap();
        worst = worst.max((direct - factored).amax());
    }
    CheckResult::at_most("embedding_factorization", worst, 1e-10)
}

fn fd_jacobian(t: &Transform, p: &Point) -> DMatrix<f64> {
    let d = p.len();
    let mut j = DMatrix::zeros(d, d);
    for k in 0..d {
        let h = 1e-5 * (1.0 + p[k].abs());
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[k] += h;
        minus[k] -= h;
        let col = (t.apply(&plus).unwrap() - t.apply(&minus).unwrap()) / (2.0 * h);
        j.set_column(k, &col);
    }
    j
}

/// Analytic Jacobian determinants of `ρ` and of random projective
/// transition maps against central differences.
pub fn check_jacobian_finite_differences(points: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let d = 2 + i % 2;
        let gamma = rng.random_range(0.2..3.0);
        let rho_map = Transform::Projective(rho_transform(d, gamma));
        let mut p = random_point(d, 1.0, &mut rng);
        // keep γz + 1 in [0.3, 6]
        p[d - 1] = rng.random_range(-0.7..5.0) / gamma;
        let mut candidates = vec![(rho_map, p.clone())];
        let (a, b) = (random_frame(d, &mut rng), random_frame(d, &mut rng));
        let psi = transition_map(&a, &b, GeometryKind::Projective { gamma });
        let (c, e) = psi.to_homogeneous().denominator();
        let q = random_point(d, 0.3, &mut rng);
        if (c.dot(&q) + e).abs() > 0.2 * (c.norm() + e.abs()) {
            candidates.push((psi, q));
        }
        for (t, x) in candidates {
            let analytic = t.jacobian_det(&x).unwrap();
            let numeric = fd_jacobian(&t, &x).determinant();
            worst = worst.max((analytic - numeric).abs() / analytic.abs());
        }
    }
    CheckResult::at_most("jacobian_finite_differences", worst, 1e-5)
}

/// `|det ∇ψ|` at the object for frames one and two units away, `γ = 1`,
/// `d = 3`, against `(3/2)⁴`.
pub fn check_jacobian_ratio() -> CheckResult {
    let object = Point::from_column_slice(&[0.0, 0.0, 0.0]);
    let positions = [
        Point::from_column_slice(&[1.0, 0.0, 0.0]),
        Point::from_column_slice(&[0.0, -2.0, 0.0]),
    ];
    let stat = facing_frames(&positions, &object)
        .and_then(|frames| jacobian_preference_check(&frames, &object, 1.0))
        .map(|dets| (dets[0].1 / dets[1].1 - 5.0625).abs())
        .unwrap_or(f64::NAN);
    CheckResult::at_most("jacobian_distance_ratio", stat, 1e-9)
}

/// Spearman correlation between Jacobian magnitude and closeness over
/// random sets of facing frames; the statistic is the smallest one seen.
pub fn check_jacobian_ranking(sets: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest = f64::INFINITY;
    for s in 0..sets {
        let d = 2 + s % 2;
        let object = random_point(d, 2.0, &mut rng);
        let gamma = rng.random_range(0.2..3.0);
        let positions: Vec<Point> = (0..6)
            .map(|_| {
                let r = rng.random_range(0.3..6.0);
                let a = rng.random_range(0.0..TAU);
                let mut p = object.clone();
                p[0] += r * a.cos();
                p[1] += r * a.sin();
                if d == 3 {
                    p[2] += rng.random_range(-0.5..0.5) * r;
                }
                p
            })
            .collect();
        let rho_val = facing_frames(&positions, &object)
            .and_then(|frames| jacobian_preference_check(&frames, &object, gamma))
            .map(|dets| {
                let jac: Vec<f64> = dets.iter().map(|(_, j)| *j).collect();
                let closeness: Vec<f64> = positions.iter().map(|p| -(&object - p).norm()).collect();
                spearman(&jac, &closeness)
            })
            .unwrap_or(f64::NAN);
        lowest = lowest.min(rho_val);
        if rho_val.is_nan() {
            lowest = f64::NAN;
            break;
        }
    }
    CheckResult::at_least("jacobian_ranking_spearman", lowest, 1.0)
}

pub fn check_rho_round_trip(points: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let d = 2 + i % 2;
        let gamma = rng.random_range(0.2..3.0);
        let mut p = random_point(d, 2.0, &mut rng);
        p[d - 1] = rng.random_range(-0.5..10.0) / gamma;
        let back = rho_inverse(&rho(&p, gamma).unwrap(), gamma).unwrap();
        worst = worst.max((back - &p).amax() / (1.0 + p.amax()));
    }
    CheckResult::at_most("rho_round_trip", worst, 1e-12)
}

fn random_instance(rng: &mut ChaCha8Rng) -> (GaussianBelief, SensorModel) {
    let d = 2 + (rng.random::<u32>() % 2) as usize;
    let belief = GaussianBelief::new(random_point(d, 1.0, rng), random_spd(d, rng)).unwrap();
    let sensor = SensorModel::gaussian(rng.random_range(0.2..2.0)).unwrap();
    (belief, sensor)
}

/// Closed-form mutual information against the Monte-Carlo estimate; the
/// statistic is the largest z-score.
pub fn check_mi_closed_form(instances: usize, samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let (belief, sensor) = random_instance(&mut rng);
        let z = epistemic_value(&belief, &sensor)
            .and_then(|exact| {
                let est = mc_mutual_information(&belief, &sensor, samples, seed.wrapping_add(i as u64))?;
                Ok((est.value - exact).abs() / est.std_error)
            })
            .unwrap_or(f64::NAN);
        worst = if z.is_nan() { f64::NAN } else { worst.max(z) };
    }
    CheckResult::at_most("mi_closed_form_vs_mc", worst, 3.0)
}

/// `Σ = I`, `ε = 1`, `d = 3`: closed form and Monte Carlo against `½ ln 8`.
pub fn check_mi_unit_case(samples: usize, seed: u64) -> Vec<CheckResult> {
    let belief = GaussianBelief::isotropic(Point::zeros(3), 1.0).unwrap();
    let sensor = SensorModel::gaussian(1.0).unwrap();
    let expected = 0.5 * 8f64.ln();
    let exact = epistemic_value(&belief, &sensor).map_or(f64::NAN, |v| (v - expected).abs());
    let mc = mc_mutual_information(&belief, &sensor, samples, seed)
        .map_or(f64::NAN, |e| (e.value - expected).abs() / e.std_error);
    vec![
        CheckResult::at_most("mi_unit_case_closed_form", exact, 1e-12),
        CheckResult::at_most("mi_unit_case_mc_z", mc, 3.0),
    ]
}

/// Rotation invariance, determinant identity, scale monotonicity and
/// posterior decrease of the Gaussian epistemic value.
pub fn check_mi_properties(cases: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rot, mut det, mut mono, mut post) = (0f64, 0f64, f64::INFINITY, f64::INFINITY);
    for _ in 0..cases {
        let (belief, sensor) = random_instance(&mut rng);
        let d = belief.dim();
        let c = epistemic_value(&belief, &sensor).unwrap();
        let q = random_orthogonal(d, &mut rng);
        let rotated =
            GaussianBelief::new(belief.mean().clone(), &q * belief.cov() * q.transpose()).unwrap();
        rot = rot.max((epistemic_value(&rotated, &sensor).unwrap() - c).abs());
        det = det.max((epistemic_value_det_ratio(&belief, &sensor).unwrap() - c).abs());
        let alpha = rng.random_range(1.01..3.0);
        let scaled = GaussianBelief::new(belief.mean().clone(), belief.cov() * alpha).unwrap();
        mono = mono.min(epistemic_value(&scaled, &sensor).unwrap() - c);
        let obs = belief.mean() + random_point(d, 1.0, &mut rng);
        let posterior = condition(&belief, &sensor, &obs).unwrap();
        post = post.min(c - epistemic_value(&posterior, &sensor).unwrap());
    }
    vec![
        CheckResult::at_most("mi_rotation_invariance", rot, 1e-10),
        CheckResult::at_most("mi_determinant_identity", det, 1e-10),
        CheckResult::above("mi_scale_monotone", mono, 0.0),
        CheckResult::above("mi_posterior_decrease", post, 0.0),
    ]
}

/// Affine maps embedded as homogeneous matrices pushed through the
/// projective pushforward, against the exact affine answer. Rows: largest
/// mean z-score (limit 4) and largest covariance z-score (limit 8).
pub fn check_pushforward_affine(cases: usize, cfg: &IntegrationConfig, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.sample_count as f64;
    let (mut mean_z, mut cov_z) = (0f64, 0f64);
    for i in 0..cases {
        let d = 2 + i % 2;
        let belief = GaussianBelief::new(random_point(d, 1.0, &mut rng), random_spd(d, &mut rng)).unwrap();
        let (a, b) = (random_frame(d, &mut rng), random_frame(d, &mut rng));
        let Transform::Affine(map) = transition_map(&a, &b, GeometryKind::Euclidean) else {
            unreachable!("Euclidean transitions are affine")
        };
        let exact = pushforward_affine(&belief, &map).unwrap();
        let cfg_i = cfg.with_seed(seed.wrapping_add(i as u64));
        let Ok(sampled) = pushforward_projective(&belief, &map.to_homogeneous(), &cfg_i) else {
            return vec![
                CheckResult::errored("pushforward_affine_mean_z", 4.0),
                CheckResult::errored("pushforward_affine_cov_z", 8.0),
            ];
        };
        let s = exact.cov();
        for r in 0..d {
            let se = (s[(r, r)] / n).sqrt();
            mean_z = mean_z.max((sampled.mean()[r] - exact.mean()[r]).abs() / se);
            for c in 0..d {
                let se = ((s[(r, r)] * s[(c, c)] + s[(r, c)].powi(2)) / n).sqrt();
                cov_z = cov_z.max((sampled.cov()[(r, c)] - s[(r, c)]).abs() / se);
            }
        }
    }
    vec![
        CheckResult::at_most("pushforward_affine_mean_z", mean_z, 4.0),
        CheckResult::at_most("pushforward_affine_cov_z", cov_z, 8.0),
    ]
}

/// Tight beliefs (`Σ = 1e-6·I`) through random projective maps: mean
/// against the mapped point (limit 1e-3) and covariance against `JΣJᵀ`
/// (relative Frobenius error, limit 0.05).
pub fn check_pushforward_linearization(cases: usize, cfg: &IntegrationConfig, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean_err, mut cov_err) = (0f64, 0f64);
    let mut done = 0;
    while done < cases {
        let d = 2 + done % 2;
        let noise = DMatrix::from_fn(d + 1, d + 1, |_, _| 0.2 * normal(&mut rng));
        let Ok(h) = HomTransform::new(DMatrix::identity(d + 1, d + 1) + noise) else {
            continue;
        };
        let p = random_point(d, 0.5, &mut rng);
        let (c, e) = h.denominator();
        let w = c.dot(&p) + e;
        if w.abs() < 0.5 * (c.norm() + e.abs()) {
            continue;
        }
        let belief = GaussianBelief::isotropic(p.clone(), 1e-3).unwrap();
        let cfg_i = cfg.with_seed(seed.wrapping_add(done as u64));
        let (Ok(pushed), Ok(target), Ok(j)) =
            (pushforward_projective(&belief, &h, &cfg_i), h.apply(&p), h.jacobian(&p))
        else {
            return vec![
                CheckResult::errored("pushforward_linearization_mean", 1e-3),
                CheckResult::errored("pushforward_linearization_cov", 0.05),
            ];
        };
        let expected = &j * belief.cov() * j.transpose();
        mean_err = mean_err.max((pushed.mean() - target).amax());
        cov_err = cov_err.max((pushed.cov() - &expected).norm() / expected.norm());
        done += 1;
    }
    vec![
        CheckResult::at_most("pushforward_linearization_mean", mean_err, 1e-3),
        CheckResult::at_most("pushforward_linearization_cov", cov_err, 0.05),
    ]
}

fn scored_values(candidates: &[Candidate]) -> Vec<f64> {
    candidates.iter().map(Candidate::value).collect()
}

/// Euclidean scoring over random beliefs and positions: spread of the nine
/// values (limit 1e-6); a nonzero second row counts cases where Idle was
/// not selected.
pub fn check_euclidean_selection(cases: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut spread, mut not_idle) = (0f64, 0usize);
    for i in 0..cases {
        let d = 2 + i % 2;
        let mut cfg = ExplorationConfig::planar_default(GeometryKind::Euclidean);
        cfg.start = random_point(d, 3.0, &mut rng);
        cfg.object = cfg.start.clone();
        let a = rng.random_range(0.0..TAU);
        let r = rng.random_range(0.5..5.0);
        cfg.object[0] += r * a.cos();
        cfg.object[1] += r * a.sin();
        let frame = face_object_frame(&cfg.start, &cfg.object).unwrap();
        let belief = GaussianBelief::new(random_point(d, 2.0, &mut rng), random_spd(d, &mut rng)).unwrap();
        let state = AgentState {
            frame,
            belief,
            step_index: 0,
        };
        let Ok(candidates) = score_all(&cfg, &state, 0) else {
            return vec![
                CheckResult::errored("euclidean_value_spread", 1e-6),
                CheckResult::errored("euclidean_non_idle_selections", 0.0),
            ];
        };
        let values = scored_values(&candidates);
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        spread = spread.max(hi - lo);
        let scored: Vec<_> = candidates
            .into_iter()
            .filter_map(|c| match c {
                Candidate::Scored(s) => Some(s),
                Candidate::Excluded { .. } => None,
            })
            .collect();
        if !select_move(&scored, cfg.idle_band).is_ok_and(|m| m.is_idle()) {
            not_idle += 1;
        }
    }
    vec![
        CheckResult::at_most("euclidean_value_spread", spread, 1e-6),
        CheckResult::at_most("euclidean_non_idle_selections", not_idle as f64, 0.0),
    ]
}

/// Projective scoring from the paper-style start with the object straight
/// ahead at each distance: counts distances where the approach move is not
/// the unique maximum.
pub fn check_projective_approach(distances: &[f64], gamma: f64, seed: u64) -> CheckResult {
    let mut misses = 0;
    for (i, &r) in distances.iter().enumerate() {
        let mut cfg = ExplorationConfig::planar_default(GeometryKind::Projective { gamma });
        cfg.object = Point::from_column_slice(&[0.0, r]);
        cfg.seed = seed.wrapping_add(i as u64);
        let ok = cfg
            .initial_state()
            .and_then(|state| score_all(&cfg, &state, 0))
            .is_ok_and(|c| {
                let v = scored_values(&c);
                v.iter().enumerate().all(|(k, x)| k == 1 || *x < v[1])
            });
        if !ok {
            misses += 1;
        }
    }
    CheckResult::at_most("projective_approach_argmax", misses as f64, 0.0)
}

/// Invariant suite; writes `check_report.csv`.
pub fn run_check_suite(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    config.validate()?;
    let seed = config.seed;
    let mut checks = vec![
        check_group_axioms(1000, seed),
        check_rigidity(1000, seed.wrapping_add(1)),
        check_embedding_factorization(1000, seed.wrapping_add(2)),
        check_jacobian_finite_differences(100, seed.wrapping_add(3)),
        check_jacobian_ratio(),
        check_jacobian_ranking(config.oracle.ranking_sets, seed.wrapping_add(4)),
        check_rho_round_trip(1000, seed.wrapping_add(5)),
    ];
    checks.extend(check_mi_properties(200, seed.wrapping_add(6)));
    let integration = config.integration;
    checks.extend(check_pushforward_affine(20, &integration, seed.wrapping_add(7)));
    checks.extend(check_pushforward_linearization(20, &integration, seed.wrapping_add(8)));
    checks.extend(check_euclidean_selection(100, seed.wrapping_add(9)));
    let distances: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    checks.push(check_projective_approach(&distances, config.gamma, seed.wrapping_add(10)));
    let report = Report { checks };
    write_report(&config.output_dir, "check_report.csv", &config.snapshot(), &report)?;
    Ok(report)
}

/// Tight belief at the object's internal coordinate from the configured
/// start, and the nine transition maps of the first move set.
fn ball_setup(config: &ExperimentConfig, kind: GeometryKind) -> crate::Result<(GaussianBelief, Vec<Transform>)> {
    let cfg = config.exploration(kind);
    let frame = face_object_frame(&cfg.start, &cfg.object)?;
    let mean = crate::agent::observe(&frame, &cfg.object, kind, cfg.raw_frame_observation, None)?;
    let belief = GaussianBelief::isotropic(mean, config.oracle.belief_sigma)?;
    let state = AgentState {
        frame: frame.clone(),
        belief: belief.clone(),
        step_index: 0,
    };
    let maps = enumerate_moves(&state, &cfg.object, cfg.step_norm)?
        .into_iter()
        .map(|mv| {
            let p = mv.apply_to(&cfg.start, &cfg.object)?;
            Ok(transition_map(&frame, &face_object_frame(&p, &cfg.object)?, kind))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok((belief, maps))
}

fn max_pairwise_z(est: &[Estimate]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in est.iter().enumerate() {
        for b in &est[i + 1..] {
            worst = worst.max(a.z_score(b));
        }
    }
    worst
}

/// Index of the approach and retreat moves in the move set.
const APPROACH: usize = 1;
const RETREAT: usize = 5;

/// Uniform-ball oracle on the first move set at radius `factor` times the
/// belief std: Euclidean invariance (largest pairwise z, limit 3), projective
/// argmax margin of the approach move, and approach−retreat z (limit 3).
pub fn check_ball_oracle(config: &ExperimentConfig, factor: f64) -> Vec<CheckResult> {
    let mut checks = Vec::with_capacity(3);
    let o = &config.oracle;
    let eps = factor * o.belief_sigma;
    let tag = format!("{factor}");
    let run = |kind| -> crate::Result<Vec<Estimate>> {
        let (belief, maps) = ball_setup(config, kind)?;
        let probe = SampleCloud::sample(&belief, o.cloud_size, config.seed)?;
        check_epsilon(&probe, eps)?;
        replicated_ball_values(&belief, &maps, eps, o.cloud_size, o.replicates, config.seed)
    };
    match run(GeometryKind::Euclidean) {
        Ok(est) => checks.push(CheckResult::at_most(
            format!("ball_euclidean_invariance_eps_factor{tag}"),
            max_pairwise_z(&est),
            3.0,
        )),
        Err(_) => checks.push(CheckResult::errored(format!("ball_euclidean_invariance_eps_factor{tag}"), 3.0)),
    }
    match run(GeometryKind::Projective { gamma: config.gamma }) {
        Ok(est) => {
            let margin = est
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != APPROACH)
                .map(|(_, e)| est[APPROACH].value - e.value)
                .fold(f64::INFINITY, f64::min);
            checks.push(CheckResult::above(format!("ball_projective_argmax_eps_factor{tag}"), margin, 0.0));
            let z = (est[APPROACH].value - est[RETREAT].value)
                / est[APPROACH].std_error.hypot(est[RETREAT].std_error);
            checks.push(CheckResult::above(format!("ball_projective_gap_z_eps_factor{tag}"), z, 3.0));
        }
        Err(_) => {
            checks.push(CheckResult::errored(format!("ball_projective_argmax_eps_factor{tag}"), 0.0));
            checks.push(CheckResult::errored(format!("ball_projective_gap_z_eps_factor{tag}"), 3.0));
        }
    }
    checks
}

/// Smallest change over seeds of the approach−retreat gap when ε is halved.
fn halving_statistic(config: &ExperimentConfig) -> crate::Result<f64> {
    let o = &config.oracle;
    let (belief, maps) = ball_setup(config, GeometryKind::Projective { gamma: config.gamma })?;
    let pair = [maps[APPROACH].clone(), maps[RETREAT].clone()];
    let large = o.halving_epsilon_factor * o.belief_sigma;
    let mut worst = f64::INFINITY;
    for s in 0..o.halving_seeds {
        let seed = config.seed.wrapping_add(1000 * s as u64);
        let gap = |eps: f64| -> crate::Result<f64> {
            let est = replicated_ball_values(&belief, &pair, eps, o.halving_cloud_size, 2, seed)?;
            Ok(est[0].value - est[1].value)
        };
        worst = worst.min(gap(large / 2.0)? - gap(large)?);
    }
    Ok(worst)
}

/// Oracle suite; writes `oracle_report.csv`.
pub fn run_oracle_suite(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    config.validate()?;
    let o = &config.oracle;
    let seed = config.seed;
    let mut checks = vec![check_mi_closed_form(o.mi_instances, o.mi_samples, seed)];
    checks.extend(check_mi_unit_case(o.mi_samples, seed.wrapping_add(1)));

    let ratio = ball_setup(config, GeometryKind::Projective { gamma: config.gamma })
        .and_then(|(belief, _)| SampleCloud::sample(&belief, o.cloud_size, seed))
        .map_or(f64::NAN, |cloud| o.epsilon_factor * o.belief_sigma / cloud.min_marginal_std());
    checks.push(CheckResult::below("epsilon_precondition", ratio, crate::oracle::MAX_EPSILON_RATIO));

    checks.extend(check_ball_oracle(config, o.epsilon_factor));
    for &f in &o.epsilon_sweep {
        checks.extend(check_ball_oracle(config, f));
    }
    checks.push(match halving_statistic(config) {
        Ok(s) => CheckResult::at_least("epsilon_halving_gap_change", s, 0.0),
        Err(_) => CheckResult::errored("epsilon_halving_gap_change", 0.0),
    });
    checks.push(check_jacobian_ratio());
    checks.push(check_jacobian_ranking(o.ranking_sets, seed.wrapping_add(2)));

    let report = Report { checks };
    write_report(&config.output_dir, "oracle_report.csv", &config.snapshot(), &report)?;
    Ok(report)
}
