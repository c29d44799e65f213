//! Geometry-free checks of the epistemic value.
//!
//! Two independent routes to the numbers the agent relies on:
//!
//! * a Monte-Carlo estimate of the Gaussian mutual information straight from
//!   the joint, marginal and prior densities;
//! * the uniform-ball sensor, whose epistemic value after a transport `ψ` is
//!   `−(1/|B_ε|)·∫ q(y)·ln q(y) dy` with `q(y)` the prior mass of
//!   `ψ⁻¹(B_y^ε)`. Here `q` is estimated by counting mapped samples inside
//!   each ball on a regular node grid.
//!
//! Ball counting is exact. Each sample visits only the nodes within `ε` of
//! it, so the cost is `O(N·(2ε/h + 1)^d)` for node spacing `h`, which is
//! `O(81·N)` in the plane at the default spacing `h = ε/4`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::belief::{joint_moments, GaussianBelief, SensorModel};
use crate::error::{Error, Result};
use crate::geometry::{face_object_frame, rho, transition_map, Frame, GeometryKind, Point, Transform};

pub const MIN_CLOUD_SIZE: usize = 10_000;
pub const MIN_MI_SAMPLES: usize = 100_000;
/// Largest admissible `ε / (min marginal std)`.
pub const MAX_EPSILON_RATIO: f64 = 0.5;
const MAX_UNCOVERED: f64 = 0.01;
/// Node spacing used by [`replicated_ball_values`] is `ε / NODES_PER_EPSILON`.
pub const NODES_PER_EPSILON: f64 = 4.0;

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|a − b| / sqrt(se_a² + se_b²)`
    pub fn z_score(&self, other: &Estimate) -> f64 {
        (self.value - other.value).abs() / self.std_error.hypot(other.std_error)
    }

    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            value: mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// Equally weighted draws standing in for a belief.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    points: Vec<Point>,
    seed: u64,
}

impl SampleCloud {
    pub fn sample(belief: &GaussianBelief, n: usize, seed: u64) -> Result<Self> {
        if n < MIN_CLOUD_SIZE {
            return Err(Error::InvalidParameter(format!(
                "sample cloud needs at least {MIN_CLOUD_SIZE} points, got {n}"
            )));
        }
        let l = belief.cholesky().l();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = belief.dim();
        let points = (0..n)
            .map(|_| {
                let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
                belief.mean() + &l * z
            })
            .collect();
        Ok(Self { points, seed })
    }

    pub fn from_points(points: Vec<Point>, seed: u64) -> Result<Self> {
        if points.len() < MIN_CLOUD_SIZE {
            return Err(Error::InvalidParameter(format!(
                "sample cloud needs at least {MIN_CLOUD_SIZE} points, got {}",
                points.len()
            )));
        }
        Ok(Self { points, seed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn map(&self, t: &Transform) -> Result<Vec<Point>> {
        self.points.iter().map(|p| t.apply(p)).collect()
    }

    pub fn min_marginal_std(&self) -> f64 {
        marginal_stats(&self.points)
            .iter()
            .map(|(_, sd)| *sd)
            .fold(f64::INFINITY, f64::min)
    }
}

fn marginal_stats(points: &[Point]) -> Vec<(f64, f64)> {
    let d = points[0].len();
    let n = points.len() as f64;
    (0..d)
        .map(|i| {
            let mean = points.iter().map(|p| p[i]).sum::<f64>() / n;
            let var = points.iter().map(|p| (p[i] - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .collect()
}

/// `Err(EpsilonTooLarge)` unless `ε < 0.5·(min marginal std of the cloud)`.
pub fn check_epsilon(cloud: &SampleCloud, epsilon: f64) -> Result<()> {
    let min_std = cloud.min_marginal_std();
    if epsilon < MAX_EPSILON_RATIO * min_std {
        Ok(())
    } else {
        Err(Error::EpsilonTooLarge { epsilon, min_std })
    }
}

/// Regular grid of quadrature nodes with equal spacing on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    origin: Vec<f64>,
    spacing: f64,
    counts: Vec<usize>,
}

impl NodeGrid {
    pub fn new(origin: Vec<f64>, spacing: f64, counts: Vec<usize>) -> Result<Self> {
        if origin.len() != counts.len() || !(spacing > 0.0) || counts.contains(&0) {
            return Err(Error::InvalidParameter("malformed node grid".into()));
        }
        Ok(Self {
            origin,
            spacing,
            counts,
        })
    }

    /// Nodes `spacing` apart over the mean ± `half_width_sigmas`·std box of `points`.
    pub fn covering(points: &[Point], spacing: f64, half_width_sigmas: f64) -> Result<Self> {
        let stats = marginal_stats(points);
        let origin = stats
            .iter()
            .map(|(m, sd)| m - half_width_sigmas * sd)
            .collect();
        let counts = stats
            .iter()
            .map(|(_, sd)| (2.0 * half_width_sigmas * sd / spacing).ceil() as usize + 1)
            .collect();
        Self::new(origin, spacing, counts)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    fn node_coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + self.spacing * index as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |flat| {
            let mut rem = flat;
            Point::from_fn(self.dim(), |axis, _| {
                let i = rem % self.counts[axis];
                rem /= self.counts[axis];
                self.node_coord(axis, i)
            })
        })
    }

    fn in_hull(&self, p: &Point) -> bool {
        (0..self.dim()).all(|a| {
            let lo = self.origin[a];
            let hi = self.node_coord(a, self.counts[a] - 1);
            p[a] >= lo && p[a] <= hi
        })
    }

    /// For every node, the number of `points` within `radius` of it.
    fn ball_counts(&self, points: &[Point], radius: f64) -> Vec<u32> {
        let d = self.dim();
        let r2 = radius * radius;
        let mut counts = vec![0u32; self.len()];
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        'points: for p in points {
            for a in 0..d {
                let first = ((p[a] - radius - self.origin[a]) / self.spacing).ceil();
                let last = ((p[a] + radius - self.origin[a]) / self.spacing).floor();
                let top = (self.counts[a] - 1) as f64;
                if last < 0.0 || first > top {
                    continue 'points;
                }
                lo[a] = first.max(0.0) as usize;
                hi[a] = last.min(top) as usize;
            }
            let mut idx = lo;
            loop {
                let mut dist2 = 0.0;
                let mut flat = 0;
                let mut stride = 1;
                for a in 0..d {
                    let delta = self.node_coord(a, idx[a]) - p[a];
                    dist2 += delta * delta;
                    flat += idx[a] * stride;
                    stride *= self.counts[a];
                }
                if dist2 <= r2 {
                    counts[flat] += 1;
                }
                // odometer over the index box
                let mut a = 0;
                loop {
                    if a == d {
                        continue 'points;
                    }
                    if idx[a] < hi[a] {
                        idx[a] += 1;
                        break;
                    }
                    idx[a] = lo[a];
                    a += 1;
                }
            }
        }
        counts
    }
}

/// Volume of the radius-`epsilon` ball in dimension `d`.
pub fn ball_volume(d: usize, epsilon: f64) -> f64 {
    match d {
        2 => PI * epsilon * epsilon,
        3 => 4.0 / 3.0 * PI * epsilon.powi(3),
        _ => {
            // Γ-function form for completeness
            let half = d as f64 / 2.0;
            PI.powf(half) * epsilon.powi(d as i32) / statrs::function::gamma::gamma(half + 1.0)
        }
    }
}

/// Epistemic value of `map_*Q` under the uniform-ball sensor of radius
/// `epsilon`, estimated on the nodes of `grid`.
pub fn ball_epistemic_value(
    cloud: &SampleCloud,
    map: &Transform,
    epsilon: f64,
    grid: &NodeGrid,
) -> Result<f64> {
    let mapped = cloud.map(map)?;
    ball_value_of_points(&mapped, epsilon, grid)
}

fn ball_value_of_points(mapped: &[Point], epsilon: f64, grid: &NodeGrid) -> Result<f64> {
    let n = mapped.len() as f64;
    let outside = mapped.iter().filter(|p| !grid.in_hull(p)).count() as f64 / n;
    if outside > MAX_UNCOVERED {
        return Err(Error::InsufficientCoverage { fraction: outside });
    }
    let counts = grid.ball_counts(mapped, epsilon);
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum();
    Ok(entropy * grid.cell_volume() / ball_volume(grid.dim(), epsilon))
}

/// Ball epistemic values of several transports of `belief`, averaged over
/// `replicates` independent clouds; every map sees the same cloud within a
/// replicate.
pub fn replicated_ball_values(
    belief: &GaussianBelief,
    maps: &[Transform],
    epsilon: f64,
    cloud_size: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates".into()));
    }
    let mut values = vec![Vec::with_capacity(replicates); maps.len()];
    for r in 0..replicates {
        let cloud = SampleCloud::sample(belief, cloud_size, seed.wrapping_add(r as u64))?;
        for (map, out) in maps.iter().zip(values.iter_mut()) {
            let mapped = cloud.map(map)?;
            let grid = NodeGrid::covering(&mapped, epsilon / NODES_PER_EPSILON, 5.0)?;
            out.push(ball_value_of_points(&mapped, epsilon, &grid)?);
        }
    }
    Ok(values.iter().map(|v| Estimate::from_samples(v)).collect())
}

/// Monte-Carlo mutual information of the Gaussian sensor, sampled from the
/// joint `(X, Y)`.
pub fn mc_mutual_information(
    belief: &GaussianBelief,
    sensor: &SensorModel,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    let (mean, cov) = joint_moments(belief, sensor)?;
    mc_mutual_information_joint(&mean, &cov, belief.dim(), n, seed)
}

struct LogDensity {
    chol: Cholesky<f64, nalgebra::Dyn>,
    norm: f64,
}

impl LogDensity {
    fn new(cov: DMatrix<f64>) -> Result<Self> {
        let k = cov.nrows() as f64;
        let chol = Cholesky::new(cov).ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
        })?;
        let ln_det = 2.0 * chol.l_dirty().diagonal().map(f64::ln).sum();
        Ok(Self {
            chol,
            norm: -0.5 * (k * (2.0 * PI).ln() + ln_det),
        })
    }

    fn eval(&self, centered: &DVector<f64>) -> f64 {
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(centered)
            .expect("nonsingular Cholesky factor");
        self.norm - 0.5 * w.norm_squared()
    }
}

/// Mutual information between the first `dim_x` and remaining coordinates
/// of an arbitrary joint Gaussian.
pub fn mc_mutual_information_joint(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    dim_x: usize,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    if n < MIN_MI_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "mutual information estimate needs at least {MIN_MI_SAMPLES} samples, got {n}"
        )));
    }
    let k = mean.len();
    let dim_y = k - dim_x;
    let joint = LogDensity::new(cov.clone())?;
    let px = LogDensity::new(cov.view((0, 0), (dim_x, dim_x)).into_owned())?;
    let py = LogDensity::new(cov.view((dim_x, dim_x), (dim_y, dim_y)).into_owned())?;
    let l = joint.chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<f64> = (0..n)
        .map(|_| {
            let z = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            let c = &l * z;
            let cx = c.rows(0, dim_x).into_owned();
            let cy = c.rows(dim_x, dim_y).into_owned();
            joint.eval(&c) - px.eval(&cx) - py.eval(&cy)
        })
        .collect();
    Ok(Estimate::from_samples(&terms))
}

/// Jacobian magnitude of the transition from `frames[0]` to each frame, at
/// the object's internal coordinate seen from `frames[0]`.
pub fn jacobian_preference_check(
    frames: &[Frame],
    object: &Point,
    gamma: f64,
) -> Result<Vec<(Frame, f64)>> {
    let Some(reference) = frames.first() else {
        return Ok(Vec::new());
    };
    let kind = GeometryKind::projective(gamma)?;
    for f in frames {
        let local = f.frame_map().apply(object);
        let d = local.len();
        let lateral = local.rows(0, d - 1).amax();
        if lateral > 1e-9 || local[d - 1] <= 0.0 {
            return Err(Error::InvalidFrame("frame does not face the object".into()));
        }
    }
    let y_obj = rho(&reference.frame_map().apply(object), gamma)?;
    frames
        .iter()
        .map(|f| {
            let psi = transition_map(reference, f, kind);
            Ok((f.clone(), psi.jacobian_det(&y_obj)?.abs()))
        })
        .collect()
}

/// Frames facing `object` from each of `positions`.
pub fn facing_frames(positions: &[Point], object: &Point) -> Result<Vec<Frame>> {
    positions.iter().map(|p| face_object_frame(p, object)).collect()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    cov / (va * vb).sqrt()
}
