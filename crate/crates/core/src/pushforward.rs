//! Transport of a Gaussian belief through a group action.
//!
//! Affine maps push a Gaussian forward exactly. Projective maps do not
//! preserve Gaussianity; the pushed measure is replaced by the Gaussian with
//! the same mean and covariance. Those moments are integrated over the
//! *domain*: points are drawn (or laid on a grid) under the prior and mapped
//! forward, which is the change-of-variables integral over the codomain after
//! substitution and never needs the Jacobian.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::belief::{symmetrize, GaussianBelief};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, HomTransform, Transform};

/// Normalized denominator below which a draw counts as hitting the horizon.
const REJECT_TOL: f64 = 1e-9;
/// Band around the horizon used by the singular-mass precondition.
const SINGULAR_BAND: f64 = 1e-3;
const MAX_SINGULAR_MASS: f64 = 1e-6;
const MAX_REJECTION_RATE: f64 = 1e-3;
const COV_REGULARIZATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationScheme {
    MonteCarlo,
    GridQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    pub scheme: IntegrationScheme,
    pub sample_count: usize,
    pub nodes_per_axis: usize,
    pub half_width_sigmas: f64,
    pub seed: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            scheme: IntegrationScheme::MonteCarlo,
            sample_count: 20_000,
            nodes_per_axis: 41,
            half_width_sigmas: 5.0,
            seed: 0,
        }
    }
}

impl IntegrationConfig {
    pub fn monte_carlo(sample_count: usize, seed: u64) -> Self {
        Self {
            scheme: IntegrationScheme::MonteCarlo,
            sample_count,
            seed,
            ..Self::default()
        }
    }

    pub fn grid(nodes_per_axis: usize, half_width_sigmas: f64) -> Self {
        Self {
            scheme: IntegrationScheme::GridQuadrature,
            nodes_per_axis,
            half_width_sigmas,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            IntegrationScheme::MonteCarlo if self.sample_count < 1_000 => Err(
                Error::InvalidParameter(format!(
                    "sample_count must be at least 1000, got {}",
                    self.sample_count
                )),
            ),
            IntegrationScheme::GridQuadrature
                if self.nodes_per_axis < 9
                    || !(self.half_width_sigmas > 0.0 && self.half_width_sigmas.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "grid quadrature needs nodes_per_axis >= 9 and a positive half width, got {} / {}",
                    self.nodes_per_axis, self.half_width_sigmas
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Bookkeeping of a projective pushforward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PushforwardStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Exact pushforward `N(Aμ + b, AΣAᵀ)`.
pub fn pushforward_affine(belief: &GaussianBelief, map: &AffineMap) -> Result<GaussianBelief> {
    let a = map.linear();
    let mean = map.apply(belief.mean());
    let cov = symmetrize(&(a * belief.cov() * a.transpose()));
    GaussianBelief::new(mean, cov)
}

/// Dispatch on the transform family.
pub fn pushforward(
    belief: &GaussianBelief,
    map: &Transform,
    cfg: &IntegrationConfig,
) -> Result<GaussianBelief> {
    match map {
        Transform::Affine(a) => pushforward_affine(belief, a),
        Transform::Projective(h) => pushforward_projective(belief, h, cfg),
    }
}

/// Denominator of `map` rescaled to equal 1 at the belief mean.
fn normalized_denominator(belief: &GaussianBelief, map: &HomTransform) -> Result<(DVector<f64>, f64)> {
    let (c, e) = map.denominator();
    let at_mean = c.dot(belief.mean()) + e;
    if !(at_mean.abs() > REJECT_TOL) {
        return Err(Error::SingularMass { probability: 1.0 });
    }
    Ok((c / at_mean, e / at_mean))
}

/// Probability under `belief` that the normalized denominator of `map`
/// falls below the singular band (including the far side of the horizon).
pub fn singular_mass(belief: &GaussianBelief, map: &HomTransform) -> Result<f64> {
    let (c, _) = normalized_denominator(belief, map)?;
    let sd = (c.transpose() * belief.cov() * &c)[0].sqrt();
    if sd == 0.0 {
        return Ok(0.0);
    }
    // w̃ ~ N(1, sd²)
    let normal = Normal::new(1.0, sd).expect("positive standard deviation");
    Ok(normal.cdf(SINGULAR_BAND))
}

/// Moment-matched pushforward through a projective map.
pub fn pushforward_projective(
    belief: &GaussianBelief,
    map: &HomTransform,
    cfg: &IntegrationConfig,
) -> Result<GaussianBelief> {
    pushforward_projective_with_stats(belief, map, cfg).map(|(b, _)| b)
}

pub fn pushforward_projective_with_stats(
    belief: &GaussianBelief,
    map: &HomTransform,
    cfg: &IntegrationConfig,
) -> Result<(GaussianBelief, PushforwardStats)> {
    cfg.validate()?;
    let d = belief.dim();
    if map.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: map.dim(),
        });
    }
    let probability = singular_mass(belief, map)?;
    if probability >= MAX_SINGULAR_MASS {
        return Err(Error::SingularMass { probability });
    }
    let mapper = Mapper::new(belief, map)?;
    let (acc, stats) = match cfg.scheme {
        IntegrationScheme::MonteCarlo => mapper.monte_carlo(cfg.sample_count, cfg.seed)?,
        IntegrationScheme::GridQuadrature => {
            mapper.grid(cfg.nodes_per_axis, cfg.half_width_sigmas)?
        }
    };
    let (mean, cov) = acc.finish(cfg.scheme == IntegrationScheme::MonteCarlo);
    let cov = symmetrize(&cov) + DMatrix::identity(d, d) * COV_REGULARIZATION;
    let belief = GaussianBelief::new(mean, cov).map_err(|_| Error::DegenerateCovariance)?;
    Ok((belief, stats))
}

/// Maps standard-normal coordinates through `μ + Lz` and then the homography.
struct Mapper {
    d: usize,
    mean: [f64; 3],
    chol: [[f64; 3]; 3],
    h: [[f64; 4]; 4],
    w_coef: [f64; 3],
    w_const: f64,
    shift: [f64; 3],
}

impl Mapper {
    fn new(belief: &GaussianBelief, map: &HomTransform) -> Result<Self> {
        let d = belief.dim();
        let l = belief.cholesky().l();
        let m = map.matrix();
        let (wc, we) = normalized_denominator(belief, map)?;
        let mut out = Self {
            d,
            mean: [0.0; 3],
            chol: [[0.0; 3]; 3],
            h: [[0.0; 4]; 4],
            w_coef: [0.0; 3],
            w_const: we,
            shift: [0.0; 3],
        };
        for i in 0..d {
            out.mean[i] = belief.mean()[i];
            out.w_coef[i] = wc[i];
            for j in 0..d {
                out.chol[i][j] = l[(i, j)];
            }
        }
        for i in 0..=d {
            for j in 0..=d {
                out.h[i][j] = m[(i, j)];
            }
        }
        let image = map.apply(belief.mean())?;
        out.shift[..d].copy_from_slice(image.as_slice());
        Ok(out)
    }

    /// Image of `μ + Lz`, or `None` when the point is at or past the horizon.
    fn map(&self, z: &[f64; 3]) -> Option<[f64; 3]> {
        let d = self.d;
        let mut x = [0.0; 3];
        for i in 0..d {
            let mut acc = self.mean[i];
            for j in 0..=i {
                acc += self.chol[i][j] * z[j];
            }
            x[i] = acc;
        }
        let mut w_norm = self.w_const;
        for i in 0..d {
            w_norm += self.w_coef[i] * x[i];
        }
        if !(w_norm > REJECT_TOL) {
            return None;
        }
        let mut w = self.h[d][d];
        for j in 0..d {
            w += self.h[d][j] * x[j];
        }
        let mut y = [0.0; 3];
        for i in 0..d {
            let mut acc = self.h[i][d];
            for j in 0..d {
                acc += self.h[i][j] * x[j];
            }
            y[i] = acc / w;
        }
        Some(y)
    }

    fn monte_carlo(&self, n: usize, seed: u64) -> Result<(Moments, PushforwardStats)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = Moments::new(self.d, self.shift);
        let mut stats = PushforwardStats::default();
        while stats.accepted < n {
            let mut z = [0.0; 3];
            for zi in z.iter_mut().take(self.d) {
                *zi = StandardNormal.sample(&mut rng);
            }
            match self.map(&z) {
                Some(y) => {
                    acc.add(&y, 1.0);
                    stats.accepted += 1;
                }
                None => {
                    stats.rejected += 1;
                    if stats.rejected > n {
                        break;
                    }
                }
            }
        }
        let drawn = stats.accepted + stats.rejected;
        if stats.rejected as f64 > MAX_REJECTION_RATE * drawn as f64 {
            return Err(Error::SingularMass {
                probability: stats.rejected as f64 / drawn as f64,
            });
        }
        Ok((acc, stats))
    }

    fn grid(&self, nodes: usize, half_width: f64) -> Result<(Moments, PushforwardStats)> {
        let d = self.d;
        let step = 2.0 * half_width / (nodes - 1) as f64;
        let axis: Vec<(f64, f64)> = (0..nodes)
            .map(|i| {
                let z = -half_width + step * i as f64;
                (z, (-0.5 * z * z).exp())
            })
            .collect();
        let mut acc = Moments::new(d, self.shift);
        let mut stats = PushforwardStats::default();
        let mut rejected_weight = 0.0;
        let total = nodes.pow(d as u32);
        for flat in 0..total {
            let mut z = [0.0; 3];
            let mut weight = 1.0;
            let mut rem = flat;
            for zi in z.iter_mut().take(d) {
                let (node, w) = axis[rem % nodes];
                rem /= nodes;
                *zi = node;
                weight *= w;
            }
            match self.map(&z) {
                Some(y) => {
                    acc.add(&y, weight);
                    stats.accepted += 1;
                }
                None => {
                    stats.rejected += 1;
                    rejected_weight += weight;
                }
            }
        }
        let mass = acc.weight + rejected_weight;
        if rejected_weight > MAX_REJECTION_RATE * mass {
            return Err(Error::SingularMass {
                probability: rejected_weight / mass,
            });
        }
        Ok((acc, stats))
    }
}

/// Weighted first and second moments accumulated about a fixed shift.
struct Moments {
    d: usize,
    shift: [f64; 3],
    weight: f64,
    weight_sq: f64,
    sum: [f64; 3],
    outer: [[f64; 3]; 3],
}

impl Moments {
    fn new(d: usize, shift: [f64; 3]) -> Self {
        Self {
            d,
            shift,
            weight: 0.0,
            weight_sq: 0.0,
            sum: [0.0; 3],
            outer: [[0.0; 3]; 3],
        }
    }

    fn add(&mut self, y: &[f64; 3], w: f64) {
        self.weight += w;
        self.weight_sq += w * w;
        let mut c = [0.0; 3];
        for i in 0..self.d {
            c[i] = y[i] - self.shift[i];
            self.sum[i] += w * c[i];
        }
        for i in 0..self.d {
            for j in 0..=i {
                self.outer[i][j] += w * c[i] * c[j];
            }
        }
    }

    /// Mean and covariance; `unbiased` applies the reliability-weights correction.
    fn finish(&self, unbiased: bool) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.d;
        let mut centered = [0.0; 3];
        for i in 0..d {
            centered[i] = self.sum[i] / self.weight;
        }
        let mean = DVector::from_fn(d, |i, _| centered[i] + self.shift[i]);
        let denom = if unbiased {
            self.weight - self.weight_sq / self.weight
        } else {
            self.weight
        };
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let v = (self.outer[i][j] - self.weight * centered[i] * centered[j]) / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        (mean, cov)
    }
}
