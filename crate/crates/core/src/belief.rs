//! Gaussian beliefs over the internal world model, conditioning on
//! observations, and the closed-form epistemic value.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

const SYMMETRY_TOL: f64 = 1e-10;
const MIN_EIGENVALUE: f64 = 1e-12;

/// A multivariate normal belief `N(mean, cov)` with SPD covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianBelief {
    mean: Point,
    cov: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: Point, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.nrows(),
            });
        }
        let asym = (&cov - cov.transpose()).amax();
        if !(asym < SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(asym));
        }
        let min_eigenvalue = cov.clone().symmetric_eigenvalues().min();
        if !(min_eigenvalue > MIN_EIGENVALUE) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Self { mean, cov })
    }

    /// `N(mean, sigma²·I)`
    pub fn isotropic(mean: Point, sigma: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d) * (sigma * sigma))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Point {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn cholesky(&self) -> Cholesky<f64, Dyn> {
        Cholesky::new(self.cov.clone()).expect("belief invariant: SPD covariance")
    }

    /// Marginal standard deviations.
    pub fn std_devs(&self) -> DVector<f64> {
        self.cov.diagonal().map(f64::sqrt)
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn ln_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    Cholesky::new(m.clone()).map(|c| 2.0 * c.l_dirty().diagonal().map(f64::ln).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    /// `Y | X ~ N(X, ε²·I)`
    GaussianIsotropic,
    /// `Y | X` uniform on the ε-ball around `X`.
    UniformBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    kind: SensorKind,
    epsilon: f64,
}

impl SensorModel {
    pub fn new(kind: SensorKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensor epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn gaussian(epsilon: f64) -> Result<Self> {
        Self::new(SensorKind::GaussianIsotropic, epsilon)
    }

    pub fn uniform_ball(epsilon: f64) -> Result<Self> {
        Self::new(SensorKind::UniformBall, epsilon)
    }

    pub fn kind(&self) -> SensorKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn noise_cov(&self, d: usize) -> DMatrix<f64> {
        DMatrix::identity(d, d) * (self.epsilon * self.epsilon)
    }

    fn require_gaussian(&self) -> Result<()> {
        match self.kind {
            SensorKind::GaussianIsotropic => Ok(()),
            SensorKind::UniformBall => Err(Error::InvalidParameter(
                "closed-form operations need a Gaussian sensor".into(),
            )),
        }
    }
}

/// Posterior belief after observing `obs` through the Gaussian sensor.
pub fn condition(belief: &GaussianBelief, sensor: &SensorModel, obs: &Point) -> Result<GaussianBelief> {
    sensor.require_gaussian()?;
    let d = belief.dim();
    if obs.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: obs.len(),
        });
    }
    let sigma = belief.cov();
    let s_yy = sigma + sensor.noise_cov(d);
    let chol = Cholesky::new(s_yy).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    // Σ Σ_YY⁻¹ = (Σ_YY⁻¹ Σ)ᵀ since both are symmetric
    let gain = chol.solve(sigma).transpose();
    let mean = belief.mean() + &gain * (obs - belief.mean());
    let cov = symmetrize(&(sigma - &gain * sigma));
    GaussianBelief::new(mean, cov)
}

/// Mutual information between the state and one Gaussian observation,
/// `½·ln det(I + Σ/ε²)`.
pub fn epistemic_value(belief: &GaussianBelief, sensor: &SensorModel) -> Result<f64> {
    sensor.require_gaussian()?;
    let d = belief.dim();
    let eps2 = sensor.epsilon * sensor.epsilon;
    let m = DMatrix::identity(d, d) + belief.cov() / eps2;
    let ln_det = ln_det_spd(&m).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    Ok(0.5 * ln_det)
}

/// Mean and block covariance of the joint `(X, Y)`.
pub fn joint_moments(belief: &GaussianBelief, sensor: &SensorModel) -> Result<(DVector<f64>, DMatrix<f64>)> {
    sensor.require_gaussian()?;
    let d = belief.dim();
    let mut mean = DVector::zeros(2 * d);
    mean.rows_mut(0, d).copy_from(belief.mean());
    mean.rows_mut(d, d).copy_from(belief.mean());
    let sigma = belief.cov();
    let mut cov = DMatrix::zeros(2 * d, 2 * d);
    cov.view_mut((0, 0), (d, d)).copy_from(sigma);
    cov.view_mut((0, d), (d, d)).copy_from(sigma);
    cov.view_mut((d, 0), (d, d)).copy_from(sigma);
    cov.view_mut((d, d), (d, d))
        .copy_from(&(sigma + sensor.noise_cov(d)));
    Ok((mean, cov))
}

/// The same mutual information through the three-determinant ratio
/// `½·ln(det Σ_XX · det Σ_YY / det Σ_(X,Y))`.
pub fn epistemic_value_det_ratio(belief: &GaussianBelief, sensor: &SensorModel) -> Result<f64> {
    let (_, joint) = joint_moments(belief, sensor)?;
    let d = belief.dim();
    let pd = || Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    };
    let ln_xx = ln_det_spd(belief.cov()).ok_or_else(pd)?;
    let ln_yy = ln_det_spd(&joint.view((d, d), (d, d)).into_owned()).ok_or_else(pd)?;
    let ln_joint = ln_det_spd(&joint).ok_or_else(pd)?;
    Ok(0.5 * (ln_xx + ln_yy - ln_joint))
}

/// `true` when `b ⪯ a + tol·I` in the Loewner order.
pub fn loewner_le(b: &DMatrix<f64>, a: &DMatrix<f64>, tol: f64) -> bool {
    let diff = symmetrize(&(a - b));
    diff.symmetric_eigenvalues().min() >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn condition_unit_example() {
        let b = GaussianBelief::isotropic(v(&[0.0, 0.0, 0.0]), 1.0).unwrap();
        let s = SensorModel::gaussian(1.0).unwrap();
        let post = condition(&b, &s, &v(&[2.0, 0.0, 0.0])).unwrap();
        assert!((post.mean() - v(&[1.0, 0.0, 0.0])).amax() < 1e-15);
        assert!((post.cov() - DMatrix::identity(3, 3) * 0.5).amax() < 1e-15);
    }

    #[test]
    fn zero_innovation_keeps_mean() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let b = GaussianBelief::new(v(&[1.0, -1.0]), cov.clone()).unwrap();
        let s = SensorModel::gaussian(0.4).unwrap();
        let post = condition(&b, &s, b.mean()).unwrap();
        assert_eq!(post.mean(), b.mean());
        let s_yy = &cov + DMatrix::identity(2, 2) * 0.16;
        let expected = &cov - &cov * s_yy.try_inverse().unwrap() * &cov;
        assert!((post.cov() - expected).amax() < 1e-12);
    }

    #[test]
    fn uninformative_sensor_leaves_prior() {
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 2.0, -0.3, 0.1, -0.3, 0.7]);
        let b = GaussianBelief::new(v(&[0.1, 0.2, 0.3]), cov).unwrap();
        let s = SensorModel::gaussian(1e6).unwrap();
        let post = condition(&b, &s, &v(&[5.0, 5.0, 5.0])).unwrap();
        let rel = (post.cov() - b.cov()).amax() / b.cov().amax();
        assert!(rel < 1e-5);
        assert!((post.mean() - b.mean()).amax() < 1e-5);
    }

    #[test]
    fn epistemic_value_unit_example() {
        let b = GaussianBelief::isotropic(v(&[0.0, 0.0, 0.0]), 1.0).unwrap();
        let s = SensorModel::gaussian(1.0).unwrap();
        let c = epistemic_value(&b, &s).unwrap();
        assert!((c - 0.5 * 8f64.ln()).abs() < 1e-12);
        let c2 = epistemic_value_det_ratio(&b, &s).unwrap();
        assert!((c2 - 0.5 * 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn epistemic_value_vanishes_with_certainty() {
        let s = SensorModel::gaussian(1.0).unwrap();
        let tiny = GaussianBelief::isotropic(v(&[0.0, 0.0]), 1e-5).unwrap();
        let c = epistemic_value(&tiny, &s).unwrap();
        assert!((0.0..1e-9).contains(&c));
    }

    #[test]
    fn joint_block_layout() {
        let b = GaussianBelief::isotropic(v(&[1.0, 2.0, 3.0]), 1.0).unwrap();
        let s = SensorModel::gaussian(1.0).unwrap();
        let (mean, cov) = joint_moments(&b, &s).unwrap();
        assert_eq!(mean, v(&[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]));
        let i = DMatrix::<f64>::identity(3, 3);
        assert_eq!(cov.view((0, 0), (3, 3)), i);
        assert_eq!(cov.view((0, 3), (3, 3)), i);
        assert_eq!(cov.view((3, 0), (3, 3)), i);
        assert_eq!(cov.view((3, 3), (3, 3)), i * 2.0);
        assert!(cov.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn invalid_beliefs_rejected() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            GaussianBelief::new(v(&[0.0, 0.0]), asym),
            Err(Error::NotSymmetric(_))
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianBelief::new(v(&[0.0, 0.0]), indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(SensorModel::gaussian(0.0).is_err());
        let b = GaussianBelief::isotropic(v(&[0.0, 0.0]), 1.0).unwrap();
        let ball = SensorModel::uniform_ball(0.1).unwrap();
        assert!(epistemic_value(&b, &ball).is_err());
    }
}
