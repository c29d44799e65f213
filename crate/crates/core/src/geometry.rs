//! Ambient-world frames and the transformations acting on the agent's
//! internal world model.
//!
//! Points are column vectors of dimension 2 or 3 whose *last* coordinate is
//! the depth along the agent's viewing axis. The Euclidean internal model is
//! acted on by rigid [`AffineMap`]s; the projective one by homogeneous
//! [`HomTransform`]s, built from the contraction [`rho`] composed with the
//! agent's change of frame.

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = DVector<f64>;

/// Distance to the projective horizon below which a point is rejected.
pub const SINGULAR_TOL: f64 = 1e-9;

const ORTHONORMAL_TOL: f64 = 1e-10;
const MIN_ABS_DET: f64 = 1e-12;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn check_len(p: &Point, dim: usize) -> Result<()> {
    if p.len() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        })
    }
}

/// A rigid, right-handed reference frame in the ambient world.
///
/// The columns of `basis` are the frame axes expressed in world coordinates;
/// the last column is the depth (viewing) axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    origin: Point,
    basis: DMatrix<f64>,
}

impl Frame {
    pub fn new(origin: Point, basis: DMatrix<f64>) -> Result<Self> {
        let dim = origin.len();
        check_dim(dim)?;
        if basis.nrows() != dim || basis.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: basis.nrows(),
            });
        }
        let gram = basis.transpose() * &basis - DMatrix::identity(dim, dim);
        let err = gram.amax();
        if !(err < ORTHONORMAL_TOL) {
            return Err(Error::InvalidFrame(format!(
                "basis is not orthonormal (deviation {err:e})"
            )));
        }
        if basis.determinant() <= 0.0 {
            return Err(Error::InvalidFrame("basis is left-handed".into()));
        }
        Ok(Self { origin, basis })
    }

    /// The world frame itself.
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            origin: Point::zeros(dim),
            basis: DMatrix::identity(dim, dim),
        })
    }

    /// Planar frame whose axes are the canonical axes rotated by `angle`.
    pub fn planar(origin: [f64; 2], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            origin: Point::from_column_slice(&origin),
            basis: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    /// Spatial frame rotated by the axis-angle vector `axis_angle`.
    pub fn spatial(origin: [f64; 3], axis_angle: [f64; 3]) -> Self {
        let rot = Rotation3::new(Vector3::from(axis_angle));
        let m = rot.matrix();
        Self {
            origin: Point::from_column_slice(&origin),
            basis: DMatrix::from_fn(3, 3, |i, j| m[(i, j)]),
        }
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn depth_axis(&self) -> Point {
        self.basis.column(self.dim() - 1).into_owned()
    }

    /// World coordinates → coordinates in this frame.
    pub fn frame_map(&self) -> AffineMap {
        frame_map(self)
    }
}

/// The coordinate change from the world frame into `frame`.
pub fn frame_map(frame: &Frame) -> AffineMap {
    let linear = frame.basis.transpose();
    let offset = -(&linear * &frame.origin);
    AffineMap { linear, offset }
}

/// An invertible affine map `x ↦ linear·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    offset: Point,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, offset: Point) -> Result<Self> {
        let dim = offset.len();
        if linear.nrows() != dim || linear.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: linear.nrows(),
            });
        }
        let det = linear.determinant();
        if !(det.abs() > MIN_ABS_DET) {
            return Err(Error::SingularTransform(det));
        }
        Ok(Self { linear, offset })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            linear: DMatrix::identity(dim, dim),
            offset: Point::zeros(dim),
        }
    }

    pub fn translation(offset: Point) -> Self {
        let dim = offset.len();
        Self {
            linear: DMatrix::identity(dim, dim),
            offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    pub fn apply(&self, p: &Point) -> Point {
        &self.linear * p + &self.offset
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &inner.linear,
            offset: &self.linear * &inner.offset + &self.offset,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        // invertibility is a constructor invariant
        let inv = self
            .linear
            .clone()
            .try_inverse()
            .expect("affine map invariant: invertible linear part");
        let offset = -(&inv * &self.offset);
        AffineMap {
            linear: inv,
            offset,
        }
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    pub fn to_homogeneous(&self) -> HomTransform {
        let d = self.dim();
        let mut m = DMatrix::identity(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(&self.linear);
        m.view_mut((0, d), (d, 1)).copy_from(&self.offset);
        HomTransform::from_matrix_unchecked(m)
    }
}

/// A projective transformation stored as a homogeneous matrix, kept in
/// canonical form: the entry of largest magnitude is exactly `+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomTransform {
    matrix: DMatrix<f64>,
}

fn canonicalize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let mut pivot = 0.0_f64;
    for &v in m.iter() {
        if v.abs() > pivot.abs() {
            pivot = v;
        }
    }
    if pivot != 0.0 {
        m /= pivot;
    }
    m
}

impl HomTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        check_dim(n.saturating_sub(1))?;
        let matrix = canonicalize(matrix);
        let det = matrix.determinant();
        if !(det.abs() > MIN_ABS_DET) {
            return Err(Error::SingularTransform(det));
        }
        Ok(Self { matrix })
    }

    fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix: canonicalize(matrix),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim + 1, dim + 1),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    /// Coefficients `(c, e)` of the homogeneous denominator `w(p) = c·p + e`.
    pub fn denominator(&self) -> (Point, f64) {
        let d = self.dim();
        let c = Point::from_fn(d, |i, _| self.matrix[(d, i)]);
        (c, self.matrix[(d, d)])
    }

    fn homogeneous_image(&self, p: &Point) -> (Point, f64) {
        let d = self.dim();
        let a = self.matrix.view((0, 0), (d, d));
        let t = self.matrix.view((0, d), (d, 1));
        let top = a * p + t;
        let w = self.matrix.view((d, 0), (1, d)).dot(&p.transpose()) + self.matrix[(d, d)];
        (top, w)
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        check_len(p, self.dim())?;
        let (top, w) = self.homogeneous_image(p);
        if !(w.abs() > SINGULAR_TOL) {
            return Err(Error::SingularPlane { denominator: w });
        }
        Ok(top / w)
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &HomTransform) -> HomTransform {
        Self::from_matrix_unchecked(&self.matrix * &inner.matrix)
    }

    pub fn inverse(&self) -> HomTransform {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .expect("homogeneous transform invariant: invertible matrix");
        Self::from_matrix_unchecked(inv)
    }

    /// Differential of the dehomogenized map at `p`.
    pub fn jacobian(&self, p: &Point) -> Result<DMatrix<f64>> {
        check_len(p, self.dim())?;
        let d = self.dim();
        let (top, w) = self.homogeneous_image(p);
        if !(w.abs() > SINGULAR_TOL) {
            return Err(Error::SingularPlane { denominator: w });
        }
        let f = top / w;
        let a = self.matrix.view((0, 0), (d, d));
        let c = self.matrix.view((d, 0), (1, d));
        Ok((a - f * c) / w)
    }

    /// `det(H) / w(p)^(d+1)`, the Jacobian determinant of the dehomogenized map.
    pub fn jacobian_det(&self, p: &Point) -> Result<f64> {
        check_len(p, self.dim())?;
        let (_, w) = self.homogeneous_image(p);
        if !(w.abs() > SINGULAR_TOL) {
            return Err(Error::SingularPlane { denominator: w });
        }
        Ok(self.matrix.determinant() / w.powi(self.dim() as i32 + 1))
    }

    /// Equality as projective elements: canonical matrices agree up to sign.
    pub fn approx_eq(&self, other: &HomTransform, tol: f64) -> bool {
        if self.matrix.shape() != other.matrix.shape() {
            return false;
        }
        let plus = (&self.matrix - &other.matrix).amax();
        let minus = (&self.matrix + &other.matrix).amax();
        plus.min(minus) < tol
    }
}

/// Which group structures the internal world model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometryKind {
    Euclidean,
    Projective { gamma: f64 },
}

impl GeometryKind {
    pub fn projective(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Self::Projective { gamma })
        } else {
            Err(Error::InvalidParameter(format!(
                "gamma must be strictly positive, got {gamma}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Euclidean => "euclidean",
            Self::Projective { .. } => "projective",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Self::Euclidean => None,
            Self::Projective { gamma } => Some(gamma),
        }
    }
}

/// An element of the group acting on the internal world model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Transform {
    Affine(AffineMap),
    Projective(HomTransform),
}

impl Transform {
    pub fn dim(&self) -> usize {
        match self {
            Self::Affine(a) => a.dim(),
            Self::Projective(h) => h.dim(),
        }
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        match self {
            Self::Affine(a) => {
                check_len(p, a.dim())?;
                Ok(a.apply(p))
            }
            Self::Projective(h) => h.apply(p),
        }
    }

    pub fn inverse(&self) -> Transform {
        match self {
            Self::Affine(a) => Self::Affine(a.inverse()),
            Self::Projective(h) => Self::Projective(h.inverse()),
        }
    }

    /// `self ∘ inner`. Mixed kinds compose in homogeneous form.
    pub fn compose(&self, inner: &Transform) -> Transform {
        match (self, inner) {
            (Self::Affine(a), Self::Affine(b)) => Self::Affine(a.compose(b)),
            _ => Self::Projective(self.to_homogeneous().compose(&inner.to_homogeneous())),
        }
    }

    pub fn to_homogeneous(&self) -> HomTransform {
        match self {
            Self::Affine(a) => a.to_homogeneous(),
            Self::Projective(h) => h.clone(),
        }
    }

    pub fn jacobian(&self, p: &Point) -> Result<DMatrix<f64>> {
        match self {
            Self::Affine(a) => {
                check_len(p, a.dim())?;
                Ok(a.linear.clone())
            }
            Self::Projective(h) => h.jacobian(p),
        }
    }

    pub fn jacobian_det(&self, p: &Point) -> Result<f64> {
        match self {
            Self::Affine(a) => {
                check_len(p, a.dim())?;
                Ok(a.det())
            }
            Self::Projective(h) => h.jacobian_det(p),
        }
    }
}

pub fn apply(t: &Transform, p: &Point) -> Result<Point> {
    t.apply(p)
}

pub fn jacobian_det(t: &Transform, p: &Point) -> Result<f64> {
    t.jacobian_det(p)
}

fn depth_denominator(p: &Point, gamma: f64) -> f64 {
    gamma * p[p.len() - 1] + 1.0
}

/// The projective contraction `p ↦ p / (γ·z + 1)`, `z` the depth coordinate.
pub fn rho(p: &Point, gamma: f64) -> Result<Point> {
    let w = depth_denominator(p, gamma);
    if !(w.abs() > SINGULAR_TOL) {
        return Err(Error::SingularPlane { denominator: w });
    }
    Ok(p / w)
}

/// Inverse of [`rho`]: `p ↦ p / (1 − γ·z)`.
pub fn rho_inverse(p: &Point, gamma: f64) -> Result<Point> {
    let w = 1.0 - gamma * p[p.len() - 1];
    if !(w.abs() > SINGULAR_TOL) {
        return Err(Error::SingularPlane { denominator: w });
    }
    Ok(p / w)
}

/// Homogeneous matrix of [`rho`] in dimension `dim`.
pub fn rho_transform(dim: usize, gamma: f64) -> HomTransform {
    let mut m = DMatrix::identity(dim + 1, dim + 1);
    m[(dim, dim - 1)] = gamma;
    HomTransform::from_matrix_unchecked(m)
}

/// `ρ ∘ φ_R` as a homogeneous matrix.
///
/// The product of the ρ matrix with the homogeneous frame map. Its bottom row
/// is `(0, …, γ, 1)` only when the frame is axis-aligned with zero depth offset;
/// in general it is `γ` times the depth row of the frame map plus `e_{d+1}`.
pub fn projective_embedding(frame: &Frame, gamma: f64) -> HomTransform {
    rho_transform(frame.dim(), gamma).compose(&frame_map(frame).to_homogeneous())
}

/// The internal-model transformation induced by moving from `before` to `after`.
pub fn transition_map(before: &Frame, after: &Frame, kind: GeometryKind) -> Transform {
    match kind {
        GeometryKind::Euclidean => {
            Transform::Affine(frame_map(after).compose(&frame_map(before).inverse()))
        }
        GeometryKind::Projective { gamma } => {
            let from = projective_embedding(before, gamma);
            let to = projective_embedding(after, gamma);
            Transform::Projective(to.compose(&from.inverse()))
        }
    }
}

/// Frame at `position` whose depth axis points at `object`.
///
/// In the plane the lateral axis is the depth axis rotated by −90°, which
/// makes `(lateral, depth)` right-handed. In space the second axis is the
/// world up-vector `(0,0,1)` orthogonalised against the depth axis
/// (falling back to `(1,0,0)` near the vertical) and the first completes a
/// right-handed triple.
pub fn face_object_frame(position: &Point, object: &Point) -> Result<Frame> {
    let dim = position.len();
    check_dim(dim)?;
    check_len(object, dim)?;
    let delta = object - position;
    let dist = delta.norm();
    if !(dist > 1e-9) {
        return Err(Error::DegenerateDirection);
    }
    let depth = delta / dist;
    let basis = if dim == 2 {
        DMatrix::from_row_slice(2, 2, &[depth[1], depth[0], -depth[0], depth[1]])
    } else {
        let u = Vector3::new(depth[0], depth[1], depth[2]);
        let up = Vector3::z();
        let reference = if (u.dot(&up).abs() - 1.0).abs() < 1e-6 {
            Vector3::x()
        } else {
            up
        };
        let e1 = (reference - u * reference.dot(&u)).normalize();
        let e0 = e1.cross(&u);
        DMatrix::from_columns(&[
            DVector::from_column_slice(e0.as_slice()),
            DVector::from_column_slice(e1.as_slice()),
            DVector::from_column_slice(u.as_slice()),
        ])
    };
    Ok(Frame {
        origin: position.clone(),
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::from_column_slice(v)
    }

    #[test]
    fn frame_map_identity_and_translation() {
        let id = Frame::identity(3).unwrap().frame_map();
        assert_eq!(id, AffineMap::identity(3));

        let f = Frame::new(p(&[0.0, 2.0, 0.0]), DMatrix::identity(3, 3)).unwrap();
        let image = f.frame_map().apply(&p(&[0.0, 2.0, 0.0]));
        assert!(image.norm() < 1e-15);
    }

    #[test]
    fn frame_map_rotated_about_z() {
        let f = Frame::spatial([0.0; 3], [0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let image = f.frame_map().apply(&p(&[1.0, 0.0, 0.0]));
        assert!((image - p(&[0.0, -1.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn frame_rejects_reflection_and_skew() {
        let refl = DMatrix::from_diagonal(&p(&[1.0, -1.0]));
        assert!(matches!(
            Frame::new(p(&[0.0, 0.0]), refl),
            Err(Error::InvalidFrame(_))
        ));
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(Frame::new(p(&[0.0, 0.0]), skew).is_err());
        assert!(matches!(
            Frame::identity(4),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&p(&[0.0, 0.0, 0.0]), 1.0).unwrap(), p(&[0.0, 0.0, 0.0]));
        assert_eq!(rho(&p(&[1.0, 0.0, 1.0]), 1.0).unwrap(), p(&[0.5, 0.0, 0.5]));
        assert!(matches!(
            rho(&p(&[2.0, 2.0, -0.5]), 2.0),
            Err(Error::SingularPlane { .. })
        ));
        // planar form divides by the depth coordinate too
        assert_eq!(rho(&p(&[1.0, 1.0]), 1.0).unwrap(), p(&[0.5, 0.5]));
    }

    #[test]
    fn rho_inverse_examples() {
        assert_eq!(
            rho_inverse(&p(&[0.0, 0.0, 0.0]), 1.0).unwrap(),
            p(&[0.0, 0.0, 0.0])
        );
        assert_eq!(
            rho_inverse(&p(&[0.5, 0.0, 0.5]), 1.0).unwrap(),
            p(&[1.0, 0.0, 1.0])
        );
        assert!(rho_inverse(&p(&[0.0, 0.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn embedding_of_identity_frame_is_rho() {
        let h = projective_embedding(&Frame::identity(3).unwrap(), 1.0);
        let image = h.apply(&p(&[1.0, 0.0, 1.0])).unwrap();
        assert!((image - p(&[0.5, 0.0, 0.5])).amax() < 1e-15);
        for gamma in [0.3, 1.0, 7.0] {
            let h = projective_embedding(&Frame::identity(3).unwrap(), gamma);
            let q = p(&[1.5, -2.0, 0.0]);
            assert!((h.apply(&q).unwrap() - &q).amax() < 1e-15);
        }
    }

    #[test]
    fn embedding_bottom_row_for_axis_aligned_frame() {
        let f = Frame::new(p(&[0.0, -1.0, 0.0]), DMatrix::identity(3, 3)).unwrap();
        let h = projective_embedding(&f, 1.0);
        let row = h.matrix().row(3).into_owned();
        // canonical scale leaves the largest entry (1) untouched here
        assert_eq!(row.as_slice(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn transition_identity_when_frames_agree() {
        let f = Frame::planar([0.3, -1.2], 0.7);
        match transition_map(&f, &f, GeometryKind::Euclidean) {
            Transform::Affine(a) => {
                assert!((a.linear() - DMatrix::identity(2, 2)).amax() < 1e-15);
                assert!(a.offset().amax() < 1e-15);
            }
            _ => unreachable!(),
        }
        match transition_map(&f, &f, GeometryKind::Projective { gamma: 1.0 }) {
            Transform::Projective(h) => assert!(h.approx_eq(&HomTransform::identity(2), 1e-12)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn euclidean_transition_pure_translation() {
        let before = Frame::planar([0.0, 0.0], 0.0);
        let after = Frame::planar([0.0, 0.5], 0.0);
        let Transform::Affine(a) = transition_map(&before, &after, GeometryKind::Euclidean) else {
            unreachable!()
        };
        assert!((a.linear() - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert!((a.offset() - p(&[0.0, -0.5])).amax() < 1e-15);
    }

    #[test]
    fn jacobian_det_examples() {
        let scale = Transform::Affine(
            AffineMap::new(DMatrix::identity(3, 3) * 2.0, Point::zeros(3)).unwrap(),
        );
        assert_eq!(jacobian_det(&scale, &p(&[4.0, 1.0, -2.0])).unwrap(), 8.0);

        let r = Transform::Projective(rho_transform(3, 1.0));
        let det = jacobian_det(&r, &p(&[0.0, 0.0, 1.0])).unwrap();
        assert!((det - 1.0 / 16.0).abs() < 1e-15);

        let r2 = Transform::Projective(rho_transform(2, 1.0));
        let det = jacobian_det(&r2, &p(&[0.0, 1.0])).unwrap();
        assert!((det - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn singular_projective_apply() {
        let r = rho_transform(3, 2.0);
        assert!(matches!(
            r.apply(&p(&[2.0, 2.0, -0.5])),
            Err(Error::SingularPlane { .. })
        ));
        assert!(r.jacobian_det(&p(&[0.0, 0.0, -0.5])).is_err());
    }

    #[test]
    fn face_object_examples() {
        let f = face_object_frame(&p(&[0.0, 0.0]), &p(&[0.0, 2.0])).unwrap();
        assert_eq!(f.depth_axis(), p(&[0.0, 1.0]));
        assert_eq!(f.basis(), &DMatrix::identity(2, 2));
        let local = f.frame_map().apply(&p(&[0.0, 2.0]));
        assert_eq!(local, p(&[0.0, 2.0]));

        let g = face_object_frame(&p(&[1.0, 1.0, 1.0]), &p(&[1.0, 1.0, 4.0])).unwrap();
        let local = g.frame_map().apply(&p(&[1.0, 1.0, 4.0]));
        assert!((local - p(&[0.0, 0.0, 3.0])).amax() < 1e-12);
        assert!((g.basis().determinant() - 1.0).abs() < 1e-12);

        assert_eq!(
            face_object_frame(&p(&[1.0, 1.0]), &p(&[1.0, 1.0])),
            Err(Error::DegenerateDirection)
        );
    }

    #[test]
    fn canonical_form_has_unit_pivot() {
        let h = HomTransform::new(DMatrix::identity(3, 3) * -4.0).unwrap();
        assert_eq!(h.matrix(), &DMatrix::identity(3, 3));
        assert!(matches!(
            HomTransform::new(DMatrix::zeros(3, 3)),
            Err(Error::SingularTransform(_))
        ));
    }
}
