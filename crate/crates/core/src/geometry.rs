//! Points, closed balls, k-flats and cones in R^d.
//!
//! A k-flat is stored in canonical form: the anchor `c` is the point of the
//! flat closest to the origin and the direction is an orthonormal basis of
//! `J - J`. The anchor is unique, the basis is not, so flat equality is
//! decided on anchors and spans, never on bases.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::vector::{self, axpy, dot, norm, residual, scale, sub};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("spanning set has rank {rank}, a flat in R^{dim} has dimension at most {}", dim - 1)]
    InvalidFlat { rank: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the direction of a 0-flat is undefined")]
    DirectionUndefined,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid ball: {0}")]
    InvalidBall(&'static str),
    #[error("invalid cone: {0}")]
    InvalidCone(&'static str),
    #[error("basis violates orthonormality or canonical form: {0}")]
    NotCanonical(&'static str),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

/// Closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBall<S: Scalar> {
    center: Vec<S>,
    radius: S,
}

impl<S: Scalar> ClosedBall<S> {
    pub fn new(center: Vec<S>, radius: S) -> Result<Self, GeometryError> {
        if center.is_empty() {
            return Err(GeometryError::InvalidBall("empty center"));
        }
        if !(radius >= S::zero()) || !radius.is_finite() {
            return Err(GeometryError::InvalidBall(
                "radius must be finite and nonnegative",
            ));
        }
        if center.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::InvalidBall("non-finite center"));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[S] {
        &self.center
    }

    pub fn radius(&self) -> S {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Same center, radius grown by `delta` (clamped at zero).
    pub fn inflated(&self, delta: S) -> Self {
        Self {
            center: self.center.clone(),
            radius: (self.radius + delta).max(S::zero()),
        }
    }

    pub fn contains(&self, p: &[S]) -> bool {
        vector::dist(&self.center, p) <= self.radius + S::geo_tol()
    }
}

/// Canonical affine k-flat `{c + sum_i t_i v_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KFlat<S: Scalar> {
    anchor: Vec<S>,
    basis: Vec<Vec<S>>,
}

impl<S: Scalar> KFlat<S> {
    /// Builds a flat from an already canonical `(c, v_1, .., v_k)` tuple,
    /// checking every invariant.
    pub fn new(anchor: Vec<S>, basis: Vec<Vec<S>>) -> Result<Self, GeometryError> {
        let d = anchor.len();
        if d == 0 {
            return Err(GeometryError::DegenerateInput(
                "zero-dimensional ambient space",
            ));
        }
        if basis.len() >= d {
            return Err(GeometryError::InvalidFlat {
                rank: basis.len(),
                dim: d,
            });
        }
        let tol = S::orth_tol();
        for (i, v) in basis.iter().enumerate() {
            check_dim(d, v.len())?;
            if (norm(v) - S::one()).abs() > tol {
                return Err(GeometryError::NotCanonical("basis vector is not unit"));
            }
            for w in &basis[..i] {
                if dot(v, w).abs() > tol {
                    return Err(GeometryError::NotCanonical(
                        "basis vectors are not orthogonal",
                    ));
                }
            }
            // Relative to |c| so desk-scale anchors are accepted.
            if dot(v, &anchor).abs() > tol * S::one().max(norm(&anchor)) {
                return Err(GeometryError::NotCanonical(
                    "anchor is not orthogonal to the direction",
                ));
            }
        }
        Ok(Self { anchor, basis })
    }

    /// The 0-flat `{p}`.
    pub fn point(p: Vec<S>) -> Self {
        Self {
            anchor: p,
            basis: Vec::new(),
        }
    }

    /// The line/plane/... spanned by coordinate axes `axes` through the origin.
    pub fn coordinate(dim: usize, axes: &[usize]) -> Result<Self, GeometryError> {
        let spanning: Vec<Vec<S>> = axes.iter().map(|&i| vector::unit(dim, i)).collect();
        canonicalize_flat(&vec![S::zero(); dim], &spanning)
    }

    /// Affine hull of the given points (rank may be lower than `points.len() - 1`).
    pub fn through_points(points: &[Vec<S>]) -> Result<Self, GeometryError> {
        let first = points
            .first()
            .ok_or(GeometryError::DegenerateInput("no points"))?;
        let spanning: Vec<Vec<S>> = points[1..].iter().map(|p| sub(p, first)).collect();
        canonicalize_flat(first, &spanning)
    }

    pub fn dim_ambient(&self) -> usize {
        self.anchor.len()
    }

    pub fn dim_flat(&self) -> usize {
        self.basis.len()
    }

    /// The point of the flat closest to the origin.
    pub fn anchor(&self) -> &[S] {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    /// Orthogonal projection of `p` onto the flat.
    pub fn foot(&self, p: &[S]) -> Vec<S> {
        let rel = sub(p, &self.anchor);
        let mut out = self.anchor.clone();
        for v in &self.basis {
            axpy(&mut out, dot(&rel, v), v);
        }
        out
    }

    pub fn contains_point(&self, p: &[S]) -> bool {
        dist_point_flat(p, self)
            .map(|d| d <= S::geo_tol())
            .unwrap_or(false)
    }

    /// Mutual anchor equality plus span equality, both within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: S) -> bool {
        if self.dim_ambient() != other.dim_ambient() || self.dim_flat() != other.dim_flat() {
            return false;
        }
        if vector::dist(&self.anchor, &other.anchor) > tol {
            return false;
        }
        let spans = |a: &[Vec<S>], b: &[Vec<S>]| a.iter().all(|v| norm(&residual(v, b)) <= tol);
        spans(&self.basis, &other.basis) && spans(&other.basis, &self.basis)
    }

    /// Translate by `t` and re-canonicalize.
    pub fn translated(&self, t: &[S]) -> Result<Self, GeometryError> {
        check_dim(self.dim_ambient(), t.len())?;
        canonicalize_flat(&vector::add(&self.anchor, t), &self.basis)
    }

    /// Orthonormal basis of the complement of the direction space.
    pub fn normal_basis(&self) -> Vec<Vec<S>> {
        vector::orthogonal_complement(self.dim_ambient(), &self.basis)
    }
}

/// Canonical flat through `anchor` spanned by `spanning`.
///
/// Orthonormalization is modified Gram-Schmidt with column pivoting: at each
/// step the remaining vector with the largest residual is taken, and the
/// process stops once the largest residual falls below `RANK_TOL` times the
/// largest input norm.
pub fn canonicalize_flat<S: Scalar>(
    anchor: &[S],
    spanning: &[Vec<S>],
) -> Result<KFlat<S>, GeometryError> {
    let d = anchor.len();
    if d == 0 {
        return Err(GeometryError::DegenerateInput(
            "zero-dimensional ambient space",
        ));
    }
    for v in spanning {
        check_dim(d, v.len())?;
    }
    if anchor
        .iter()
        .chain(spanning.iter().flatten())
        .any(|x| !x.is_finite())
    {
        return Err(GeometryError::DegenerateInput("non-finite coordinate"));
    }
    let reference = spanning.iter().map(|v| norm(v)).fold(S::zero(), S::max);
    let mut basis: Vec<Vec<S>> = Vec::new();
    if reference > S::zero() {
        let threshold = S::rank_tol() * reference;
        let mut work: Vec<Vec<S>> = spanning.to_vec();
        loop {
            let best = work
                .iter()
                .enumerate()
                .map(|(i, v)| (i, norm(v)))
                .max_by(|a, b| {
                    a.1.partial_cmp(&b.1)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(b.0.cmp(&a.0))
                });
            let Some((idx, n)) = best else { break };
            if n <= threshold {
                break;
            }
            let v = work.swap_remove(idx);
            // Reorthogonalize once against the accepted basis.
            let v = residual(&v, &basis);
            let n2 = norm(&v);
            if n2 <= threshold {
                continue;
            }
            let q = scale(&v, S::one() / n2);
            for w in work.iter_mut() {
                let c = dot(w, &q);
                axpy(w, -c, &q);
            }
            basis.push(q);
            if basis.len() >= d {
                return Err(GeometryError::InvalidFlat {
                    rank: basis.len(),
                    dim: d,
                });
            }
        }
    }
    let anchor = residual(anchor, &basis);
    Ok(KFlat { anchor, basis })
}

/// Euclidean distance from `p` to the flat.
pub fn dist_point_flat<S: Scalar>(p: &[S], f: &KFlat<S>) -> Result<S, GeometryError> {
    check_dim(f.dim_ambient(), p.len())?;
    let rel = sub(p, &f.anchor);
    Ok(norm(&residual(&rel, &f.basis)))
}

/// Distance from the ball to the flat (zero when they meet).
pub fn dist_ball_flat<S: Scalar>(b: &ClosedBall<S>, f: &KFlat<S>) -> Result<S, GeometryError> {
    Ok((dist_point_flat(&b.center, f)? - b.radius).max(S::zero()))
}

/// Signed version of [`dist_ball_flat`]: negative when the flat passes
/// through the interior, by the depth of penetration.
pub fn signed_gap_ball_flat<S: Scalar>(
    b: &ClosedBall<S>,
    f: &KFlat<S>,
) -> Result<S, GeometryError> {
    Ok(dist_point_flat(&b.center, f)? - b.radius)
}

/// Angle between the unit vector `u` and the direction space of `f`.
pub fn flat_axis_angle<S: Scalar>(f: &KFlat<S>, u: &[S]) -> Result<S, GeometryError> {
    check_dim(f.dim_ambient(), u.len())?;
    if f.dim_flat() == 0 {
        return Err(GeometryError::DirectionUndefined);
    }
    let along = f.basis.iter().fold(S::zero(), |acc, v| {
        let c = dot(u, v);
        acc + c * c
    });
    let perp = norm(&residual(u, &f.basis));
    Ok(perp.atan2(along.sqrt()))
}

/// Closed cone with apex at the origin: `{x : <axis, x> >= |x| cos(aperture)} \ {0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone<S: Scalar> {
    axis: Vec<S>,
    aperture: S,
}

impl<S: Scalar> Cone<S> {
    pub fn new(axis: Vec<S>, aperture: S) -> Result<Self, GeometryError> {
        if (norm(&axis) - S::one()).abs() > S::orth_tol() {
            return Err(GeometryError::InvalidCone("axis must be a unit vector"));
        }
        if !(aperture > S::zero() && aperture <= S::FRAC_PI_2() + S::orth_tol()) {
            return Err(GeometryError::InvalidCone("aperture must lie in (0, pi/2]"));
        }
        Ok(Self { axis, aperture })
    }

    pub fn axis(&self) -> &[S] {
        &self.axis
    }

    pub fn aperture(&self) -> S {
        self.aperture
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    /// Angle between the axis and the ray through `x`.
    pub fn angle_to(&self, x: &[S]) -> S {
        vector::angle_between(&self.axis, x)
    }

    /// Largest angle from the axis over points of the ball, or `None` when
    /// the ball contains the origin.
    pub fn ball_angle(&self, b: &ClosedBall<S>) -> Option<S> {
        let n = norm(b.center());
        if b.radius() >= n {
            return None;
        }
        Some(self.angle_to(b.center()) + (b.radius() / n).asin())
    }

    /// Whether the whole ball lies in the cone.
    pub fn contains_ball(&self, b: &ClosedBall<S>) -> bool {
        self.ball_angle(b)
            .map(|a| a <= self.aperture + S::geo_tol())
            .unwrap_or(false)
    }
}

/// Cone membership; boundary points count as inside (relative slack `GEO_TOL`).
pub fn cone_contains<S: Scalar>(cone: &Cone<S>, x: &[S]) -> Result<bool, GeometryError> {
    check_dim(cone.dim(), x.len())?;
    let n = norm(x);
    if n == S::zero() {
        return Err(GeometryError::DegenerateInput(
            "the apex is excluded from the cone",
        ));
    }
    Ok(dot(&cone.axis, x) >= n * (cone.aperture.cos() - S::geo_tol()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn canonicalize_examples() {
        let f = canonicalize_flat(&[1.0, 1.0], &[vec![0.0, 2.0]]).unwrap();
        assert!(close(f.anchor()[0], 1.0, 1e-15) && close(f.anchor()[1], 0.0, 1e-15));
        assert_eq!(f.dim_flat(), 1);
        assert!(close(f.basis()[0][1].abs(), 1.0, 1e-15));

        let p = canonicalize_flat::<f64>(&[3.0, 4.0], &[]).unwrap();
        assert_eq!(p.anchor(), &[3.0, 4.0]);
        assert_eq!(p.dim_flat(), 0);

        let l = canonicalize_flat(&[2.0, 0.0], &[vec![1.0, -1.0]]).unwrap();
        assert!(close(l.anchor()[0], 1.0, 1e-15) && close(l.anchor()[1], 1.0, 1e-15));
        let s = 1.0 / 2f64.sqrt();
        let v = &l.basis()[0];
        assert!(close(v[0] * v[0], s * s, 1e-15) && close(v[0] * v[1], -0.5, 1e-15));
    }

    #[test]
    fn dependent_spanning_set_reduces_rank() {
        let f = canonicalize_flat(
            &[0.0, 0.0, 5.0],
            &[
                vec![1.0, 0.0, 0.0],
                vec![2.0, 0.0, 0.0],
                vec![1.0, 1e-12, 0.0],
            ],
        )
        .unwrap();
        assert_eq!(f.dim_flat(), 1);
    }

    #[test]
    fn full_rank_spanning_set_is_rejected() {
        let err = canonicalize_flat(&[0.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(err, GeometryError::InvalidFlat { rank: 2, dim: 2 });
    }

    #[test]
    fn distance_examples() {
        let x_axis = KFlat::<f64>::coordinate(2, &[0]).unwrap();
        assert_eq!(dist_point_flat(&[0.0, 0.0], &x_axis).unwrap(), 0.0);
        let origin = KFlat::point(vec![0.0, 0.0]);
        assert!(close(
            dist_point_flat(&[3.0, 4.0], &origin).unwrap(),
            5.0,
            1e-15
        ));
        let xy = KFlat::<f64>::coordinate(3, &[0, 1]).unwrap();
        assert!(close(
            dist_point_flat(&[1.0, 1.0, 1.0], &xy).unwrap(),
            1.0,
            1e-15
        ));

        let b = |c: [f64; 2], r: f64| ClosedBall::new(c.to_vec(), r).unwrap();
        assert!(close(
            dist_ball_flat(&b([0.0, 3.0], 1.0), &x_axis).unwrap(),
            2.0,
            1e-15
        ));
        assert_eq!(dist_ball_flat(&b([0.0, 1.0], 1.0), &x_axis).unwrap(), 0.0);
        let y_axis = KFlat::<f64>::coordinate(2, &[1]).unwrap();
        assert!(close(
            dist_ball_flat(&b([5.0, 0.0], 2.0), &y_axis).unwrap(),
            3.0,
            1e-15
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x_axis = KFlat::<f64>::coordinate(2, &[0]).unwrap();
        assert!(matches!(
            dist_point_flat(&[0.0, 0.0, 0.0], &x_axis),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn axis_angle_examples() {
        let x_axis = KFlat::<f64>::coordinate(2, &[0]).unwrap();
        assert_eq!(flat_axis_angle(&x_axis, &[1.0, 0.0]).unwrap(), 0.0);
        let xy = KFlat::<f64>::coordinate(3, &[0, 1]).unwrap();
        assert!(close(
            flat_axis_angle(&xy, &[0.0, 0.0, 1.0]).unwrap(),
            std::f64::consts::FRAC_PI_2,
            1e-15
        ));
        let diag = canonicalize_flat(&[0.0, 0.0], &[vec![1.0, 1.0]]).unwrap();
        assert!(close(
            flat_axis_angle(&diag, &[1.0, 0.0]).unwrap(),
            std::f64::consts::FRAC_PI_4,
            1e-15
        ));
        let pt = KFlat::point(vec![0.0, 0.0]);
        assert_eq!(
            flat_axis_angle(&pt, &[1.0, 0.0]),
            Err(GeometryError::DirectionUndefined)
        );
    }

    #[test]
    fn cone_examples() {
        let q = std::f64::consts::FRAC_PI_4;
        let c3 = Cone::new(vec![0.0, 0.0, 1.0], q).unwrap();
        assert!(cone_contains(&c3, &[0.0, 0.0, 1.0]).unwrap());
        assert!(!cone_contains(&c3, &[1.0, 0.0, 0.0]).unwrap());
        let c2 = Cone::new(vec![0.0, 1.0], q).unwrap();
        assert!(cone_contains(&c2, &[1.0, 1.0]).unwrap());
        assert!(matches!(
            cone_contains(&c2, &[0.0, 0.0]),
            Err(GeometryError::DegenerateInput(_))
        ));
    }

    #[test]
    fn new_rejects_non_canonical_anchor() {
        let err = KFlat::new(vec![1.0, 1.0], vec![vec![1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, GeometryError::NotCanonical(_)));
    }

    #[test]
    fn f32_kernel_works() {
        let f = canonicalize_flat::<f32>(&[1.0, 1.0], &[vec![0.0, 2.0]]).unwrap();
        assert!((dist_point_flat(&[3.0f32, 0.0], &f).unwrap() - 2.0).abs() < 1e-6);
    }
}
