//! Explicit families: the compactification map, the open-disc family with
//! the (3,3)-property, sharpness examples and the disjoint-sequence builder.

mod discs;
pub mod random;
mod segments;
mod sequence;

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::nearball::{NearBall, NearBallError};
use crate::vector::{self, norm};

pub use discs::{
    counterexample_discs, counterexample_discs_closed, inner_tangent_wedge, verify_33_property,
    ThreeThreeReport, TripleCheck, Wedge,
};
pub use segments::{
    chain, chords, segments_family, segments_family_with_resolution, sharpness_family2,
    verify_family2, verify_segments, Family2Report, Segment, SegmentsReport, CHAIN_RESOLUTION,
};
pub use sequence::{disjoint_sequence_builder, FamilySampler, NeighborhoodSampler};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the discs overlap; no inner tangents")]
    NoInnerTangents,
    #[error("sampler exhausted after {found} members")]
    SamplerExhausted { found: usize },
    #[error("construction invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    NearBall(#[from] NearBallError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Finite,
    AtInfinity,
}

/// A point of the compactification: a finite point, or a unit direction
/// standing for the point at infinity of that ray.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactifiedPoint {
    pub kind: PointKind,
    pub coords: Vec<f64>,
}

impl CompactifiedPoint {
    pub fn finite(x: Vec<f64>) -> Self {
        Self {
            kind: PointKind::Finite,
            coords: x,
        }
    }

    pub fn at_infinity(direction: &[f64]) -> Result<Self, ConstructionError> {
        let u = vector::normalized(direction)
            .ok_or_else(|| ConstructionError::InvalidArgument("zero direction".into()))?;
        Ok(Self {
            kind: PointKind::AtInfinity,
            coords: u,
        })
    }

    /// Image in the closed ball of radius pi/2.
    pub fn model(&self) -> Vec<f64> {
        match self.kind {
            PointKind::Finite => compactify(&self.coords),
            PointKind::AtInfinity => vector::scale(&self.coords, FRAC_PI_2),
        }
    }
}

/// `x -> x arctan|x| / |x|`, with `0 -> 0`.
pub fn compactify(x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    if r == 0.0 {
        return vec![0.0; x.len()];
    }
    vector::scale(x, r.atan() / r)
}

/// Inverse of [`compactify`]; points on the boundary sphere are at infinity.
pub fn decompactify(y: &[f64]) -> CompactifiedPoint {
    let s = norm(y);
    if s == 0.0 {
        return CompactifiedPoint::finite(vec![0.0; y.len()]);
    }
    if s >= FRAC_PI_2 {
        return CompactifiedPoint {
            kind: PointKind::AtInfinity,
            coords: vector::scale(y, 1.0 / s),
        };
    }
    // tan(s) = 1 / tan(pi/2 - s) keeps precision close to the boundary.
    let t = if s > 1.0 {
        1.0 / (FRAC_PI_2 - s).tan()
    } else {
        s.tan()
    };
    CompactifiedPoint::finite(vector::scale(y, t / s))
}

/// Exact disjointness of two finite unions of closed balls.
pub fn unions_disjoint(a: &NearBall<f64>, b: &NearBall<f64>) -> bool {
    a.parts().iter().all(|p| {
        b.parts()
            .iter()
            .all(|q| vector::dist(p.center(), q.center()) > p.radius() + q.radius())
    })
}

/// Distance from `x` to a union of balls (zero inside).
pub fn dist_point_union(x: &[f64], b: &NearBall<f64>) -> f64 {
    b.parts()
        .iter()
        .map(|p| vector::dist(x, p.center()) - p.radius())
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn compactify_examples() {
        assert_eq!(compactify(&[0.0, 0.0]), vec![0.0, 0.0]);
        let y = compactify(&[1.0, 0.0]);
        assert!((y[0] - FRAC_PI_4).abs() < 1e-15 && y[1] == 0.0);
        let far = compactify(&[1e12, 1e12]);
        assert!((norm(&far) - FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn round_trip_is_accurate() {
        for &r in &[1e-8, 0.3, 1.0, 7.5, 1e3, 1e6] {
            let x = [r * 0.6, -r * 0.8];
            let back = decompactify(&compactify(&x));
            assert_eq!(back.kind, PointKind::Finite);
            let err = vector::dist(&back.coords, &x) / r;
            // Relative error grows like eps * |x| near the boundary.
            assert!(err <= 1e-15 * (1.0 + r) * 8.0, "r={r}: {err}");
        }
    }

    #[test]
    fn boundary_decompactifies_to_infinity() {
        let p = decompactify(&[0.0, FRAC_PI_2]);
        assert_eq!(p.kind, PointKind::AtInfinity);
        assert_eq!(p.coords, vec![0.0, 1.0]);
        assert_eq!(p.model(), vec![0.0, FRAC_PI_2]);
    }
}
