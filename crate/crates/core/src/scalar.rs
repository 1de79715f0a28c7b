//! Scalar abstraction for the geometric kernel and the near-ball model.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the kernel is generic over (`f32` or `f64`).
///
/// Tolerances are carried per type: the double-precision values are the
/// working tolerances of the crate, the single-precision ones are scaled to
/// the coarser mantissa.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Incidence / piercing tolerance.
    const GEO_TOL: f64;
    /// Orthonormality tolerance for flat bases.
    const ORTH_TOL: f64;
    /// Relative threshold below which a direction counts as rank deficient.
    const RANK_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn geo_tol() -> Self {
        Self::lit(Self::GEO_TOL)
    }

    #[inline]
    fn orth_tol() -> Self {
        Self::lit(Self::ORTH_TOL)
    }

    #[inline]
    fn rank_tol() -> Self {
        Self::lit(Self::RANK_TOL)
    }
}

impl Scalar for f64 {
    const GEO_TOL: f64 = 1e-9;
    const ORTH_TOL: f64 = 1e-10;
    const RANK_TOL: f64 = 1e-8;
}

impl Scalar for f32 {
    const GEO_TOL: f64 = 1e-4;
    const ORTH_TOL: f64 = 1e-5;
    const RANK_TOL: f64 = 1e-4;
}
