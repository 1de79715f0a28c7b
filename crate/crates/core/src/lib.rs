//! Finite-scale machinery for k-flat transversals of near-ball families.
//!
//! The geometric kernel and the near-ball model are generic over the
//! [`Scalar`] type; the solvers, the independence engine and the
//! constructions work in double precision through the aliases below.

pub mod constructions;
pub mod geometry;
pub mod independence;
pub mod io;
pub mod nearball;
pub mod scalar;
pub mod solver;
pub mod vector;

pub use geometry::{
    canonicalize_flat, cone_contains, dist_ball_flat, dist_point_flat, flat_axis_angle, ClosedBall,
    Cone, GeometryError, KFlat,
};
pub use nearball::{
    check_weak_condition_r, nearball_constant, nearball_stats, pierces, Family, NearBall,
    NearBallError,
};
pub use scalar::Scalar;

pub type KFlat64 = KFlat<f64>;
pub type ClosedBall64 = ClosedBall<f64>;
pub type Cone64 = Cone<f64>;
pub type NearBall64 = NearBall<f64>;
pub type Family64 = Family<f64>;

pub type KFlat32 = KFlat<f32>;
pub type ClosedBall32 = ClosedBall<f32>;
pub type Cone32 = Cone<f32>;
pub type NearBall32 = NearBall<f32>;
pub type Family32 = Family<f32>;
