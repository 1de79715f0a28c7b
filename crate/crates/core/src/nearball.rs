//! Near-balls represented as finite unions of closed balls with a designated
//! inscribed core, and the family constant `K`.
//!
//! `x_B` is the core center, `r_in` the core radius and `r_esc` the radius
//! of the smallest ball centered at `x_B` containing every part. When the
//! core is not the true maximal inscribed ball the computed `K` is an upper
//! bound for the exact one.

use thiserror::Error;

use crate::geometry::{check_dim, dist_point_flat, ClosedBall, GeometryError, KFlat};
use crate::scalar::Scalar;
use crate::vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NearBallError {
    #[error("a near-ball needs at least one part")]
    NoParts,
    #[error("core index {index} out of range for {len} parts")]
    CoreOutOfRange { index: usize, len: usize },
    #[error("core radius must be positive")]
    DegenerateCore,
    #[error("open near-balls need positive radii on every part")]
    EmptyOpenPart,
    #[error("a family needs at least one member")]
    EmptyFamily,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A compact (or, with `open`, open) set given as a union of balls.
#[derive(Debug, Clone, PartialEq)]
pub struct NearBall<S: Scalar> {
    parts: Vec<ClosedBall<S>>,
    core_index: usize,
    open: bool,
}

impl<S: Scalar> NearBall<S> {
    pub fn new(
        parts: Vec<ClosedBall<S>>,
        core_index: usize,
        open: bool,
    ) -> Result<Self, NearBallError> {
        let first = parts.first().ok_or(NearBallError::NoParts)?;
        let d = first.dim();
        for p in &parts {
            check_dim(d, p.dim())?;
        }
        if core_index >= parts.len() {
            return Err(NearBallError::CoreOutOfRange {
                index: core_index,
                len: parts.len(),
            });
        }
        if !(parts[core_index].radius() > S::zero()) {
            return Err(NearBallError::DegenerateCore);
        }
        if open && parts.iter().any(|p| !(p.radius() > S::zero())) {
            return Err(NearBallError::EmptyOpenPart);
        }
        Ok(Self {
            parts,
            core_index,
            open,
        })
    }

    /// A single closed ball.
    pub fn ball(center: Vec<S>, radius: S) -> Result<Self, NearBallError> {
        Self::new(vec![ClosedBall::new(center, radius)?], 0, false)
    }

    /// A single open ball.
    pub fn open_ball(center: Vec<S>, radius: S) -> Result<Self, NearBallError> {
        Self::new(vec![ClosedBall::new(center, radius)?], 0, true)
    }

    pub fn parts(&self) -> &[ClosedBall<S>] {
        &self.parts
    }

    pub fn core_index(&self) -> usize {
        self.core_index
    }

    pub fn core(&self) -> &ClosedBall<S> {
        &self.parts[self.core_index]
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn center(&self) -> &[S] {
        self.core().center()
    }

    pub fn r_in(&self) -> S {
        self.core().radius()
    }

    pub fn r_esc(&self) -> S {
        let x = self.center();
        self.parts
            .iter()
            .map(|p| vector::dist(p.center(), x) + p.radius())
            .fold(S::zero(), S::max)
    }

    /// Same geometry with the open flag replaced.
    pub fn with_open(&self, open: bool) -> Result<Self, NearBallError> {
        Self::new(self.parts.clone(), self.core_index, open)
    }

    /// Every radius grown by `delta`.
    pub fn inflated(&self, delta: S) -> Self {
        Self {
            parts: self.parts.iter().map(|p| p.inflated(delta)).collect(),
            core_index: self.core_index,
            open: self.open,
        }
    }
}

/// `(x_B, r_in, r_esc)` of a near-ball.
#[derive(Debug, Clone, PartialEq)]
pub struct NearBallStats<S: Scalar> {
    pub center: Vec<S>,
    pub r_in: S,
    pub r_esc: S,
}

pub fn nearball_stats<S: Scalar>(b: &NearBall<S>) -> NearBallStats<S> {
    NearBallStats {
        center: b.center().to_vec(),
        r_in: b.r_in(),
        r_esc: b.r_esc(),
    }
}

/// Per-member terms of the near-ball constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberConstant<S: Scalar> {
    /// `r_esc / r_in`
    pub ratio: S,
    /// `r_esc - r_in`
    pub additive: S,
}

impl<S: Scalar> MemberConstant<S> {
    pub fn of(b: &NearBall<S>) -> Self {
        let (r_in, r_esc) = (b.r_in(), b.r_esc());
        Self {
            ratio: r_esc / r_in,
            additive: r_esc - r_in,
        }
    }

    /// Least `K` satisfying both conditions for this member.
    pub fn least_k(&self) -> S {
        self.ratio.max(self.additive)
    }
}

/// Ordered family of near-balls with its cached constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Family<S: Scalar> {
    members: Vec<NearBall<S>>,
    constant: S,
}

impl<S: Scalar> Family<S> {
    pub fn new(members: Vec<NearBall<S>>) -> Result<Self, NearBallError> {
        let first = members.first().ok_or(NearBallError::EmptyFamily)?;
        let d = first.dim();
        for m in &members {
            check_dim(d, m.dim())?;
        }
        let constant = members
            .iter()
            .map(|m| MemberConstant::of(m).least_k())
            .fold(S::zero(), S::max);
        Ok(Self { members, constant })
    }

    pub fn members(&self) -> &[NearBall<S>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Cached `K(F)`.
    pub fn constant(&self) -> S {
        self.constant
    }

    pub fn push(&mut self, b: NearBall<S>) -> Result<(), NearBallError> {
        check_dim(self.dim(), b.dim())?;
        self.constant = self.constant.max(MemberConstant::of(&b).least_k());
        self.members.push(b);
        Ok(())
    }

    /// Subfamily by member indices, in the given order.
    pub fn subfamily(&self, indices: &[usize]) -> Result<Self, NearBallError> {
        Self::new(indices.iter().map(|&i| self.members[i].clone()).collect())
    }

    /// True when every member is open.
    pub fn is_open(&self) -> bool {
        self.members.iter().all(|m| m.is_open())
    }

    pub fn with_open(&self, open: bool) -> Result<Self, NearBallError> {
        Self::new(
            self.members
                .iter()
                .map(|m| m.with_open(open))
                .collect::<Result<_, _>>()?,
        )
    }
}

/// Result of [`nearball_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct NearBallConstant<S: Scalar> {
    pub k: S,
    pub per_member: Vec<MemberConstant<S>>,
}

/// Least `K` with `r_esc <= K r_in` and `r_esc <= K + r_in` for every member.
pub fn nearball_constant<S: Scalar>(f: &Family<S>) -> NearBallConstant<S> {
    let per_member: Vec<_> = f.members.iter().map(MemberConstant::of).collect();
    let k = per_member
        .iter()
        .map(|m| m.least_k())
        .fold(S::zero(), S::max);
    NearBallConstant { k, per_member }
}

/// Running constant over a stream of members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KBound<S: Scalar> {
    Finite(S),
    /// The running maximum passed `cap` at member `at`.
    Unbounded {
        at: usize,
        running: S,
    },
}

/// Streaming variant of [`nearball_constant`] that stops once the running
/// maximum exceeds `cap`.
pub fn nearball_constant_capped<'a, S: Scalar, I>(members: I, cap: S) -> KBound<S>
where
    I: IntoIterator<Item = &'a NearBall<S>>,
{
    let mut running = S::zero();
    for (i, m) in members.into_iter().enumerate() {
        running = running.max(MemberConstant::of(m).least_k());
        if running > cap {
            return KBound::Unbounded { at: i, running };
        }
    }
    KBound::Finite(running)
}

/// Signed clearance between a flat and a near-ball: the minimum over parts
/// of `dist(center, flat) - radius`. Nonpositive iff a closed part meets the flat.
pub fn clearance<S: Scalar>(flat: &KFlat<S>, b: &NearBall<S>) -> Result<S, GeometryError> {
    let mut best = S::infinity();
    for p in b.parts() {
        best = best.min(dist_point_flat(p.center(), flat)? - p.radius());
    }
    Ok(best)
}

/// Whether `flat` meets `b`: closed parts within `GEO_TOL`, open parts with
/// strict penetration deeper than `GEO_TOL`.
pub fn pierces<S: Scalar>(flat: &KFlat<S>, b: &NearBall<S>) -> Result<bool, GeometryError> {
    Ok(clearance_pierces(clearance(flat, b)?, b.is_open()))
}

/// Piercing decision from a precomputed clearance.
pub fn clearance_pierces<S: Scalar>(clearance: S, open: bool) -> bool {
    if open {
        clearance < -S::geo_tol()
    } else {
        clearance <= S::geo_tol()
    }
}

/// For each `r`, the supremum of `r_esc` over members with `r_in <= r`
/// (zero for an empty set).
pub fn check_weak_condition_r<S: Scalar>(f: &Family<S>, r_grid: &[S]) -> Vec<(S, S)> {
    r_grid
        .iter()
        .map(|&r| {
            let sup = f
                .members
                .iter()
                .filter(|m| m.r_in() <= r)
                .map(|m| m.r_esc())
                .fold(S::zero(), S::max);
            (r, sup)
        })
        .collect()
}
