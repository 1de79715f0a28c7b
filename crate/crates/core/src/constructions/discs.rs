use itertools::Itertools;
use rayon::prelude::*;

use super::ConstructionError;
use crate::geometry::{ClosedBall, KFlat};
use crate::nearball::{Family, NearBall};
use crate::scalar::Scalar;
use crate::solver::{exists_transversal, SolveOptions, Transversal};
use crate::vector::{self, angle_between, dist};

/// Open discs `B((i, 1/i), 1/i)` for `i = 1..=n`.
pub fn counterexample_discs(n: usize) -> Result<Family<f64>, ConstructionError> {
    discs(n, true)
}

/// The same discs, closed. Every one of them is tangent to the x-axis.
pub fn counterexample_discs_closed(n: usize) -> Result<Family<f64>, ConstructionError> {
    discs(n, false)
}

fn discs(n: usize, open: bool) -> Result<Family<f64>, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidArgument(
            "n must be at least 1".into(),
        ));
    }
    let members = (1..=n)
        .map(|i| {
            let r = 1.0 / i as f64;
            let c = vec![i as f64, r];
            if open {
                NearBall::open_ball(c, r)
            } else {
                NearBall::ball(c, r)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family::new(members)?)
}

/// The region between the two inner common tangents of two discs, on the
/// side of the second disc.
#[derive(Debug, Clone, PartialEq)]
pub struct Wedge {
    pub apex: Vec<f64>,
    /// Unit vector from the first center towards the second.
    pub axis: Vec<f64>,
    pub half_angle: f64,
    pub bounding_lines: [KFlat<f64>; 2],
    /// The discs touch and both tangents coincide.
    pub degenerate: bool,
}

impl Wedge {
    pub fn contains_point(&self, p: &[f64]) -> bool {
        let v = vector::sub(p, &self.apex);
        if vector::norm(&v) <= f64::GEO_TOL {
            return true;
        }
        angle_between(&v, &self.axis) <= self.half_angle + f64::GEO_TOL
    }

    pub fn contains_ball(&self, b: &ClosedBall<f64>) -> bool {
        let v = vector::sub(b.center(), &self.apex);
        let d = vector::norm(&v);
        if d <= b.radius() {
            return false;
        }
        angle_between(&v, &self.axis) + (b.radius() / d).asin() <= self.half_angle + f64::GEO_TOL
    }
}

fn rotate(v: &[f64], t: f64) -> Vec<f64> {
    vec![
        v[0] * t.cos() - v[1] * t.sin(),
        v[0] * t.sin() + v[1] * t.cos(),
    ]
}

/// Apex at the internal homothety center, half-angle `asin((r1 + r2) / d)`.
pub fn inner_tangent_wedge(
    b1: &ClosedBall<f64>,
    b2: &ClosedBall<f64>,
) -> Result<Wedge, ConstructionError> {
    if b1.dim() != 2 || b2.dim() != 2 {
        return Err(ConstructionError::InvalidArgument(
            "inner tangents need discs in the plane".into(),
        ));
    }
    let (r1, r2) = (b1.radius(), b2.radius());
    let d = dist(b1.center(), b2.center());
    let gap = d - (r1 + r2);
    if gap < -f64::GEO_TOL {
        return Err(ConstructionError::NoInnerTangents);
    }
    let degenerate = gap.abs() <= f64::GEO_TOL;
    let axis = vector::scale(&vector::sub(b2.center(), b1.center()), 1.0 / d);
    let apex: Vec<f64> = b1
        .center()
        .iter()
        .zip(b2.center())
        .map(|(a, b)| (r2 * a + r1 * b) / (r1 + r2))
        .collect();
    let half_angle = ((r1 + r2) / d).min(1.0).asin();
    let line =
        |t: f64| KFlat::through_points(&[apex.clone(), vector::add(&apex, &rotate(&axis, t))]);
    Ok(Wedge {
        bounding_lines: [line(half_angle)?, line(-half_angle)?],
        apex,
        axis,
        half_angle,
        degenerate,
    })
}

/// Outcome for one triple `i < j < l` (0-based member indices).
#[derive(Debug, Clone, PartialEq)]
pub struct TripleCheck {
    pub triple: [usize; 3],
    /// Whether disc `l` lies in the wedge of `i, j`; `None` when `i` and `j`
    /// overlap and have no inner tangents.
    pub in_wedge: Option<bool>,
    /// For overlapping `i, j`: a common interior point exists, so a line
    /// through it and the center of `l` pierces all three.
    pub overlap_witness: bool,
    pub solver_pierced: bool,
    /// Signed clearance of the solver's line (negative means strict piercing).
    pub solver_signed: f64,
}

impl TripleCheck {
    pub fn passed(&self) -> bool {
        (self.in_wedge == Some(true) || self.overlap_witness) && self.solver_pierced
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeThreeReport {
    pub n: usize,
    pub checks: Vec<TripleCheck>,
}

impl ThreeThreeReport {
    pub fn failures(&self) -> Vec<&TripleCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(TripleCheck::passed)
    }
}

/// Every triple of the first `n` open discs: the wedge argument and an
/// independent solver search for a common line.
pub fn verify_33_property(
    n: usize,
    opts: &SolveOptions,
) -> Result<ThreeThreeReport, ConstructionError> {
    if n < 3 {
        return Err(ConstructionError::InvalidArgument(
            "prefix must have at least 3 discs".into(),
        ));
    }
    let open = counterexample_discs(n)?;
    let triples: Vec<Vec<usize>> = (0..n).combinations(3).collect();
    let checks = triples
        .par_iter()
        .enumerate()
        .map(|(t, idx)| -> Result<TripleCheck, ConstructionError> {
            let (i, j, l) = (idx[0], idx[1], idx[2]);
            let ball = |m: usize| open.members()[m].core().clone();
            let (bi, bj, bl) = (ball(i), ball(j), ball(l));
            let (in_wedge, overlap_witness) = match inner_tangent_wedge(&bi, &bj) {
                Ok(w) => (Some(w.contains_ball(&bl)), false),
                Err(ConstructionError::NoInnerTangents) => (
                    None,
                    dist(bi.center(), bj.center()) < bi.radius() + bj.radius() - f64::GEO_TOL,
                ),
                Err(e) => return Err(e),
            };
            let sub = open.subfamily(idx)?;
            let seeded = opts.with_seed(opts.seed.wrapping_add(t as u64));
            let (solver_pierced, solver_signed) = match exists_transversal(&sub, 1, &seeded)
                .map_err(|e| ConstructionError::InvariantViolated(e.to_string()))?
            {
                Transversal::Yes { solution } => (true, solution.signed),
                Transversal::No { best_value, .. } => (false, best_value),
            };
            Ok(TripleCheck {
                triple: [i, j, l],
                in_wedge,
                overlap_witness,
                solver_pierced,
                solver_signed,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThreeThreeReport { n, checks })
}
