//! Monte-Carlo checks of the cone estimates and the axis-angle bound for
//! tuples of members.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::projection::central_project_family;
use super::IndependenceError;
use crate::constructions::random::{
    angle_to_axis, direction_at_angle, random_nearball, random_unit,
};
use crate::geometry::{canonicalize_flat, ClosedBall, Cone, KFlat};
use crate::nearball::{Family, NearBall};
use crate::scalar::Scalar;
use crate::solver::{
    chart_point, evaluate_direction, exists_transversal, seed_direction, simplex, Instance,
    SolveOptions, Transversal,
};
use crate::vector::{self, dot, norm, orthogonal_complement};

/// Outcome of a Monte-Carlo claim check.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClaimReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest observed value of the checked quantity.
    pub max_observed: f64,
    /// The bound it is checked against.
    pub bound: f64,
    /// Whether the sampler respected the claim's hypotheses.
    pub premise_holds: bool,
    pub first_violation: Option<String>,
}

impl ClaimReport {
    fn finish(self) -> Result<Self, IndependenceError> {
        if self.premise_holds && self.violations > 0 {
            return Err(IndependenceError::CounterexampleFound(
                self.first_violation.clone().unwrap_or_default(),
            ));
        }
        Ok(self)
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut z = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Samples leaning towards the upper end of `[0, 1)`, where the bounds are tight.
fn skewed(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0 - 1e-9 - rng.random::<f64>().powi(4) * 1e-3
    } else {
        rng.random::<f64>()
    }
}

fn merge(
    trials: usize,
    bound: f64,
    premise_holds: bool,
    per_trial: Vec<(f64, Option<String>)>,
) -> ClaimReport {
    let mut report = ClaimReport {
        trials,
        violations: 0,
        max_observed: 0.0,
        bound,
        premise_holds,
        first_violation: None,
    };
    for (v, bad) in per_trial {
        report.max_observed = report.max_observed.max(v);
        if let Some(msg) = bad {
            report.violations += 1;
            report.first_violation.get_or_insert(msg);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeClaimParams {
    pub k_const: f64,
    pub d_inflate: f64,
    pub eps1: f64,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
    /// Multiplier on the sampling neighborhood; values above 1 break the premise.
    pub premise_scale: f64,
    /// Random boundary points per inflated part.
    pub boundary_samples: usize,
}

impl ConeClaimParams {
    pub fn new(k_const: f64, d_inflate: f64, eps1: f64, trials: usize, seed: u64) -> Self {
        Self {
            k_const,
            d_inflate,
            eps1,
            trials,
            seed,
            dim: 3,
            premise_scale: 1.0,
            boundary_samples: 16,
        }
    }

    /// `eps1 / (1 + (pi/2)(K + D))`.
    pub fn eps_prime(&self) -> f64 {
        self.eps1 / (1.0 + FRAC_PI_2 * (self.k_const + self.d_inflate))
    }
}

/// Members far out in a thin cone around `e_d` stay inside the wider cone
/// even after inflation by `D`.
///
/// Samples members with `|x_B| >= 1/eps'`, `x_B` within angle `eps'` of the
/// axis, constant at most `K` and core disjoint from the axis line, and
/// checks every sampled boundary point of `B + D B(0,1)`, together with the
/// exact extreme angle of each inflated part, against `eps1`.
pub fn verify_claim_cone(p: &ConeClaimParams) -> Result<ClaimReport, IndependenceError> {
    if !(p.k_const >= 1.0 && p.d_inflate >= 0.0 && p.eps1 > 0.0 && p.eps1 < FRAC_PI_2 && p.dim >= 2)
    {
        return Err(IndependenceError::InvalidArgument(
            "need K >= 1, D >= 0, 0 < eps1 < pi/2, d >= 2".into(),
        ));
    }
    let eps = p.eps_prime() * p.premise_scale;
    let axis = vector::unit::<f64>(p.dim, p.dim - 1);
    let cone = Cone::new(axis.clone(), p.eps1)?;
    let per_trial: Vec<(f64, Option<String>)> = (0..p.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t);
            let alpha = eps * skewed(&mut rng);
            let r0 = 1.0 / eps * (1.0 + 4.0 * rng.random::<f64>().powi(3));
            let x = vector::scale(&direction_at_angle(&mut rng, &axis, alpha), r0);
            let to_axis = r0 * alpha.sin();
            let r_in = (to_axis * skewed(&mut rng)).max(to_axis * 1e-6);
            let max_esc = (p.k_const * r_in).min(p.k_const + r_in);
            let r_esc = r_in + (max_esc - r_in) * skewed(&mut rng);
            let extra = rng.random_range(0..=3);
            let b = random_nearball(
                &mut rng,
                &x,
                r_in,
                if extra == 0 { r_in } else { r_esc },
                extra,
                false,
            )
            .expect("valid radii");
            let mut worst: f64 = 0.0;
            let mut bad = None;
            for part in b.parts() {
                let inflated = part.inflated(p.d_inflate);
                let extreme = cone.ball_angle(&inflated).unwrap_or(PI);
                worst = worst.max(extreme);
                for _ in 0..p.boundary_samples {
                    let mut q = inflated.center().to_vec();
                    vector::axpy(&mut q, inflated.radius(), &random_unit(&mut rng, p.dim));
                    if norm(&q) == 0.0
                        || !crate::geometry::cone_contains(&cone, &q).unwrap_or(false)
                    {
                        bad.get_or_insert(format!(
                            "trial {t}: boundary point {q:?} outside the cone"
                        ));
                    }
                    worst = worst.max(angle_to_axis(&q, &axis));
                }
                if extreme > p.eps1 + 1e-12 {
                    bad.get_or_insert(format!("trial {t}: inflated part reaches angle {extreme}"));
                }
            }
            (worst, bad)
        })
        .collect();
    merge(p.trials, p.eps1, p.premise_scale <= 1.0, per_trial).finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WideConeParams {
    pub k_const: f64,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
}

impl WideConeParams {
    pub fn new(k_const: f64, alpha: f64, trials: usize, seed: u64) -> Self {
        Self {
            k_const,
            alpha,
            trials,
            seed,
            dim: 3,
        }
    }

    /// `alpha (1 + pi K / 2)`.
    pub fn aperture_bound(&self) -> f64 {
        self.alpha * (1.0 + FRAC_PI_2 * self.k_const)
    }
}

/// `(beta, gamma)`: angle from `axis` to the core center and the half-angle
/// the escribed ball subtends at the origin.
pub fn wide_cone_angles(b: &NearBall<f64>, axis: &[f64]) -> Option<(f64, f64)> {
    let x = b.center();
    let nx = norm(x);
    (nx > b.r_esc()).then(|| (angle_to_axis(x, axis), (b.r_esc() / nx).asin()))
}

/// Escribed balls of members centered within `alpha` of the ray `-e_d`,
/// with cores missing the ray, stay inside the pi/4 cone.
pub fn verify_claim_wide_cone(p: &WideConeParams) -> Result<ClaimReport, IndependenceError> {
    if !(p.k_const >= 1.0 && p.alpha > 0.0 && p.alpha < FRAC_PI_2 && p.dim >= 2) {
        return Err(IndependenceError::InvalidArgument(
            "need K >= 1, 0 < alpha < pi/2, d >= 2".into(),
        ));
    }
    let mut axis = vec![0.0; p.dim];
    axis[p.dim - 1] = -1.0;
    let bound = p.aperture_bound();
    let premise = bound < FRAC_PI_4;
    let per_trial: Vec<(f64, Option<String>)> = (0..p.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t);
            let beta = p.alpha * skewed(&mut rng).max(1e-9);
            let r0 = 10f64.powf(rng.random_range(-3.0..3.0));
            let x = vector::scale(&direction_at_angle(&mut rng, &axis, beta), r0);
            let to_ray = r0 * beta.sin();
            let r_in = (to_ray * skewed(&mut rng)).max(to_ray * 1e-6);
            let r_esc = r_in * (1.0 + (p.k_const - 1.0) * skewed(&mut rng));
            let extra = rng.random_range(0..=3);
            let b = random_nearball(
                &mut rng,
                &x,
                r_in,
                if extra == 0 { r_in } else { r_esc },
                extra,
                false,
            )
            .expect("valid radii");
            let Some((bt, gm)) = wide_cone_angles(&b, &axis) else {
                return (
                    PI,
                    Some(format!("trial {t}: escribed ball contains the origin")),
                );
            };
            let aperture = bt + gm;
            let mut bad = None;
            if aperture >= FRAC_PI_4 {
                bad = Some(format!(
                    "trial {t}: escribed ball reaches angle {aperture} >= pi/4"
                ));
            } else if aperture > bound + 1e-9 {
                bad = Some(format!("trial {t}: aperture {aperture} above {bound}"));
            }
            (aperture, bad)
        })
        .collect();
    merge(p.trials, bound.min(FRAC_PI_4), premise, per_trial).finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KtoKParams {
    pub k_const: f64,
    pub trials: usize,
    pub seed: u64,
    pub dim: usize,
}

impl KtoKParams {
    pub fn new(k_const: f64, trials: usize, seed: u64) -> Self {
        Self {
            k_const,
            trials,
            seed,
            dim: 3,
        }
    }
}

/// Central projection of members whose escribed ball lies in the pi/4 cone
/// around `-e_d` keeps the escribed/inscribed ratio within `sqrt(2) K`.
///
/// `max_observed` is the largest projected ratio; the bound is
/// `sqrt(2) K + 1e-6`.
pub fn verify_claim_ktok(p: &KtoKParams) -> Result<ClaimReport, IndependenceError> {
    if !(p.k_const >= 1.0 && p.dim >= 2) {
        return Err(IndependenceError::InvalidArgument(
            "need K >= 1 and d >= 2".into(),
        ));
    }
    let mut axis = vec![0.0; p.dim];
    axis[p.dim - 1] = -1.0;
    let cone = Cone::new(axis.clone(), FRAC_PI_4)?;
    let bound = 2f64.sqrt() * p.k_const + 1e-6;
    let per_trial: Vec<(f64, Option<String>)> = (0..p.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t);
            let room = FRAC_PI_4 * (1.0 - 1e-6);
            let beta = room * rng.random::<f64>();
            let zeta = (room - beta) * skewed(&mut rng).max(1e-6);
            let r0 = 10f64.powf(rng.random_range(-2.0..2.0));
            let x = vector::scale(&direction_at_angle(&mut rng, &axis, beta), r0);
            let r_esc = r0 * zeta.sin();
            let ratio = 1.0 + (p.k_const - 1.0) * skewed(&mut rng);
            let r_in = r_esc / ratio;
            let extra = if ratio > 1.0 {
                rng.random_range(1..=3)
            } else {
                0
            };
            let b = random_nearball(&mut rng, &x, r_in, r_esc, extra, false).expect("valid radii");
            let fam = Family::new(vec![b]).expect("one member");
            match central_project_family(&fam, &cone) {
                Ok(g) => {
                    let m = &g.members()[0];
                    let q = m.r_esc() / m.r_in();
                    let bad = (q > bound)
                        .then(|| format!("trial {t}: projected ratio {q} above {bound}"));
                    (q, bad)
                }
                Err(e) => (f64::INFINITY, Some(format!("trial {t}: {e}"))),
            }
        })
        .collect();
    merge(p.trials, bound, true, per_trial).finish()
}

/// Lower bound on the angle between `axis` and any flat piercing a tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Epsilon0 {
    /// Smallest axis angle found over piercing flats.
    pub raw: f64,
    /// `raw / 2`.
    pub epsilon0: f64,
    /// The piercing flat attaining `raw`.
    pub flat: KFlat<f64>,
}

fn axis_angle(basis: &[Vec<f64>], axis: &[f64]) -> f64 {
    let along: Vec<f64> = basis.iter().map(|v| dot(v, axis)).collect();
    let perp = norm(&vector::residual(axis, basis));
    perp.atan2(norm(&along))
}

/// Smallest angle between `axis` and the direction space of a k-flat
/// piercing all `k + 1` members of `tuple`.
///
/// Flats containing the axis direction are ruled out first by projecting
/// along the axis. The angle is then minimized over directions with an
/// increasing feasibility penalty; each direction gets its exact best anchor.
pub fn epsilon0_for_tuple(
    tuple: &[NearBall<f64>],
    axis: &[f64],
    opts: &SolveOptions,
) -> Result<Epsilon0, IndependenceError> {
    opts.validate()?;
    if tuple.len() < 2 {
        return Err(IndependenceError::InvalidArgument(
            "need a tuple of k + 1 >= 2 members".into(),
        ));
    }
    let k = tuple.len() - 1;
    let f = Family::new(tuple.to_vec())?;
    let d = f.dim();
    if k >= d || axis.len() != d {
        return Err(IndependenceError::InvalidArgument(
            "need k < d and an axis of matching dimension".into(),
        ));
    }
    let axis = vector::normalized(axis)
        .ok_or_else(|| IndependenceError::InvalidArgument("zero axis".into()))?;

    // Axis-parallel transversals are (k-1)-transversals of the projection along the axis.
    let frame = orthogonal_complement(d, std::slice::from_ref(&axis));
    let projected = Family::new(
        tuple
            .iter()
            .map(|m| {
                let parts = m
                    .parts()
                    .iter()
                    .map(|p| {
                        ClosedBall::new(
                            frame.iter().map(|w| dot(p.center(), w)).collect(),
                            p.radius(),
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(NearBall::new(parts, m.core_index(), m.is_open())?)
            })
            .collect::<Result<Vec<_>, IndependenceError>>()?,
    )?;
    if let Transversal::Yes { .. } = exists_transversal(&projected, k - 1, opts)? {
        return Err(IndependenceError::TupleHasAxisParallelTransversal);
    }

    let inst = Instance::new(&f);
    let scale = tuple.iter().map(|m| m.r_in()).fold(f64::INFINITY, f64::min);
    let feasible = |b: &[Vec<f64>]| {
        let e = evaluate_direction(&inst, b);
        let ok = inst.accepts(&e.flat, opts.tol_feas);
        (e, ok)
    };
    let mut best: Option<(f64, KFlat<f64>)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for r in 0..opts.restarts {
        let mut basis = seed_direction(&inst, k, &mut rng);
        if r % 4 == 3 {
            basis = crate::solver::random_direction(&mut rng, d, k);
        }
        for &lambda in &[1e1, 1e3, 1e5, 1e7] {
            let comp = orthogonal_complement(d, &basis);
            let obj = |a: &[f64]| match chart_point(&basis, &comp, a) {
                Some(b) => {
                    let s = evaluate_direction(&inst, &b).signed;
                    axis_angle(&b, &axis) + lambda / scale * s.max(0.0)
                }
                None => f64::INFINITY,
            };
            let res =
                simplex::nelder_mead(obj, &vec![0.0; comp.len() * k], 0.2, opts.max_iters, 1e-12);
            if let Some(b) = chart_point(&basis, &comp, &res.x) {
                basis = b;
            }
        }
        let (e, ok) = feasible(&basis);
        if ok {
            let ang = axis_angle(&basis, &axis);
            if best.as_ref().is_none_or(|(a, _)| ang < *a) {
                best = Some((ang, e.flat));
            }
        }
    }
    let (raw, flat) = best.ok_or_else(|| {
        IndependenceError::PreconditionViolated("no piercing flat found for the tuple".into())
    })?;
    if raw <= f64::GEO_TOL {
        return Err(IndependenceError::TupleHasAxisParallelTransversal);
    }
    Ok(Epsilon0 {
        raw,
        epsilon0: 0.5 * raw,
        flat: canonicalize_flat(flat.anchor(), flat.basis())?,
    })
}
