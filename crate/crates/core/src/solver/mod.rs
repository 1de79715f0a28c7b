//! Minimax search for k-flat transversals.
//!
//! A flat is written as `(c, V)` with `V` an orthonormal direction basis and
//! `c` orthogonal to `V`. For a fixed direction the best anchor is a point
//! minimax problem in the orthogonal complement of `V`, which is convex for
//! single-ball members and is solved exactly by [`minimax`]. The outer search
//! over directions is a multi-start Nelder-Mead descent on the local chart
//! `V + W A` (W spans the complement) followed by re-orthonormalization.
//!
//! The objective is the signed clearance `max_i min_parts (dist(center, J) - r)`;
//! the reported value is its positive part.

pub mod minimax;
mod piercing;
pub mod simplex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{canonicalize_flat, GeometryError, KFlat};
use crate::nearball::{clearance_pierces, Family};
use crate::scalar::Scalar;
use crate::vector::{self, dot, lex_cmp, orthogonal_complement};

pub use piercing::{
    exists_transversal, greedy_piercing_upper, pierce_with_m_flats, PierceOutcome, Transversal,
    TransversalCertificate,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("flat dimension {k} is not below the ambient dimension {d}")]
    InvalidK { k: usize, d: usize },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    Auto,
    /// Exact convex minimax; only for `k = 0`.
    ConvexK0,
    MultistartDescent,
    /// Brute-force direction grid with exact inner solves (`d <= 3`, at most 8 members).
    GridOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub restarts: usize,
    /// Evaluation budget of one local descent.
    pub max_iters: usize,
    pub tol_feas: f64,
    pub seed: u64,
    pub method: Method,
    /// Angular step of the grid oracle; `None` picks 1e-3 in the plane and
    /// 1e-2 on the 2-sphere.
    pub grid_step: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 400,
            tol_feas: 1e-7,
            seed: 0,
            method: Method::Auto,
            grid_step: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.restarts == 0 {
            return Err(SolveError::InvalidOptions(
                "restarts must be at least 1".into(),
            ));
        }
        if !(self.tol_feas > 0.0) {
            return Err(SolveError::InvalidOptions(
                "tol_feas must be positive".into(),
            ));
        }
        if let Some(s) = self.grid_step {
            if !(s > 0.0) {
                return Err(SolveError::InvalidOptions(
                    "grid_step must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        Self {
            method,
            ..self.clone()
        }
    }
}

/// Best flat found by [`min_max_flat`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSolution {
    pub flat: KFlat<f64>,
    /// `max(0, signed)`.
    pub value: f64,
    /// Signed clearance of the worst member.
    pub signed: f64,
    /// Certified lower bound on the optimal signed clearance, when one exists.
    pub lower_bound: Option<f64>,
}

impl FlatSolution {
    pub fn certified(&self) -> bool {
        self.lower_bound.is_some()
    }
}

/// Member geometry in solver form.
#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub dim: usize,
    pub members: Vec<Vec<(Vec<f64>, f64)>>,
    pub open: Vec<bool>,
    pub cores: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(f: &Family<f64>) -> Self {
        Self::from_indices(f, &(0..f.len()).collect::<Vec<_>>())
    }

    pub fn from_indices(f: &Family<f64>, idx: &[usize]) -> Self {
        let ms = f.members();
        Self {
            dim: f.dim(),
            members: idx
                .iter()
                .map(|&i| {
                    ms[i]
                        .parts()
                        .iter()
                        .map(|p| (p.center().to_vec(), p.radius()))
                        .collect()
                })
                .collect(),
            open: idx.iter().map(|&i| ms[i].is_open()).collect(),
            cores: idx.iter().map(|&i| ms[i].center().to_vec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Signed clearance of each member from `flat`.
    pub fn clearances(&self, flat: &KFlat<f64>) -> Vec<f64> {
        self.members
            .iter()
            .map(|parts| {
                parts
                    .iter()
                    .map(|(c, r)| {
                        crate::geometry::dist_point_flat(c, flat).expect("dims checked") - r
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Whether `flat` pierces every member at the given tolerance.
    pub fn accepts(&self, flat: &KFlat<f64>, tol_feas: f64) -> bool {
        self.clearances(flat)
            .iter()
            .zip(&self.open)
            .all(|(&c, &open)| member_ok(c, open, tol_feas))
    }

    /// The target signed value below which a search may stop early.
    pub fn target(&self, tol_feas: f64) -> f64 {
        if self.open.iter().any(|&o| o) {
            -4.0 * <f64 as Scalar>::GEO_TOL
        } else {
            0.5 * tol_feas
        }
    }
}

/// Closed members need clearance within `tol_feas`; open ones need strict
/// penetration past `GEO_TOL`.
pub fn member_ok(clearance: f64, open: bool, tol_feas: f64) -> bool {
    if open {
        clearance_pierces(clearance, true)
    } else {
        clearance <= tol_feas
    }
}

/// Evaluation of one direction: exact best anchor for it.
#[derive(Debug, Clone)]
pub(crate) struct DirectionEval {
    pub signed: f64,
    pub flat: KFlat<f64>,
    pub lower_bound: Option<f64>,
}

pub(crate) fn evaluate_direction(inst: &Instance, basis: &[Vec<f64>]) -> DirectionEval {
    let comp = orthogonal_complement(inst.dim, basis);
    let projected: Vec<Vec<(Vec<f64>, f64)>> = inst
        .members
        .iter()
        .map(|parts| {
            parts
                .iter()
                .map(|(c, r)| (comp.iter().map(|w| dot(c, w)).collect(), *r))
                .collect()
        })
        .collect();
    let views: Vec<Vec<(&[f64], f64)>> = projected
        .iter()
        .map(|parts| parts.iter().map(|(c, r)| (c.as_slice(), *r)).collect())
        .collect();
    let sol = minimax::minimax_unions_with(&views, basis.is_empty());
    let mut anchor = vec![0.0; inst.dim];
    for (q, w) in sol.point.iter().zip(&comp) {
        vector::axpy(&mut anchor, *q, w);
    }
    let flat = canonicalize_flat(&anchor, basis).expect("orthonormal basis of rank k < d");
    // Re-evaluate in the ambient space so reported values match the kernel.
    let signed = inst
        .clearances(&flat)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    DirectionEval {
        signed,
        flat,
        lower_bound: sol.lower_bound,
    }
}

/// `V + W A`, re-orthonormalized. `a` is row-major `(d-k) x k`.
pub(crate) fn chart_point(
    basis: &[Vec<f64>],
    comp: &[Vec<f64>],
    a: &[f64],
) -> Option<Vec<Vec<f64>>> {
    let k = basis.len();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut v = basis[i].clone();
            for (j, w) in comp.iter().enumerate() {
                vector::axpy(&mut v, a[j * k + i], w);
            }
            v
        })
        .collect();
    let d = basis.first().map(|v| v.len())?;
    let f = canonicalize_flat(&vec![0.0; d], &cols).ok()?;
    (f.dim_flat() == k).then(|| f.basis().to_vec())
}

pub(crate) fn random_direction(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<Vec<f64>> {
    loop {
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        if let Ok(f) = canonicalize_flat(&vec![0.0; d], &cols) {
            if f.dim_flat() == k {
                return f.basis().to_vec();
            }
        }
    }
}

/// Direction of the affine hull of `k+1` random member cores, completed
/// with random directions when the hull is degenerate.
pub(crate) fn seed_direction(inst: &Instance, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = inst.len();
    if n >= 2 {
        let take = (k + 1).min(n);
        let idx = rand::seq::index::sample(rng, n, take).into_vec();
        let base = &inst.cores[idx[0]];
        let mut cols: Vec<Vec<f64>> = idx[1..]
            .iter()
            .map(|&i| vector::sub(&inst.cores[i], base))
            .collect();
        let extra = random_direction(rng, inst.dim, k);
        cols.extend(extra);
        if let Ok(f) = canonicalize_flat(&vec![0.0; inst.dim], &cols[..]) {
            if f.dim_flat() >= k {
                return f.basis()[..k].to_vec();
            }
        }
        // rank exceeded: truncate pivoted basis
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for c in cols {
            let r = vector::residual(&c, &basis);
            if let Some(u) = vector::normalized(&r) {
                if vector::norm(&r) > 1e-8 * vector::norm(&c).max(1e-300) {
                    basis.push(u);
                }
            }
            if basis.len() == k {
                return basis;
            }
        }
    }
    random_direction(rng, inst.dim, k)
}

fn better(a: &DirectionEval, b: &DirectionEval) -> bool {
    match a.signed.partial_cmp(&b.signed) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Greater) => false,
        _ => lex_cmp(a.flat.anchor(), b.flat.anchor()) == std::cmp::Ordering::Less,
    }
}

/// Local descent on the direction chart, re-centred after every run.
pub(crate) fn descend(
    inst: &Instance,
    start: Vec<Vec<f64>>,
    max_evals: usize,
    step0: f64,
    stop: Option<f64>,
) -> DirectionEval {
    let k = start.len();
    let mut best = evaluate_direction(inst, &start);
    let mut basis = start;
    let mut step = step0;
    for _round in 0..8 {
        if stop.is_some_and(|t| best.signed <= t) {
            break;
        }
        let comp = orthogonal_complement(inst.dim, &basis);
        let nparams = comp.len() * k;
        let objective = |a: &[f64]| match chart_point(&basis, &comp, a) {
            Some(b) => evaluate_direction(inst, &b).signed,
            None => f64::INFINITY,
        };
        let res = simplex::nelder_mead(objective, &vec![0.0; nparams], step, max_evals, 1e-13);
        let Some(nb) = chart_point(&basis, &comp, &res.x) else {
            break;
        };
        let cand = evaluate_direction(inst, &nb);
        let gain = best.signed - cand.signed;
        if better(&cand, &best) {
            best = cand;
            basis = nb;
        }
        if gain <= 1e-13 {
            if step <= 1e-6 {
                break;
            }
            step *= 0.01;
        } else {
            step = (step * 0.5).max(1e-6);
        }
    }
    best
}

/// Restarts are processed in fixed-size chunks so early stopping is
/// deterministic regardless of thread count.
const RESTART_CHUNK: usize = 8;

fn multistart(
    inst: &Instance,
    k: usize,
    opts: &SolveOptions,
    target: Option<f64>,
) -> DirectionEval {
    let mut best: Option<DirectionEval> = None;
    let starts: Vec<usize> = (0..opts.restarts).collect();
    for chunk in starts.chunks(RESTART_CHUNK) {
        let results: Vec<DirectionEval> = chunk
            .par_iter()
            .map(|&r| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    opts.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1)),
                );
                let start = if r % 4 == 3 {
                    random_direction(&mut rng, inst.dim, k)
                } else {
                    seed_direction(inst, k, &mut rng)
                };
                descend(inst, start, opts.max_iters, 0.4, target)
            })
            .collect();
        for r in results {
            if best.as_ref().map(|b| better(&r, b)).unwrap_or(true) {
                best = Some(r);
            }
        }
        if let (Some(t), Some(b)) = (target, best.as_ref()) {
            if b.signed <= t {
                break;
            }
        }
    }
    best.expect("at least one restart")
}

fn check_k(f: &Family<f64>, k: usize) -> Result<(), SolveError> {
    if k >= f.dim() {
        Err(SolveError::InvalidK { k, d: f.dim() })
    } else {
        Ok(())
    }
}

/// Flat minimizing the worst member clearance.
pub fn min_max_flat(
    f: &Family<f64>,
    k: usize,
    opts: &SolveOptions,
) -> Result<FlatSolution, SolveError> {
    min_max_flat_with_target(f, k, opts, None)
}

/// As [`min_max_flat`], stopping once the signed value reaches `target`.
pub fn min_max_flat_with_target(
    f: &Family<f64>,
    k: usize,
    opts: &SolveOptions,
    target: Option<f64>,
) -> Result<FlatSolution, SolveError> {
    opts.validate()?;
    check_k(f, k)?;
    let inst = Instance::new(f);
    solve_instance(&inst, k, opts, target)
}

pub(crate) fn solve_instance(
    inst: &Instance,
    k: usize,
    opts: &SolveOptions,
    target: Option<f64>,
) -> Result<FlatSolution, SolveError> {
    let method = match opts.method {
        Method::Auto if k == 0 => Method::ConvexK0,
        Method::Auto => Method::MultistartDescent,
        m => m,
    };
    let eval = match method {
        Method::ConvexK0 => {
            if k != 0 {
                return Err(SolveError::InvalidOptions(
                    "convex_k0 requires k = 0".into(),
                ));
            }
            evaluate_direction(inst, &[])
        }
        Method::MultistartDescent => {
            if k == 0 {
                evaluate_direction(inst, &[])
            } else {
                multistart(inst, k, opts, target)
            }
        }
        Method::GridOracle => grid_oracle(inst, k, opts)?,
        Method::Auto => unreachable!(),
    };
    let lower_bound = if k == 0 { eval.lower_bound } else { None };
    Ok(FlatSolution {
        value: eval.signed.max(0.0),
        signed: eval.signed,
        flat: eval.flat,
        lower_bound,
    })
}

/// Brute-force reference: every direction on a grid, each with its exact
/// best anchor, then a short local refinement of the best grid cells.
fn grid_oracle(
    inst: &Instance,
    k: usize,
    opts: &SolveOptions,
) -> Result<DirectionEval, SolveError> {
    let d = inst.dim;
    if d > 3 || inst.len() > 8 {
        return Err(SolveError::InvalidOptions(
            "grid_oracle needs d <= 3 and at most 8 members".into(),
        ));
    }
    if k == 0 {
        return Ok(point_grid(inst));
    }
    let step = opts.grid_step.unwrap_or(if d == 2 { 1e-3 } else { 1e-2 });
    // Grid over unit vectors u: the line direction for k = 1, the normal for k = d - 1.
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if d == 2 {
        let n = (std::f64::consts::PI / step).ceil() as usize;
        for i in 0..n {
            let t = i as f64 * std::f64::consts::PI / n as f64;
            dirs.push(vec![t.cos(), t.sin()]);
        }
    } else {
        let rings = (std::f64::consts::FRAC_PI_2 / step).ceil() as usize;
        for i in 0..=rings {
            let theta = i as f64 * std::f64::consts::FRAC_PI_2 / rings as f64;
            let count = ((2.0 * std::f64::consts::PI * theta.sin() / step).ceil() as usize).max(1);
            for j in 0..count {
                let phi = j as f64 * 2.0 * std::f64::consts::PI / count as f64;
                dirs.push(vec![
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]);
            }
        }
    }
    let to_basis = |u: &Vec<f64>| -> Vec<Vec<f64>> {
        if k == 1 {
            vec![u.clone()]
        } else {
            orthogonal_complement(d, std::slice::from_ref(u))
        }
    };
    let mut evals: Vec<(usize, DirectionEval)> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, u)| (i, evaluate_direction(inst, &to_basis(u))))
        .collect();
    evals.sort_by(|a, b| {
        a.1.signed
            .partial_cmp(&b.1.signed)
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let mut best = evals[0].1.clone();
    for (_, e) in evals.iter().take(3) {
        let refined = descend(inst, e.flat.basis().to_vec(), 200, step, None);
        if better(&refined, &best) {
            best = refined;
        }
    }
    Ok(best)
}

/// Zooming grid search over points, for `k = 0`.
fn point_grid(inst: &Instance) -> DirectionEval {
    let d = inst.dim;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for parts in &inst.members {
        for (c, r) in parts {
            for j in 0..d {
                lo[j] = lo[j].min(c[j] - r);
                hi[j] = hi[j].max(c[j] + r);
            }
        }
    }
    let eval = |p: &[f64]| {
        inst.members
            .iter()
            .map(|parts| {
                parts
                    .iter()
                    .map(|(c, r)| vector::dist(p, c) - r)
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let per_axis: usize = match d {
        1 => 2001,
        2 => 201,
        _ => 41,
    };
    let mut center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut half: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| 0.5 * (b - a).max(1e-12))
        .collect();
    let mut best = (eval(&center), center.clone());
    for _level in 0..40 {
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let p: Vec<f64> = (0..d)
                .map(|j| {
                    let t = rem % per_axis;
                    rem /= per_axis;
                    center[j] - half[j] + 2.0 * half[j] * t as f64 / (per_axis - 1) as f64
                })
                .collect();
            let v = eval(&p);
            if v < best.0 {
                best = (v, p);
            }
        }
        center = best.1.clone();
        for h in half.iter_mut() {
            *h *= 4.0 / (per_axis - 1) as f64;
        }
    }
    let flat = KFlat::point(best.1);
    DirectionEval {
        signed: best.0,
        flat,
        lower_bound: None,
    }
}
