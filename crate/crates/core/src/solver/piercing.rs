//! Transversal decisions built on [`min_max_flat`](super::min_max_flat).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{member_ok, solve_instance, FlatSolution, Instance, SolveError, SolveOptions};
use crate::geometry::{canonicalize_flat, KFlat};
use crate::nearball::Family;
use crate::vector;

/// `m` flats and the flat each member is assigned to.
#[derive(Debug, Clone, PartialEq)]
pub struct TransversalCertificate {
    pub flats: Vec<KFlat<f64>>,
    pub assignment: Vec<usize>,
    /// Signed clearance of each member from its assigned flat.
    pub residuals: Vec<f64>,
}

impl TransversalCertificate {
    /// Builds the certificate from an assignment, computing residuals.
    pub fn from_assignment(
        f: &Family<f64>,
        flats: Vec<KFlat<f64>>,
        assignment: Vec<usize>,
    ) -> Self {
        let residuals = f
            .members()
            .iter()
            .zip(&assignment)
            .map(|(m, &j)| crate::nearball::clearance(&flats[j], m).expect("dims checked"))
            .collect();
        Self {
            flats,
            assignment,
            residuals,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transversal {
    Yes {
        solution: FlatSolution,
    },
    /// Nothing found within tolerance. `certified` only for exactly solved
    /// `k = 0` instances, where `lower_bound` proves infeasibility.
    No {
        best_value: f64,
        certified: bool,
        lower_bound: Option<f64>,
    },
}

impl Transversal {
    pub fn is_yes(&self) -> bool {
        matches!(self, Transversal::Yes { .. })
    }
}

fn lower_bound_rejects(lb: Option<f64>, open: bool, tol_feas: f64) -> bool {
    match lb {
        // An open family is infeasible as soon as no strict piercing exists.
        Some(lb) if open => lb >= -<f64 as crate::scalar::Scalar>::GEO_TOL,
        Some(lb) => lb > tol_feas,
        None => false,
    }
}

pub(crate) fn decide(
    inst: &Instance,
    k: usize,
    opts: &SolveOptions,
) -> Result<Transversal, SolveError> {
    let solution = solve_instance(inst, k, opts, Some(inst.target(opts.tol_feas)))?;
    if inst.accepts(&solution.flat, opts.tol_feas) {
        return Ok(Transversal::Yes { solution });
    }
    let open = inst.open.iter().any(|&o| o);
    let certified = lower_bound_rejects(solution.lower_bound, open, opts.tol_feas);
    Ok(Transversal::No {
        best_value: solution.value,
        certified,
        lower_bound: solution.lower_bound,
    })
}

/// Is there a single k-flat piercing every member?
pub fn exists_transversal(
    f: &Family<f64>,
    k: usize,
    opts: &SolveOptions,
) -> Result<Transversal, SolveError> {
    opts.validate()?;
    if k >= f.dim() {
        return Err(SolveError::InvalidK { k, d: f.dim() });
    }
    decide(&Instance::new(f), k, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PierceOutcome {
    Certificate {
        certificate: TransversalCertificate,
        exhaustive: bool,
    },
    /// `certified` when the exhaustive search proved that no partition works.
    Fail {
        best: f64,
        certified: bool,
        exhaustive: bool,
    },
}

impl PierceOutcome {
    pub fn certificate(&self) -> Option<&TransversalCertificate> {
        match self {
            PierceOutcome::Certificate { certificate, .. } => Some(certificate),
            PierceOutcome::Fail { .. } => None,
        }
    }
}

/// A flat of dimension `k` through `p`.
fn flat_through(p: &[f64], k: usize) -> KFlat<f64> {
    let spanning: Vec<Vec<f64>> = (0..k).map(|i| vector::unit(p.len(), i)).collect();
    canonicalize_flat(p, &spanning).expect("k < d")
}

/// Indices of distinct members and, for every member, its representative.
fn dedupe(f: &Family<f64>) -> (Vec<usize>, Vec<usize>) {
    let mut reps: Vec<usize> = Vec::new();
    let mut of = Vec::with_capacity(f.len());
    for (i, m) in f.members().iter().enumerate() {
        match reps.iter().position(|&r| &f.members()[r] == m) {
            Some(pos) => of.push(pos),
            None => {
                of.push(reps.len());
                reps.push(i);
            }
        }
    }
    (reps, of)
}

/// Largest number of distinct members for the exhaustive partition search.
pub const EXHAUSTIVE_MEMBERS: usize = 10;
/// Largest flat budget for the exhaustive partition search.
pub const EXHAUSTIVE_FLATS: usize = 3;

/// Pierce the family with at most `m` k-flats.
///
/// Identical members are merged first (a flat piercing one copy pierces all).
/// Up to [`EXHAUSTIVE_MEMBERS`] distinct members and [`EXHAUSTIVE_FLATS`]
/// flats every subset is solved once and all partitions are checked by a
/// subset DP; beyond that an alternating assign/refit search runs.
pub fn pierce_with_m_flats(
    f: &Family<f64>,
    k: usize,
    m: usize,
    opts: &SolveOptions,
) -> Result<PierceOutcome, SolveError> {
    opts.validate()?;
    if k >= f.dim() {
        return Err(SolveError::InvalidK { k, d: f.dim() });
    }
    if m == 0 {
        return Err(SolveError::InvalidOptions(
            "flat budget must be at least 1".into(),
        ));
    }
    let (reps, of) = dedupe(f);
    if m >= reps.len() {
        let flats: Vec<KFlat<f64>> = reps
            .iter()
            .map(|&r| flat_through(f.members()[r].center(), k))
            .collect();
        let certificate = TransversalCertificate::from_assignment(f, flats, of);
        return Ok(PierceOutcome::Certificate {
            certificate,
            exhaustive: true,
        });
    }
    if reps.len() <= EXHAUSTIVE_MEMBERS && m <= EXHAUSTIVE_FLATS {
        exhaustive(f, k, m, opts, &reps, &of)
    } else {
        alternating(f, k, m, opts, &reps, &of)
    }
}

fn exhaustive(
    f: &Family<f64>,
    k: usize,
    m: usize,
    opts: &SolveOptions,
    reps: &[usize],
    of: &[usize],
) -> Result<PierceOutcome, SolveError> {
    let u = reps.len();
    let full = (1usize << u) - 1;
    let open = f.is_open() || f.members().iter().any(|b| b.is_open());
    let solve_mask = |mask: usize| -> Result<(FlatSolution, bool), SolveError> {
        let idx: Vec<usize> = (0..u)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| reps[b])
            .collect();
        let inst = Instance::from_indices(f, &idx);
        let sol = solve_instance(
            &inst,
            k,
            &opts.with_seed(opts.seed ^ mask as u64),
            Some(inst.target(opts.tol_feas)),
        )?;
        let ok = inst.accepts(&sol.flat, opts.tol_feas);
        Ok((sol, ok))
    };
    if m == 1 {
        let (sol, ok) = solve_mask(full)?;
        if ok {
            let certificate =
                TransversalCertificate::from_assignment(f, vec![sol.flat], vec![0; f.len()]);
            return Ok(PierceOutcome::Certificate {
                certificate,
                exhaustive: true,
            });
        }
        let certified = lower_bound_rejects(sol.lower_bound, open, opts.tol_feas);
        return Ok(PierceOutcome::Fail {
            best: sol.signed.max(0.0),
            certified,
            exhaustive: true,
        });
    }
    let solved = if k == 0 {
        solve_all(full, &solve_mask)?
    } else {
        solve_by_levels(f, k, u, reps, opts, &solve_mask)?
    };

    // dp[j][mask]: best (value, lower bound) partition of mask into <= j blocks
    // with the choice of first block recorded for reconstruction.
    let inf = f64::INFINITY;
    let mut value = vec![vec![inf; full + 1]; m + 1];
    let mut lower = vec![vec![inf; full + 1]; m + 1];
    let mut feasible_choice = vec![vec![0usize; full + 1]; m + 1];
    let mut feasible = vec![vec![false; full + 1]; m + 1];
    for j in 0..=m {
        value[j][0] = f64::NEG_INFINITY;
        lower[j][0] = f64::NEG_INFINITY;
        feasible[j][0] = true;
    }
    let lb_of = |s: usize| -> f64 {
        let (sol, _) = solved[s].as_ref().expect("nonempty");
        match sol.lower_bound {
            Some(lb) if lower_bound_rejects(Some(lb), open, opts.tol_feas) => inf,
            _ => f64::NEG_INFINITY,
        }
    };
    for j in 1..=m {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // submasks of `rest`, each joined with the lowest bit
            let mut sub = rest;
            loop {
                let s = sub | low;
                let (sol, ok) = solved[s].as_ref().expect("nonempty");
                let other = mask ^ s;
                let v = sol.signed.max(value[j - 1][other]);
                if v < value[j][mask] {
                    value[j][mask] = v;
                }
                let l = lb_of(s).max(lower[j - 1][other]);
                if l < lower[j][mask] {
                    lower[j][mask] = l;
                }
                if *ok && feasible[j - 1][other] && !feasible[j][mask] {
                    feasible[j][mask] = true;
                    feasible_choice[j][mask] = s;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }
    if feasible[m][full] {
        let mut flats = Vec::new();
        let mut block_of_rep = vec![0usize; u];
        let mut mask = full;
        let mut j = m;
        while mask != 0 {
            let s = feasible_choice[j][mask];
            let (sol, _) = solved[s].as_ref().expect("nonempty");
            for b in 0..u {
                if s >> b & 1 == 1 {
                    block_of_rep[b] = flats.len();
                }
            }
            flats.push(sol.flat.clone());
            mask ^= s;
            j -= 1;
        }
        let assignment = of.iter().map(|&r| block_of_rep[r]).collect();
        let certificate = TransversalCertificate::from_assignment(f, flats, assignment);
        return Ok(PierceOutcome::Certificate {
            certificate,
            exhaustive: true,
        });
    }
    let certified = lower[m][full] == inf;
    Ok(PierceOutcome::Fail {
        best: value[m][full].max(0.0),
        certified,
        exhaustive: true,
    })
}

fn solve_all<F>(
    full: usize,
    solve_mask: &F,
) -> Result<Vec<Option<(FlatSolution, bool)>>, SolveError>
where
    F: Fn(usize) -> Result<(FlatSolution, bool), SolveError> + Sync,
{
    use rayon::prelude::*;
    (0..=full)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                Ok(None)
            } else {
                solve_mask(mask).map(Some)
            }
        })
        .collect()
}

/// Subsets in order of size, using that piercing is monotone: a set with an
/// unpierced subset is unpierced, and a flat that works for a subset is
/// tried on the set before optimizing. Derived entries keep an achieved
/// value but no lower bound.
fn solve_by_levels<F>(
    f: &Family<f64>,
    k: usize,
    u: usize,
    reps: &[usize],
    opts: &SolveOptions,
    solve_mask: &F,
) -> Result<Vec<Option<(FlatSolution, bool)>>, SolveError>
where
    F: Fn(usize) -> Result<(FlatSolution, bool), SolveError> + Sync,
{
    use rayon::prelude::*;
    let full = (1usize << u) - 1;
    let mut solved: Vec<Option<(FlatSolution, bool)>> = vec![None; full + 1];
    for size in 1..=u {
        let masks: Vec<usize> = (1..=full)
            .filter(|m| m.count_ones() as usize == size)
            .collect();
        let level = masks
            .par_iter()
            .map(|&mask| {
                let idx: Vec<usize> = (0..u)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| reps[b])
                    .collect();
                let inst = Instance::from_indices(f, &idx);
                let derive = |flat: &KFlat<f64>| {
                    let signed = inst
                        .clearances(flat)
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max);
                    let sol = FlatSolution {
                        flat: flat.clone(),
                        value: signed.max(0.0),
                        signed,
                        lower_bound: None,
                    };
                    let ok = inst.accepts(flat, opts.tol_feas);
                    (sol, ok)
                };
                if size <= k + 1 {
                    let pts: Vec<Vec<f64>> = idx
                        .iter()
                        .map(|&i| f.members()[i].center().to_vec())
                        .collect();
                    let cand = derive(&flat_through_points(&pts, k));
                    if cand.1 {
                        return Ok(cand);
                    }
                    return solve_mask(mask);
                }
                let subs: Vec<&(FlatSolution, bool)> = (0..u)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| solved[mask ^ (1 << b)].as_ref().expect("smaller level"))
                    .collect();
                if let Some(bad) = subs
                    .iter()
                    .filter(|s| !s.1)
                    .min_by(|a, b| a.0.signed.partial_cmp(&b.0.signed).unwrap())
                {
                    return Ok((derive(&bad.0.flat).0, false));
                }
                for s in &subs {
                    let cand = derive(&s.0.flat);
                    if cand.1 {
                        return Ok(cand);
                    }
                }
                solve_mask(mask)
            })
            .collect::<Result<Vec<_>, SolveError>>()?;
        for (mask, r) in masks.into_iter().zip(level) {
            solved[mask] = Some(r);
        }
    }
    Ok(solved)
}

/// A `k`-flat containing the given points (padded with axis directions when
/// they span less).
fn flat_through_points(pts: &[Vec<f64>], k: usize) -> KFlat<f64> {
    let d = pts[0].len();
    let mut spanning: Vec<Vec<f64>> = pts[1..].iter().map(|p| vector::sub(p, &pts[0])).collect();
    let base = canonicalize_flat(&pts[0], &spanning).expect("k < d");
    if base.dim_flat() < k {
        spanning = base.basis().to_vec();
        spanning.extend(
            vector::orthogonal_complement(d, base.basis())
                .into_iter()
                .take(k - base.dim_flat()),
        );
        return canonicalize_flat(&pts[0], &spanning).expect("k < d");
    }
    base
}

fn alternating(
    f: &Family<f64>,
    k: usize,
    m: usize,
    opts: &SolveOptions,
    reps: &[usize],
    of: &[usize],
) -> Result<PierceOutcome, SolveError> {
    use rand::seq::index::sample;
    let inst = Instance::from_indices(f, reps);
    let u = reps.len();
    let inner = SolveOptions {
        restarts: opts.restarts.div_ceil(4).max(2),
        ..opts.clone()
    };
    let mut best: Option<(f64, Vec<KFlat<f64>>, Vec<usize>)> = None;
    for start in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed
                .wrapping_add(start as u64)
                .wrapping_mul(0x2545_F491_4F6C_DD1D),
        );
        // seed flats through k+1 random cores each
        let mut flats: Vec<KFlat<f64>> = (0..m)
            .map(|_| {
                let take = (k + 1).min(u);
                let idx: Vec<usize> = sample(&mut rng, u, take).into_vec();
                let pts: Vec<Vec<f64>> = idx.iter().map(|&i| inst.cores[i].clone()).collect();
                let sub =
                    Instance::from_indices(f, &idx.iter().map(|&i| reps[i]).collect::<Vec<_>>());
                match solve_instance(&sub, k, &inner, Some(sub.target(opts.tol_feas))) {
                    Ok(s) => s.flat,
                    Err(_) => flat_through(&pts[0], k),
                }
            })
            .collect();
        let mut assign: Vec<usize> = Vec::new();
        for _iter in 0..20 {
            let clear: Vec<Vec<f64>> = flats.iter().map(|fl| inst.clearances(fl)).collect();
            let new_assign: Vec<usize> = (0..u)
                .map(|i| {
                    (0..m)
                        .min_by(|&a, &b| clear[a][i].partial_cmp(&clear[b][i]).unwrap())
                        .unwrap()
                })
                .collect();
            if new_assign == assign {
                break;
            }
            assign = new_assign;
            for (j, flat) in flats.iter_mut().enumerate() {
                let idx: Vec<usize> = (0..u)
                    .filter(|&i| assign[i] == j)
                    .map(|i| reps[i])
                    .collect();
                if idx.is_empty() {
                    continue;
                }
                let sub = Instance::from_indices(f, &idx);
                *flat = solve_instance(&sub, k, &inner, Some(sub.target(opts.tol_feas)))?.flat;
            }
        }
        let clear: Vec<Vec<f64>> = flats.iter().map(|fl| inst.clearances(fl)).collect();
        assign = (0..u)
            .map(|i| {
                (0..m)
                    .min_by(|&a, &b| clear[a][i].partial_cmp(&clear[b][i]).unwrap())
                    .unwrap()
            })
            .collect();
        let worst = (0..u)
            .map(|i| clear[assign[i]][i])
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = (0..u).all(|i| member_ok(clear[assign[i]][i], inst.open[i], opts.tol_feas));
        if ok {
            let assignment = of.iter().map(|&r| assign[r]).collect();
            let certificate = TransversalCertificate::from_assignment(f, flats, assignment);
            return Ok(PierceOutcome::Certificate {
                certificate,
                exhaustive: false,
            });
        }
        if best.as_ref().map(|(b, _, _)| worst < *b).unwrap_or(true) {
            best = Some((worst, flats, assign));
        }
    }
    let best = best.map(|b| b.0).unwrap_or(f64::INFINITY);
    Ok(PierceOutcome::Fail {
        best: best.max(0.0),
        certified: false,
        exhaustive: false,
    })
}

/// Greedy upper bound on the piercing number.
///
/// Each round first tries a single flat through all remaining members, then
/// samples flats through `k+1` random remaining cores, grows the best ones by
/// refitting with one more member at a time, and removes what the chosen
/// flat pierces.
pub fn greedy_piercing_upper(
    f: &Family<f64>,
    k: usize,
    opts: &SolveOptions,
) -> Result<(usize, TransversalCertificate), SolveError> {
    opts.validate()?;
    if k >= f.dim() {
        return Err(SolveError::InvalidK { k, d: f.dim() });
    }
    let (reps, of) = dedupe(f);
    let all = Instance::from_indices(f, &reps);
    let mut remaining: Vec<usize> = (0..reps.len()).collect();
    let mut flats: Vec<KFlat<f64>> = Vec::new();
    let mut block = vec![usize::MAX; reps.len()];
    let inner = SolveOptions {
        restarts: opts.restarts.div_ceil(2).max(2),
        ..opts.clone()
    };
    let mut round = 0u64;
    while !remaining.is_empty() {
        round += 1;
        let sub_of = |idx: &[usize]| {
            Instance::from_indices(f, &idx.iter().map(|&i| reps[i]).collect::<Vec<_>>())
        };
        let rem_inst = sub_of(&remaining);
        let whole = solve_instance(
            &rem_inst,
            k,
            &opts.with_seed(opts.seed ^ round),
            Some(rem_inst.target(opts.tol_feas)),
        )?;
        let pierced_by = |flat: &KFlat<f64>| -> Vec<usize> {
            let c = all.clearances(flat);
            remaining
                .iter()
                .copied()
                .filter(|&i| member_ok(c[i], all.open[i], opts.tol_feas))
                .collect()
        };
        let mut chosen = (pierced_by(&whole.flat), whole.flat.clone());
        if chosen.0.len() < remaining.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(31).wrapping_add(round));
            let mut candidates: Vec<(Vec<usize>, KFlat<f64>)> = Vec::new();
            for _ in 0..opts.restarts {
                let take = (k + 1).min(remaining.len());
                let pick: Vec<usize> = rand::seq::index::sample(&mut rng, remaining.len(), take)
                    .into_vec()
                    .into_iter()
                    .map(|i| remaining[i])
                    .collect();
                let sub = sub_of(&pick);
                let sol = solve_instance(&sub, k, &inner, Some(sub.target(opts.tol_feas)))?;
                candidates.push((pierced_by(&sol.flat), sol.flat));
            }
            candidates.push(chosen.clone());
            candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
            candidates.truncate(2);
            for (mut set, mut flat) in candidates {
                if set.is_empty() {
                    continue;
                }
                let clear = all.clearances(&flat);
                let mut order: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|i| !set.contains(i))
                    .collect();
                order.sort_by(|&a, &b| clear[a].partial_cmp(&clear[b]).unwrap().then(a.cmp(&b)));
                for j in order {
                    if set.contains(&j) {
                        continue;
                    }
                    let mut trial = set.clone();
                    trial.push(j);
                    let sub = sub_of(&trial);
                    let sol = solve_instance(&sub, k, &inner, Some(sub.target(opts.tol_feas)))?;
                    if sub.accepts(&sol.flat, opts.tol_feas) {
                        flat = sol.flat;
                        let grown = pierced_by(&flat);
                        set = if grown.len() >= trial.len() {
                            grown
                        } else {
                            trial
                        };
                    }
                }
                if set.len() > chosen.0.len() {
                    chosen = (set, flat);
                }
            }
        }
        if chosen.0.is_empty() {
            // Always progress: a flat through the first remaining core.
            let i = remaining[0];
            chosen = (vec![i], flat_through(&all.cores[i], k));
        }
        for &i in &chosen.0 {
            block[i] = flats.len();
        }
        flats.push(chosen.1);
        remaining.retain(|i| !chosen.0.contains(i));
    }
    let assignment = of.iter().map(|&r| block[r]).collect();
    let certificate = TransversalCertificate::from_assignment(f, flats, assignment);
    Ok((certificate.flats.len(), certificate))
}
