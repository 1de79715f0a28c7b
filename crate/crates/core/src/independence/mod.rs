//! k-independence: certification, greedy extraction, the two projection
//! reductions and Monte-Carlo checks of the cone estimates.

mod claims;
mod projection;
mod strong;

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{GeometryError, KFlat};
use crate::nearball::{Family, NearBallError};
use crate::solver::{exists_transversal, SolveError, SolveOptions, Transversal};

pub use claims::{
    epsilon0_for_tuple, verify_claim_cone, verify_claim_ktok, verify_claim_wide_cone,
    wide_cone_angles, ClaimReport, ConeClaimParams, Epsilon0, KtoKParams, WideConeParams,
};
pub use projection::{
    central_project_family, central_project_flat, central_project_point, orthogonal_project_family,
    tangent_frame, TAU_PROJ,
};
pub use strong::{find_strong_point_proxy, StrongPointReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndependenceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sequence exhausted with {} accepted members", accepted.len())]
    SequenceExhausted {
        accepted: Vec<usize>,
        witness: Box<IndependenceWitness>,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("the tuple has a transversal parallel to the axis")]
    TupleHasAxisParallelTransversal,
    #[error("counterexample found: {0}")]
    CounterexampleFound(String),
    #[error("internal assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    NearBall(#[from] NearBallError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceOptions {
    pub solver: SolveOptions,
    /// A subset counts as not pierceable only when the best value exceeds
    /// this, or when the solver certifies infeasibility.
    pub tol_indep: f64,
}

impl Default for IndependenceOptions {
    fn default() -> Self {
        Self {
            solver: SolveOptions::default(),
            tol_indep: 1e-4,
        }
    }
}

impl IndependenceOptions {
    pub fn validate(&self) -> Result<(), IndependenceError> {
        self.solver.validate()?;
        if !(self.tol_indep > self.solver.tol_feas) {
            return Err(IndependenceError::InvalidArgument(
                "tol_indep must exceed tol_feas".into(),
            ));
        }
        Ok(())
    }
}

/// Why one subset is not pierced.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEvidence {
    /// Indices into the witnessed member list.
    pub subset: Vec<usize>,
    pub best_value: f64,
    /// Proven infeasible (exact `k = 0` solve), not just above `tol_indep`.
    pub certified: bool,
}

/// The clause for families smaller than `k + 2`: no `(n-2)`-flat meets all.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCheck {
    pub flat_dim: usize,
    pub best_value: f64,
    pub certified: bool,
    /// A flat of that dimension meets every member.
    pub pierced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceWitness {
    pub member_indices: Vec<usize>,
    pub k: usize,
    pub tol_indep: f64,
    pub evidence: Vec<SubsetEvidence>,
    pub affine_check: Option<AffineCheck>,
}

impl IndependenceWitness {
    /// Every piece of evidence is a certified infeasibility proof.
    pub fn certified(&self) -> bool {
        self.evidence.iter().all(|e| e.certified)
            && self.affine_check.as_ref().is_none_or(|a| a.certified)
    }

    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Independence {
    Witness(IndependenceWitness),
    /// A flat piercing every member of `subset`.
    Violation {
        subset: Vec<usize>,
        flat: KFlat<f64>,
    },
    /// Nothing pierces `subset` within `tol_feas`, but the best value does
    /// not clear `tol_indep` either.
    Inconclusive {
        subset: Vec<usize>,
        best_value: f64,
    },
}

enum Verdict {
    Pierced(KFlat<f64>),
    Separated(SubsetEvidence),
    Unclear(f64),
}

fn judge(
    f: &Family<f64>,
    subset: &[usize],
    k: usize,
    opts: &IndependenceOptions,
    salt: u64,
) -> Result<Verdict, IndependenceError> {
    let sub = f.subfamily(subset)?;
    let solver = opts.solver.with_seed(opts.solver.seed.wrapping_add(salt));
    Ok(match exists_transversal(&sub, k, &solver)? {
        Transversal::Yes { solution } => Verdict::Pierced(solution.flat),
        Transversal::No {
            best_value,
            certified,
            ..
        } => {
            if certified || best_value > opts.tol_indep {
                Verdict::Separated(SubsetEvidence {
                    subset: subset.to_vec(),
                    best_value,
                    certified,
                })
            } else {
                Verdict::Unclear(best_value)
            }
        }
    })
}

/// Seed salt that depends only on the member geometry of a subset, so the
/// same subset is judged identically wherever it appears.
fn salt(f: &Family<f64>, subset: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in subset {
        for p in f.members()[i].parts() {
            for x in p.center().iter().chain(std::iter::once(&p.radius())) {
                h = (h ^ x.to_bits()).wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// No k-flat pierces `k + 2` members (and, for fewer members, no
/// `(n-2)`-flat pierces all of them).
///
/// Subsets are checked in lexicographic order; the first piercing subset is
/// reported. Witnesses for `k >= 1` rest on the heuristic search unless every
/// subset is certified.
pub fn is_k_independent(
    f: &Family<f64>,
    k: usize,
    opts: &IndependenceOptions,
) -> Result<Independence, IndependenceError> {
    opts.validate()?;
    if k >= f.dim() {
        return Err(SolveError::InvalidK { k, d: f.dim() }.into());
    }
    let n = f.len();
    let all: Vec<usize> = (0..n).collect();
    if n < k + 2 {
        let mut affine_check = None;
        if n >= 2 {
            let flat_dim = n - 2;
            match judge(f, &all, flat_dim, opts, salt(f, &all))? {
                Verdict::Pierced(flat) => return Ok(Independence::Violation { subset: all, flat }),
                Verdict::Unclear(best_value) => {
                    return Ok(Independence::Inconclusive {
                        subset: all,
                        best_value,
                    })
                }
                Verdict::Separated(e) => {
                    affine_check = Some(AffineCheck {
                        flat_dim,
                        best_value: e.best_value,
                        certified: e.certified,
                        pierced: false,
                    })
                }
            }
        }
        let witness = IndependenceWitness {
            member_indices: all,
            k,
            tol_indep: opts.tol_indep,
            evidence: vec![],
            affine_check,
        };
        return Ok(Independence::Witness(witness));
    }
    let subsets: Vec<Vec<usize>> = all.iter().copied().combinations(k + 2).collect();
    let verdicts = subsets
        .par_iter()
        .map(|s| judge(f, s, k, opts, salt(f, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut evidence = Vec::with_capacity(subsets.len());
    for (s, v) in subsets.into_iter().zip(verdicts) {
        match v {
            Verdict::Pierced(flat) => return Ok(Independence::Violation { subset: s, flat }),
            Verdict::Unclear(best_value) => {
                return Ok(Independence::Inconclusive {
                    subset: s,
                    best_value,
                })
            }
            Verdict::Separated(e) => evidence.push(e),
        }
    }
    Ok(Independence::Witness(IndependenceWitness {
        member_indices: all,
        k,
        tol_indep: opts.tol_indep,
        evidence,
        affine_check: None,
    }))
}

/// Greedy k-independent subsequence of an ordered sequence.
///
/// The first `k + 1` members are taken as they come. A later member is
/// accepted when no k-flat pierces it together with any `k + 1` accepted
/// members. Evidence indices refer to positions in the returned member list.
pub fn greedy_independent_subsequence(
    seq: &Family<f64>,
    k: usize,
    target_len: usize,
    opts: &IndependenceOptions,
) -> Result<IndependenceWitness, IndependenceError> {
    opts.validate()?;
    if k >= seq.dim() {
        return Err(SolveError::InvalidK { k, d: seq.dim() }.into());
    }
    if target_len < k + 2 {
        return Err(IndependenceError::InvalidArgument(
            "target_len must be at least k + 2".into(),
        ));
    }
    let mut accepted: Vec<usize> = Vec::new();
    let mut evidence: Vec<SubsetEvidence> = Vec::new();
    for cand in 0..seq.len() {
        if accepted.len() == target_len {
            break;
        }
        if accepted.len() < k + 1 {
            accepted.push(cand);
            continue;
        }
        let tuples: Vec<Vec<usize>> = (0..accepted.len()).combinations(k + 1).collect();
        let mut found = Vec::with_capacity(tuples.len());
        let mut ok = true;
        // Chunks keep the early exit deterministic.
        for chunk in tuples.chunks(32) {
            let verdicts = chunk
                .par_iter()
                .map(|t| {
                    let global: Vec<usize> = t
                        .iter()
                        .map(|&p| accepted[p])
                        .chain(std::iter::once(cand))
                        .collect();
                    judge(seq, &global, k, opts, salt(seq, &global)).map(|v| (t, v))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (t, v) in verdicts {
                match v {
                    Verdict::Separated(e) => {
                        let local: Vec<usize> = t
                            .iter()
                            .copied()
                            .chain(std::iter::once(accepted.len()))
                            .collect();
                        found.push(SubsetEvidence { subset: local, ..e });
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            evidence.extend(found);
            accepted.push(cand);
        }
    }
    let witness = IndependenceWitness {
        member_indices: accepted.clone(),
        k,
        tol_indep: opts.tol_indep,
        evidence: sort_evidence(evidence),
        affine_check: None,
    };
    if accepted.len() < target_len {
        return Err(IndependenceError::SequenceExhausted {
            accepted,
            witness: Box::new(witness),
        });
    }
    Ok(witness)
}

fn sort_evidence(mut e: Vec<SubsetEvidence>) -> Vec<SubsetEvidence> {
    for x in e.iter_mut() {
        x.subset.sort_unstable();
    }
    e.sort_by(|a, b| a.subset.cmp(&b.subset));
    e
}
