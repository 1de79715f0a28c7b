use itertools::Itertools;

use super::{
    CertificateDocument, FamilyDocument, IndependencePayload, IoError, Payload, TransversalPayload,
};
use crate::geometry::KFlat;
use crate::nearball::{clearance, Family};
use crate::solver::member_ok;

/// Re-checks a certificate against a family with kernel primitives only.
///
/// Transversal certificates: every member is assigned, every recorded
/// residual matches the recomputed clearance and passes `tol_feas`.
/// Independence witnesses: the evidence covers every `(k+2)`-subset and no
/// flat through member cores pierces a subset claimed unpierceable.
/// Reports carry nothing to recheck and are accepted when well formed.
pub fn verify_certificate(
    family: &FamilyDocument,
    cert: &CertificateDocument,
) -> Result<bool, IoError> {
    let f = family.to_family()?;
    let tol_feas = cert.solver_provenance.tolerances.tol_feas;
    Ok(match &cert.payload {
        Payload::Transversal(t) => {
            check_dims(&f, t.flats.iter().map(|fl| fl.anchor.len()))?;
            transversal_holds(&f, t, tol_feas)
        }
        Payload::Independence(w) => independence_holds(&f, w, tol_feas),
        Payload::Report(r) => !r.name.is_empty() && !r.outcome.is_empty(),
    })
}

fn check_dims(f: &Family<f64>, dims: impl Iterator<Item = usize>) -> Result<(), IoError> {
    for d in dims {
        if d != f.dim() {
            return Err(IoError::Schema(format!(
                "flat lives in dimension {d}, family in {}",
                f.dim()
            )));
        }
    }
    Ok(())
}

fn transversal_holds(f: &Family<f64>, t: &TransversalPayload, tol_feas: f64) -> bool {
    if t.flats.is_empty() || t.assignment.len() != f.len() || t.residuals.len() != f.len() {
        return false;
    }
    let Ok(flats) = t
        .flats
        .iter()
        .map(|d| d.to_flat())
        .collect::<Result<Vec<_>, _>>()
    else {
        return false;
    };
    if flats.iter().any(|fl| fl.dim_flat() != t.k) {
        return false;
    }
    f.members()
        .iter()
        .zip(&t.assignment)
        .zip(&t.residuals)
        .all(|((m, &j), &r)| {
            let Some(flat) = flats.get(j) else {
                return false;
            };
            let c = clearance(flat, m).expect("dims checked");
            (c - r).abs() <= 1e-9 * (1.0 + c.abs()) && member_ok(c, m.is_open(), tol_feas)
        })
}

/// Smallest max-clearance over flats spanned by at most `k + 1` member
/// cores of `idx`; an upper bound on the true optimum.
fn core_flat_value(f: &Family<f64>, idx: &[usize], k: usize, tol_feas: f64) -> (f64, bool) {
    let mut best = f64::INFINITY;
    let mut pierced = false;
    for r in 1..=(k + 1).min(idx.len()) {
        for pick in idx.iter().combinations(r) {
            let pts: Vec<Vec<f64>> = pick
                .iter()
                .map(|&&i| f.members()[i].center().to_vec())
                .collect();
            let Ok(flat) = KFlat::through_points(&pts) else {
                continue;
            };
            if flat.dim_flat() > k {
                continue;
            }
            let cs: Vec<(f64, bool)> = idx
                .iter()
                .map(|&i| {
                    (
                        clearance(&flat, &f.members()[i]).expect("dims"),
                        f.members()[i].is_open(),
                    )
                })
                .collect();
            best = best.min(cs.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max));
            pierced |= cs.iter().all(|&(c, open)| member_ok(c, open, tol_feas));
        }
    }
    (best, pierced)
}

struct Claim {
    best_value: f64,
    certified: bool,
    tol_indep: f64,
    tol_feas: f64,
}

fn claim_refuted(f: &Family<f64>, idx: &[usize], k: usize, c: Claim) -> bool {
    let (value, pierced) = core_flat_value(f, idx, k, c.tol_feas);
    let (best_value, certified, tol_indep) = (c.best_value, c.certified, c.tol_indep);
    pierced || (!certified && best_value <= tol_indep) || (!certified && value <= tol_indep)
}

fn independence_holds(f: &Family<f64>, w: &IndependencePayload, tol_feas: f64) -> bool {
    let n = w.member_indices.len();
    if n == 0
        || w.member_indices.iter().any(|&i| i >= f.len())
        || !w.member_indices.iter().all_unique()
    {
        return false;
    }
    if !(w.tol_indep > tol_feas) || w.k >= f.dim() {
        return false;
    }
    let members = &w.member_indices;
    let claim = |best_value, certified| Claim {
        best_value,
        certified,
        tol_indep: w.tol_indep,
        tol_feas,
    };
    if n < w.k + 2 {
        if !w.evidence.is_empty() {
            return false;
        }
        return match (&w.affine_check, n) {
            (None, 1) => true,
            (Some(a), n) if n >= 2 => {
                a.flat_dim == n - 2
                    && !a.pierced
                    && !claim_refuted(f, members, a.flat_dim, claim(a.best_value, a.certified))
            }
            _ => false,
        };
    }
    let expected: Vec<Vec<usize>> = (0..n).combinations(w.k + 2).collect();
    let mut got: Vec<Vec<usize>> = w.evidence.iter().map(|e| e.subset.clone()).collect();
    got.sort();
    if got != expected {
        return false;
    }
    w.evidence.iter().all(|e| {
        let idx: Vec<usize> = e.subset.iter().map(|&j| members[j]).collect();
        !claim_refuted(f, &idx, w.k, claim(e.best_value, e.certified))
    })
}
