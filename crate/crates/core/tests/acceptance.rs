//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are run in full and expected to
//! fail; the process exits non-zero if any other criterion fails or if one
//! of those starts passing.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use transversal_core::constructions::random::{
    max_escribed, random_family, random_nearball, random_unit, RandomFamilySpec,
};
use transversal_core::constructions::{
    counterexample_discs, counterexample_discs_closed, verify_33_property,
};
use transversal_core::geometry::{canonicalize_flat, ClosedBall, KFlat};
use transversal_core::independence::{
    greedy_independent_subsequence, orthogonal_project_family, verify_claim_cone,
    verify_claim_ktok, verify_claim_wide_cone, ConeClaimParams, IndependenceError,
    IndependenceOptions, KtoKParams, WideConeParams,
};
use transversal_core::io::{
    verify_certificate, CertificateDocument, FamilyDocument, Payload, SolverProvenance,
    TransversalPayload,
};
use transversal_core::nearball::{clearance, pierces, Family, NearBall};
use transversal_core::solver::{
    exists_transversal, greedy_piercing_upper, min_max_flat, pierce_with_m_flats, Method,
    PierceOutcome, SolveOptions, Transversal, TransversalCertificate,
};

const KNOWN_UNATTAINABLE: &[usize] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Sweep oracle for lines through open discs in the plane.
//
// For the unit normal n(θ) a line {z : <n, z> = s} meets the open disc
// B(c, r) iff s lies in (<n,c> - r, <n,c> + r). A common line with normal
// n(θ) exists iff gap(θ) = max(<n,c_i> - r_i) - min(<n,c_i> + r_i) < 0.

fn gap(discs: &[([f64; 2], f64)], theta: f64) -> f64 {
    let n = [-theta.sin(), theta.cos()];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (c, r) in discs {
        let p = n[0] * c[0] + n[1] * c[1];
        lo = lo.max(p - r);
        hi = hi.min(p + r);
    }
    lo - hi
}

/// Minimum of `gap` over all directions: dense sweep, then golden-section
/// refinement around the best few samples.
fn sweep_min_gap(discs: &[([f64; 2], f64)]) -> (f64, f64) {
    const STEPS: usize = 20_000;
    let h = PI / STEPS as f64;
    let mut samples: Vec<(f64, f64)> = (0..STEPS)
        .map(|i| (gap(discs, i as f64 * h), i as f64 * h))
        .collect();
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = samples[0];
    for &(_, t0) in samples.iter().take(8) {
        let (mut a, mut b) = (t0 - h, t0 + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let (x1, x2) = (b - g * (b - a), a + g * (b - a));
            if gap(discs, x1) < gap(discs, x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let t = (a + b) / 2.0;
        let v = gap(discs, t);
        if v < best.0 {
            best = (v, t);
        }
    }
    best
}

fn disc_data(f: &Family<f64>) -> Vec<([f64; 2], f64)> {
    f.members()
        .iter()
        .map(|m| ([m.center()[0], m.center()[1]], m.r_in()))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = verify_33_property(12, &SolveOptions::default()).expect("valid n");
    let secs = start.elapsed().as_secs_f64();
    let discs = disc_data(&counterexample_discs(12).unwrap());
    let triples: Vec<[usize; 3]> = report.checks.iter().map(|c| c.triple).collect();
    let worst = triples
        .par_iter()
        .map(|t| sweep_min_gap(&[discs[t[0]], discs[t[1]], discs[t[2]]]).0)
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let oracle_ok = worst < 1e-6;
    let pass = report.checks.len() == 220 && report.passed() && secs <= 10.0 && oracle_ok;
    outcome(
        pass,
        format!(
            "{} triples, {} failures, {:.2}s; sweep oracle worst gap {:.3e}",
            report.checks.len(),
            report.failures().len(),
            secs,
            worst
        ),
    )
}

fn criterion_2() -> Outcome {
    let opts = IndependenceOptions::default();
    let mut lengths = Vec::new();
    for n in [5, 10, 50] {
        let f = counterexample_discs_closed(n).unwrap();
        let len = match greedy_independent_subsequence(&f, 1, 3, &opts) {
            Ok(w) => w.len(),
            Err(IndependenceError::SequenceExhausted { accepted, .. }) => accepted.len(),
            Err(e) => panic!("{e}"),
        };
        lengths.push((n, len));
    }
    let pass = lengths.iter().all(|&(_, l)| l == 2);
    outcome(pass, format!("halting lengths (n, len): {lengths:?}"))
}

fn criterion_3() -> Outcome {
    const MAX_N: usize = 30;
    let opts = SolveOptions::default();
    let discs = disc_data(&counterexample_discs(MAX_N).unwrap());
    let rows: Vec<(usize, f64, f64, usize)> = (1..=MAX_N)
        .into_par_iter()
        .map(|n| {
            let (g, theta) = sweep_min_gap(&discs[..n]);
            let f = counterexample_discs(n).unwrap();
            let (m, _) = greedy_piercing_upper(&f, 1, &opts).expect("valid");
            (n, g, theta, m)
        })
        .collect();
    // Smallest prefix with no strictly piercing line.
    let threshold = rows.iter().find(|r| r.1 >= 0.0).map(|r| r.0);
    let agree = rows.iter().all(|&(n, _, _, m)| match threshold {
        Some(t) if n >= t => m > 1,
        _ => m == 1,
    });
    let ms: Vec<usize> = rows.iter().map(|r| r.3).collect();
    let max_gap = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let pass = threshold.is_some() && agree;
    outcome(
        pass,
        format!(
            "oracle threshold up to n={MAX_N}: {threshold:?} (largest min-gap {max_gap:.3e}, every prefix has a line); \
             greedy line counts {ms:?}; solver agrees with oracle: {agree}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1.5, 3.0, 10.0] {
        let start = Instant::now();
        let r = verify_claim_ktok(&KtoKParams::new(k, 10_000, 7)).expect("no counterexample");
        let secs = start.elapsed().as_secs_f64();
        let ok = r.trials == 10_000
            && r.violations == 0
            && r.max_observed <= 2f64.sqrt() * k + 1e-6
            && secs <= 30.0;
        pass &= ok;
        parts.push(format!(
            "K={k}: max {:.6} vs {:.6} in {secs:.2}s",
            r.max_observed,
            2f64.sqrt() * k + 1e-6
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, d, eps1) in [(2.0, 10.0, 0.1), (5.0, 3.0, 0.05)] {
        let r = verify_claim_cone(&ConeClaimParams::new(k, d, eps1, 10_000, 11))
            .expect("no counterexample");
        pass &= r.violations == 0 && r.premise_holds && r.trials == 10_000;
        parts.push(format!(
            "(K,D,eps1)=({k},{d},{eps1}): {} escapes, max angle {:.4}",
            r.violations, r.max_observed
        ));
    }
    let control = ConeClaimParams {
        premise_scale: 3.0,
        ..ConeClaimParams::new(2.0, 10.0, 0.1, 10_000, 11)
    };
    let r = verify_claim_cone(&control).expect("broken premise reports instead of failing");
    pass &= !r.premise_holds && r.violations >= 1;
    parts.push(format!("broken premise: {} escapes", r.violations));
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1.0, 3.0] {
        let alpha = 0.9 * FRAC_PI_4 / (1.0 + FRAC_PI_2 * k);
        let p = WideConeParams::new(k, alpha, 10_000, 13);
        let r = verify_claim_wide_cone(&p).expect("no counterexample");
        let ok = r.violations == 0
            && r.max_observed < FRAC_PI_4
            && r.max_observed <= p.aperture_bound() + 1e-9;
        pass &= ok && r.trials == 10_000;
        parts.push(format!(
            "K={k}: max beta+gamma {:.6} vs {:.6}",
            r.max_observed,
            p.aperture_bound()
        ));
    }
    outcome(pass, parts.join("; "))
}

/// A near-ball with constant at most 3 that contains `p` in its core or in
/// an extra part.
fn member_through(rng: &mut ChaCha8Rng, p: &[f64]) -> NearBall<f64> {
    let d = p.len();
    let r_in = rng.random_range(0.1..1.0);
    let r_esc = max_escribed(3.0, r_in);
    let u = random_unit(rng, d);
    if rng.random_bool(0.5) {
        let c: Vec<f64> = p
            .iter()
            .zip(&u)
            .map(|(x, v)| x + v * r_in * rng.random_range(0.0..0.95))
            .collect();
        NearBall::new(vec![ClosedBall::new(c, r_in).unwrap()], 0, false).unwrap()
    } else {
        let rho = rng.random_range(1.05 * r_in..0.9 * r_esc);
        let c: Vec<f64> = p.iter().zip(&u).map(|(x, v)| x + v * rho).collect();
        let q = (r_esc - rho) * rng.random_range(0.2..0.9);
        let parts = vec![
            ClosedBall::new(c, r_in).unwrap(),
            ClosedBall::new(p.to_vec(), q).unwrap(),
        ];
        NearBall::new(parts, 0, false).unwrap()
    }
}

fn criterion_7() -> Outcome {
    let opts = SolveOptions::default();
    let yes: Vec<(bool, f64)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(7_000 + i);
            let d = if i < 500 { 2 } else { 3 };
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let n = rng.random_range(2..=6);
            let f = Family::new((0..n).map(|_| member_through(&mut rng, &p)).collect()).unwrap();
            match exists_transversal(&f, 0, &opts).unwrap() {
                Transversal::Yes { solution } => {
                    let res = f
                        .members()
                        .iter()
                        .map(|m| clearance(&solution.flat, m).unwrap())
                        .fold(f64::NEG_INFINITY, f64::max);
                    (true, res.max(0.0))
                }
                Transversal::No { .. } => (false, f64::INFINITY),
            }
        })
        .collect();
    let yes_ok = yes.iter().filter(|(y, r)| *y && *r <= 1e-7).count();
    let max_res = yes.iter().map(|r| r.1).fold(0.0, f64::max);

    let no: Vec<(bool, f64)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(9_000 + i);
            let d = rng.random_range(2..=3);
            let g = 10f64.powf(rng.random_range(-3.0..0.0));
            let mut members = Vec::new();
            let r1 = rng.random_range(0.1..1.0);
            let r2 = rng.random_range(0.1..1.0);
            let e1 = max_escribed(rng.random_range(1.0..3.0), r1);
            let e2 = max_escribed(rng.random_range(1.0..3.0), r2);
            let c1: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let u = random_unit(&mut rng, d);
            let c2: Vec<f64> = c1
                .iter()
                .zip(&u)
                .map(|(x, v)| x + v * (e1 + e2 + g))
                .collect();
            for (c, r, e) in [(c1, r1, e1), (c2, r2, e2)] {
                let extra = rng.random_range(0..=3);
                members.push(
                    random_nearball(
                        &mut rng,
                        &c,
                        r,
                        if extra == 0 { r } else { e },
                        extra,
                        false,
                    )
                    .unwrap(),
                );
            }
            // Without extra parts the escribed ball is the core, so the real
            // gap can only be larger than planted.
            let f = Family::new(members).unwrap();
            match exists_transversal(&f, 0, &opts).unwrap() {
                Transversal::No {
                    certified: true,
                    lower_bound: Some(lb),
                    ..
                } => (lb >= g / 2.0 - 1e-7, lb - g / 2.0),
                _ => (false, f64::NEG_INFINITY),
            }
        })
        .collect();
    let no_ok = no.iter().filter(|r| r.0).count();
    let worst = no.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let pass = yes_ok == 1000 && no_ok == 500;
    outcome(
        pass,
        format!(
            "YES {yes_ok}/1000 (max residual {max_res:.2e}); certified NO {no_ok}/500 (min lb - gap/2 = {worst:.2e})"
        ),
    )
}

fn certificate_doc(
    f: &Family<f64>,
    k: usize,
    cert: &TransversalCertificate,
    opts: &SolveOptions,
) -> (FamilyDocument, CertificateDocument) {
    (
        FamilyDocument::from_family(f, BTreeMap::new()),
        CertificateDocument::new(
            Payload::Transversal(TransversalPayload::of(k, cert)),
            SolverProvenance::of(opts, None, true),
        ),
    )
}

fn criterion_8() -> Outcome {
    let opts = SolveOptions::default();
    let mut ok = 0;
    let mut total = 0;
    for m in [2usize, 3] {
        for seed in 0..10u64 {
            total += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(800 + 10 * m as u64 + seed);
            let d = rng.random_range(2..=3);
            // Pairwise disjoint: centers spaced by more than twice the radius.
            let base: Vec<NearBall<f64>> = (0..m)
                .map(|i| {
                    let mut c: Vec<f64> = (0..d).map(|_| rng.random_range(-0.3..0.3)).collect();
                    c[0] += 3.0 * i as f64;
                    NearBall::ball(c, rng.random_range(0.2..1.0)).unwrap()
                })
                .collect();
            let f = Family::new((0..10).flat_map(|_| base.iter().cloned()).collect()).unwrap();
            let under = pierce_with_m_flats(&f, 0, m - 1, &opts).unwrap();
            let fail_ok = matches!(
                under,
                PierceOutcome::Fail {
                    certified: true,
                    exhaustive: true,
                    ..
                }
            );
            let cert_ok = match pierce_with_m_flats(&f, 0, m, &opts).unwrap() {
                PierceOutcome::Certificate { certificate, .. } => {
                    let (fd, cd) = certificate_doc(&f, 0, &certificate, &opts);
                    verify_certificate(&fd, &cd).unwrap()
                }
                PierceOutcome::Fail { .. } => false,
            };
            ok += usize::from(fail_ok && cert_ok);
        }
    }
    outcome(
        ok == total,
        format!(
            "{ok}/{total} replicated families: budget m-1 fails exhaustively, budget m verifies"
        ),
    )
}

fn criterion_9() -> Outcome {
    let opts = SolveOptions::default();
    let rows: Vec<(f64, usize, usize)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(90_000 + i);
            let spec = RandomFamilySpec {
                dim: 2,
                members: rng.random_range(2..=5),
                ..RandomFamilySpec::default()
            };
            let f = random_family(&spec, &mut rng).unwrap();
            let opts = opts.with_seed(i);
            let a = min_max_flat(&f, 1, &opts).unwrap();
            let g = min_max_flat(&f, 1, &opts.with_method(Method::GridOracle)).unwrap();
            let (mut emitted, mut verified) = (0, 0);
            for m in [1, 2] {
                if let PierceOutcome::Certificate { certificate, .. } =
                    pierce_with_m_flats(&f, 1, m, &opts).unwrap()
                {
                    emitted += 1;
                    let (fd, cd) = certificate_doc(&f, 1, &certificate, &opts);
                    verified += usize::from(verify_certificate(&fd, &cd).unwrap());
                }
            }
            ((a.value - g.value).abs(), emitted, verified)
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let agree = rows.iter().filter(|r| r.0 <= 2e-3).count();
    let emitted: usize = rows.iter().map(|r| r.1).sum();
    let verified: usize = rows.iter().map(|r| r.2).sum();
    let pass = agree == 200 && emitted > 0 && verified == emitted;
    outcome(
        pass,
        format!("{agree}/200 within 2e-3 of the grid oracle (worst {worst:.2e}); certificates verified {verified}/{emitted}"),
    )
}

fn lift(flat: &KFlat<f64>) -> KFlat<f64> {
    let d = flat.dim_ambient() + 1;
    let pad = |v: &[f64]| {
        let mut w = v.to_vec();
        w.push(0.0);
        w
    };
    let mut spanning: Vec<Vec<f64>> = flat.basis().iter().map(|v| pad(v)).collect();
    let mut e = vec![0.0; d];
    e[d - 1] = 1.0;
    spanning.push(e);
    canonicalize_flat(&pad(flat.anchor()), &spanning).unwrap()
}

fn criterion_10() -> Outcome {
    let monotone = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(100_000 + i);
            let spec = RandomFamilySpec {
                dim: rng.random_range(2..=4),
                members: rng.random_range(1..=6),
                k_bound: rng.random_range(1.0..8.0),
                max_extra: 3,
                ..RandomFamilySpec::default()
            };
            let f = random_family(&spec, &mut rng).unwrap();
            let g = orthogonal_project_family(&f).unwrap();
            g.constant() <= f.constant()
        })
        .count();
    let lifted = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(200_000 + i);
            let d = rng.random_range(2..=4);
            let spec = RandomFamilySpec {
                dim: d,
                members: 1,
                max_extra: 3,
                ..RandomFamilySpec::default()
            };
            let b = random_family(&spec, &mut rng).unwrap().members()[0].clone();
            let proj = orthogonal_project_family(&Family::new(vec![b.clone()]).unwrap())
                .unwrap()
                .members()[0]
                .clone();
            // A (k-1)-flat through a point of a random projected part.
            let part = &proj.parts()[rng.random_range(0..proj.parts().len())];
            let u = random_unit(&mut rng, d - 1);
            let x: Vec<f64> = part
                .center()
                .iter()
                .zip(&u)
                .map(|(c, v)| c + v * part.radius() * rng.random_range(0.0..1.0))
                .collect();
            let k = rng.random_range(1..d);
            let spanning: Vec<Vec<f64>> =
                (0..k - 1).map(|_| random_unit(&mut rng, d - 1)).collect();
            let low = canonicalize_flat(&x, &spanning).unwrap();
            let high = lift(&low);
            let same =
                (clearance(&low, &proj).unwrap() - clearance(&high, &b).unwrap()).abs() <= 1e-9;
            pierces(&low, &proj).unwrap() && pierces(&high, &b).unwrap() && same
        })
        .count();
    outcome(
        monotone == 1000 && lifted == 1000,
        format!("K monotone {monotone}/1000; lifted cylinders {lifted}/1000"),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut unexpected = Vec::new();
    for (id, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let note = if known { " [known unattainable]" } else { "" };
        println!(
            "criterion {id:>2}: {verdict}{note} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if o.pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
