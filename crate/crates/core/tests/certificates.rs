use std::collections::BTreeMap;

use transversal_core::constructions::{counterexample_discs_closed, inner_tangent_wedge};
use transversal_core::independence::{is_k_independent, Independence, IndependenceOptions};
use transversal_core::io::{
    render_svg, verify_certificate, CertificateDocument, FamilyDocument, IndependencePayload,
    Payload, SolverProvenance, SvgOptions, TransversalPayload,
};
use transversal_core::nearball::{Family, NearBall};
use transversal_core::solver::{pierce_with_m_flats, SolveOptions};

fn balls(spec: &[([f64; 2], f64)]) -> Family<f64> {
    Family::new(
        spec.iter()
            .map(|(c, r)| NearBall::ball(c.to_vec(), *r).unwrap())
            .collect(),
    )
    .unwrap()
}

fn pierce_doc(f: &Family<f64>, k: usize, m: usize) -> (FamilyDocument, CertificateDocument) {
    let opts = SolveOptions::default();
    let out = pierce_with_m_flats(f, k, m, &opts).unwrap();
    let cert = out.certificate().expect("pierceable");
    let doc = FamilyDocument::from_family(f, BTreeMap::new());
    let c = CertificateDocument::new(
        Payload::Transversal(TransversalPayload::of(k, cert)),
        SolverProvenance::of(&opts, None, true),
    );
    (doc, c)
}

#[test]
fn fresh_transversal_certificate_verifies() {
    let f = counterexample_discs_closed(12).unwrap();
    let (doc, cert) = pierce_doc(&f, 1, 1);
    assert!(verify_certificate(&doc, &cert).unwrap());
    let again = CertificateDocument::from_json(&cert.to_json()).unwrap();
    assert!(
        verify_certificate(&FamilyDocument::from_json(&doc.to_json()).unwrap(), &again).unwrap()
    );
}

#[test]
fn unassigned_member_fails() {
    let f = balls(&[([0.0, 0.0], 1.0), ([5.0, 0.0], 1.0), ([10.0, 0.0], 1.0)]);
    let (doc, mut cert) = pierce_doc(&f, 0, 3);
    assert!(verify_certificate(&doc, &cert).unwrap());
    if let Payload::Transversal(t) = &mut cert.payload {
        t.assignment.pop();
        t.residuals.pop();
    }
    assert!(!verify_certificate(&doc, &cert).unwrap());
}

#[test]
fn tampered_residual_or_flat_fails() {
    let f = balls(&[([0.0, 0.0], 1.0), ([5.0, 0.5], 1.0)]);
    let (doc, cert) = pierce_doc(&f, 1, 1);
    let mut a = cert.clone();
    if let Payload::Transversal(t) = &mut a.payload {
        t.residuals[0] -= 0.5;
    }
    assert!(!verify_certificate(&doc, &a).unwrap());
    let mut b = cert.clone();
    if let Payload::Transversal(t) = &mut b.payload {
        t.flats[0].anchor[1] += 100.0;
    }
    assert!(!verify_certificate(&doc, &b).unwrap());
}

#[test]
fn planted_collinear_triple_breaks_an_independence_witness() {
    // Three tiny discs on a triangle: 1-independent.
    let f = balls(&[([0.0, 0.0], 0.01), ([1.0, 0.0], 0.01), ([0.0, 1.0], 0.01)]);
    let opts = IndependenceOptions::default();
    let Independence::Witness(w) = is_k_independent(&f, 1, &opts).unwrap() else {
        panic!("triangle is independent")
    };
    let cert = CertificateDocument::new(
        Payload::Independence(IndependencePayload::of(&w)),
        SolverProvenance::of(&opts.solver, Some(opts.tol_indep), w.certified()),
    );
    let doc = FamilyDocument::from_family(&f, BTreeMap::new());
    assert!(verify_certificate(&doc, &cert).unwrap());
    // Move the third disc onto the line through the first two.
    let mut planted = doc.clone();
    planted.members[2].parts[0].center = vec![2.0, 0.0];
    assert!(!verify_certificate(&planted, &cert).unwrap());
}

#[test]
fn missing_evidence_fails() {
    let f = balls(&[
        ([0.0, 0.0], 0.01),
        ([1.0, 0.0], 0.01),
        ([0.0, 1.0], 0.01),
        ([1.0, 1.3], 0.01),
    ]);
    let opts = IndependenceOptions::default();
    let Independence::Witness(w) = is_k_independent(&f, 1, &opts).unwrap() else {
        panic!()
    };
    let mut p = IndependencePayload::of(&w);
    p.evidence.pop();
    let cert = CertificateDocument::new(
        Payload::Independence(p),
        SolverProvenance::of(&opts.solver, Some(1e-4), false),
    );
    assert!(!verify_certificate(&FamilyDocument::from_family(&f, BTreeMap::new()), &cert).unwrap());
}

#[test]
fn dimension_mismatch_is_a_schema_error() {
    let f = balls(&[([0.0, 0.0], 1.0)]);
    let (_, cert) = pierce_doc(&f, 0, 1);
    let g = Family::new(vec![NearBall::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap()]).unwrap();
    let doc = FamilyDocument::from_family(&g, BTreeMap::new());
    assert!(verify_certificate(&doc, &cert).is_err());
}

#[test]
fn svg_matches_golden_file() {
    let f = counterexample_discs_closed(5).unwrap();
    let (doc, cert) = pierce_doc(&f, 1, 1);
    let m = f.members();
    let wedge = inner_tangent_wedge(m[3].core(), m[4].core()).unwrap();
    let svg = render_svg(&doc, Some(&cert), &[wedge], &SvgOptions::default()).unwrap();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/discs5.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(path).expect("golden file present");
    assert_eq!(svg, golden);
}
