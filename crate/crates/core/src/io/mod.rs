//! JSON documents for families and certificates, offline re-checking and
//! SVG scenes.

mod svg;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{ClosedBall, GeometryError, KFlat};
use crate::independence::{AffineCheck, IndependenceWitness, SubsetEvidence};
use crate::nearball::{Family, NearBall, NearBallError};
use crate::solver::{SolveOptions, TransversalCertificate};

pub use svg::{render_svg, SvgOptions};
pub use verify::verify_certificate;

pub const FORMAT_VERSION: &str = "1.0.0";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    NearBall(#[from] NearBallError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartDoc {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDoc {
    pub parts: Vec<PartDoc>,
    pub core_index: usize,
    /// Only written when it differs from the family flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDocument {
    pub version: String,
    pub ambient_dim: usize,
    pub open_flag: bool,
    pub members: Vec<MemberDoc>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl FamilyDocument {
    pub fn from_family(f: &Family<f64>, metadata: BTreeMap<String, Value>) -> Self {
        let open_flag = f.is_open();
        let members = f
            .members()
            .iter()
            .map(|m| MemberDoc {
                parts: m
                    .parts()
                    .iter()
                    .map(|p| PartDoc {
                        center: p.center().to_vec(),
                        radius: p.radius(),
                    })
                    .collect(),
                core_index: m.core_index(),
                open: (m.is_open() != open_flag).then_some(m.is_open()),
            })
            .collect();
        Self {
            version: FORMAT_VERSION.into(),
            ambient_dim: f.dim(),
            open_flag,
            members,
            metadata,
        }
    }

    pub fn to_family(&self) -> Result<Family<f64>, IoError> {
        check_version(&self.version)?;
        let mut members = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            let parts = m
                .parts
                .iter()
                .map(|p| ClosedBall::new(p.center.clone(), p.radius))
                .collect::<Result<Vec<_>, _>>()?;
            if parts.iter().any(|p| p.dim() != self.ambient_dim) {
                return Err(IoError::Schema(format!(
                    "member {i} does not live in dimension {}",
                    self.ambient_dim
                )));
            }
            members.push(NearBall::new(
                parts,
                m.core_index,
                m.open.unwrap_or(self.open_flag),
            )?);
        }
        Ok(Family::new(members)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self, IoError> {
        let doc: Self = serde_json::from_str(s)?;
        check_version(&doc.version)?;
        Ok(doc)
    }
}

fn check_version(v: &str) -> Result<(), IoError> {
    let major = v.split('.').next().unwrap_or_default();
    if major != FORMAT_VERSION.split('.').next().unwrap_or_default() {
        return Err(IoError::Schema(format!("unsupported version {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatDoc {
    pub anchor: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl FlatDoc {
    pub fn of(f: &KFlat<f64>) -> Self {
        Self {
            anchor: f.anchor().to_vec(),
            basis: f.basis().to_vec(),
        }
    }

    pub fn to_flat(&self) -> Result<KFlat<f64>, GeometryError> {
        KFlat::new(self.anchor.clone(), self.basis.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalPayload {
    pub k: usize,
    pub flats: Vec<FlatDoc>,
    pub assignment: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl TransversalPayload {
    pub fn of(k: usize, cert: &TransversalCertificate) -> Self {
        Self {
            k,
            flats: cert.flats.iter().map(FlatDoc::of).collect(),
            assignment: cert.assignment.clone(),
            residuals: cert.residuals.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub subset: Vec<usize>,
    pub best_value: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCheckDoc {
    pub flat_dim: usize,
    pub best_value: f64,
    pub certified: bool,
    pub pierced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependencePayload {
    pub k: usize,
    /// Family indices of the witnessed members.
    pub member_indices: Vec<usize>,
    pub tol_indep: f64,
    /// Subsets index into `member_indices`.
    pub evidence: Vec<EvidenceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine_check: Option<AffineCheckDoc>,
}

impl IndependencePayload {
    pub fn of(w: &IndependenceWitness) -> Self {
        let ev = |e: &SubsetEvidence| EvidenceDoc {
            subset: e.subset.clone(),
            best_value: e.best_value,
            certified: e.certified,
        };
        let ac = |a: &AffineCheck| AffineCheckDoc {
            flat_dim: a.flat_dim,
            best_value: a.best_value,
            certified: a.certified,
            pierced: a.pierced,
        };
        Self {
            k: w.k,
            member_indices: w.member_indices.clone(),
            tol_indep: w.tol_indep,
            evidence: w.evidence.iter().map(ev).collect(),
            affine_check: w.affine_check.as_ref().map(ac),
        }
    }
}

/// Anything that is not re-checkable against a family: claim reports,
/// UNDECIDED outcomes, construction checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPayload {
    pub name: String,
    pub outcome: String,
    #[serde(default)]
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Payload {
    Transversal(TransversalPayload),
    Independence(IndependencePayload),
    Report(ReportPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub geo_tol: f64,
    pub tol_feas: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_indep: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverProvenance {
    pub seed: u64,
    pub restarts: usize,
    pub tolerances: Tolerances,
    pub certified: bool,
}

impl SolverProvenance {
    pub fn of(opts: &SolveOptions, tol_indep: Option<f64>, certified: bool) -> Self {
        Self {
            seed: opts.seed,
            restarts: opts.restarts,
            tolerances: Tolerances {
                geo_tol: <f64 as crate::scalar::Scalar>::GEO_TOL,
                tol_feas: opts.tol_feas,
                tol_indep,
            },
            certified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub version: String,
    #[serde(flatten)]
    pub payload: Payload,
    pub solver_provenance: SolverProvenance,
}

impl CertificateDocument {
    pub fn new(payload: Payload, solver_provenance: SolverProvenance) -> Self {
        Self {
            version: FORMAT_VERSION.into(),
            payload,
            solver_provenance,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.payload {
            Payload::Transversal(_) => "transversal",
            Payload::Independence(_) => "independence",
            Payload::Report(_) => "report",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self, IoError> {
        let doc: Self = serde_json::from_str(s)?;
        check_version(&doc.version)?;
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::counterexample_discs;

    #[test]
    fn family_round_trip_is_bit_exact() {
        let f = counterexample_discs(7).unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("generator".into(), Value::from("discs"));
        let doc = FamilyDocument::from_family(&f, meta);
        let back = FamilyDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let g = back.to_family().unwrap();
        for (a, b) in f.members().iter().zip(g.members()) {
            for (p, q) in a.parts().iter().zip(b.parts()) {
                assert_eq!(p.radius().to_bits(), q.radius().to_bits());
                for (x, y) in p.center().iter().zip(q.center()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            assert_eq!(a.is_open(), b.is_open());
        }
    }

    #[test]
    fn awkward_floats_survive() {
        let xs = [
            0.1 + 0.2,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            1e300,
            -5e-324,
            123456789.123456789,
        ];
        let f = Family::new(
            xs.iter()
                .map(|&x| NearBall::ball(vec![x, -x], 1.0).unwrap())
                .collect(),
        )
        .unwrap();
        let doc = FamilyDocument::from_family(&f, BTreeMap::new());
        let back = FamilyDocument::from_json(&doc.to_json()).unwrap();
        for (m, x) in back.members.iter().zip(xs) {
            assert_eq!(m.parts[0].center[0].to_bits(), x.to_bits());
        }
    }

    #[test]
    fn mixed_openness_is_kept() {
        let f = Family::new(vec![
            NearBall::ball(vec![0.0, 0.0], 1.0).unwrap(),
            NearBall::open_ball(vec![3.0, 0.0], 1.0).unwrap(),
        ])
        .unwrap();
        let doc = FamilyDocument::from_family(&f, BTreeMap::new());
        assert!(!doc.open_flag);
        let g = FamilyDocument::from_json(&doc.to_json())
            .unwrap()
            .to_family()
            .unwrap();
        assert!(!g.members()[0].is_open());
        assert!(g.members()[1].is_open());
    }

    #[test]
    fn certificate_kind_is_a_top_level_field() {
        let cert = CertificateDocument::new(
            Payload::Report(ReportPayload {
                name: "x".into(),
                outcome: "UNDECIDED".into(),
                data: Value::Null,
            }),
            SolverProvenance::of(&SolveOptions::default(), None, false),
        );
        let s = cert.to_json();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["kind"], "report");
        assert_eq!(v["payload"]["outcome"], "UNDECIDED");
        assert_eq!(CertificateDocument::from_json(&s).unwrap(), cert);
    }

    #[test]
    fn bad_inputs_are_schema_errors() {
        assert!(FamilyDocument::from_json("{").is_err());
        let mut doc =
            FamilyDocument::from_family(&counterexample_discs(3).unwrap(), BTreeMap::new());
        doc.version = "2.0.0".into();
        assert!(matches!(
            FamilyDocument::from_json(&doc.to_json()),
            Err(IoError::Schema(_))
        ));
        doc.version = FORMAT_VERSION.into();
        doc.ambient_dim = 3;
        assert!(matches!(doc.to_family(), Err(IoError::Schema(_))));
    }
}
