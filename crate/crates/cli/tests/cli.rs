use std::path::Path;

use serde_json::Value;
use transversal_lab::{run, EXIT_INVALID, EXIT_OK, EXIT_UNDECIDED};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lab(args: &[&str], stdin: &str) -> Out {
    let argv = std::iter::once("transversal-lab").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{"version":"1.0.0","ambient_dim":2,"open_flag":false,"members":[
 {"parts":[{"center":[0.0,0.0],"radius":0.01}],"core_index":0},
 {"parts":[{"center":[1.0,0.0],"radius":0.01}],"core_index":0},
 {"parts":[{"center":[0.0,1.0],"radius":0.01}],"core_index":0}]}"#;

#[test]
fn closed_discs_are_pierced_by_one_line_and_the_certificate_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let fam = lab(&["gen", "discs", "--n", "12", "--closed"], "");
    assert_eq!(fam.code, EXIT_OK);
    let cert = lab(&["pierce", "--k", "1", "--m", "1"], &fam.stdout);
    assert_eq!(cert.code, EXIT_OK, "{}", cert.stderr);
    let c = json(&cert.stdout);
    assert_eq!(c["kind"], "transversal");
    // The flat is horizontal.
    let u = &c["payload"]["flats"][0]["basis"][0];
    assert!(u[1].as_f64().unwrap().abs() < 1e-6);
    let f = write(dir.path(), "f.json", &fam.stdout);
    let cp = write(dir.path(), "c.json", &cert.stdout);
    let v = lab(&["verify", &f, &cp], "");
    assert_eq!(v.code, EXIT_OK);
    assert_eq!(json(&v.stdout)["valid"], true);
}

#[test]
fn open_discs_stop_at_two_independent_members() {
    let fam = lab(&["gen", "discs", "--n", "12"], "");
    let r = lab(&["independent", "--k", "1", "--target", "3"], &fam.stdout);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let p = &json(&r.stdout)["payload"];
    assert_eq!(p["outcome"], "SEQUENCE_EXHAUSTED");
    assert_eq!(p["data"]["length"], 2);
}

#[test]
fn ktok_report_respects_the_bound() {
    let r = lab(
        &[
            "verify-claims",
            "ktok",
            "--K",
            "3",
            "--trials",
            "2000",
            "--seed",
            "7",
        ],
        "",
    );
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = &json(&r.stdout)["payload"]["data"]["report"];
    assert_eq!(rep["violations"], 0);
    assert!(rep["max_observed"].as_f64().unwrap() <= 2f64.sqrt() * 3.0 + 1e-6);
}

#[test]
fn broken_cone_premise_reports_escapes() {
    let args = [
        "verify-claims",
        "cone",
        "--K",
        "2",
        "--D",
        "10",
        "--eps1",
        "0.1",
        "--trials",
        "500",
        "--premise-scale",
        "3",
    ];
    let r = lab(&args, "");
    assert_eq!(r.code, EXIT_OK);
    let p = &json(&r.stdout)["payload"];
    assert_eq!(p["outcome"], "VIOLATIONS");
    assert_eq!(p["data"]["report"]["premise_holds"], false);
}

#[test]
fn dichotomy_emits_exactly_one_kind() {
    let r = lab(&["dichotomy", "--k", "1", "--budget", "1"], TRIANGLE);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(json(&r.stdout)["kind"], "independence");

    let line = lab(&["gen", "discs", "--n", "6", "--closed"], "");
    let r = lab(&["dichotomy", "--k", "1", "--budget", "1"], &line.stdout);
    assert_eq!(json(&r.stdout)["kind"], "transversal");

    let r = lab(
        &["dichotomy", "--k", "1", "--budget", "1", "--target", "4"],
        TRIANGLE,
    );
    assert_eq!(r.code, EXIT_UNDECIDED);
    let p = &json(&r.stdout)["payload"];
    assert_eq!(p["outcome"], "UNDECIDED");
    assert_eq!(p["data"]["independent_length"], 3);
}

#[test]
fn heuristic_pierce_failure_is_undecided() {
    let r = lab(&["pierce", "--k", "1", "--m", "1"], TRIANGLE);
    assert_eq!(r.code, EXIT_UNDECIDED);
    assert_eq!(json(&r.stdout)["payload"]["outcome"], "UNDECIDED");
    let r = lab(&["pierce", "--k", "0", "--m", "2"], TRIANGLE);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(json(&r.stdout)["payload"]["outcome"], "FAIL");
}

#[test]
fn outputs_are_deterministic() {
    let fam = lab(&["gen", "random", "--members", "6", "--seed", "11"], "");
    assert_eq!(
        fam.stdout,
        lab(&["gen", "random", "--members", "6", "--seed", "11"], "").stdout
    );
    let a = lab(
        &["pierce", "--k", "1", "--m", "2", "--seed", "5"],
        &fam.stdout,
    );
    let b = lab(
        &["pierce", "--k", "1", "--m", "2", "--seed", "5"],
        &fam.stdout,
    );
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.code, b.code);
}

#[test]
fn projections_produce_families() {
    let fam = lab(
        &[
            "gen",
            "random",
            "--dim",
            "3",
            "--members",
            "4",
            "--seed",
            "2",
        ],
        "",
    );
    let r = lab(&["project", "orthogonal"], &fam.stdout);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(json(&r.stdout)["ambient_dim"], 2);
    let cone_family = r#"{"version":"1.0.0","ambient_dim":3,"open_flag":false,"members":[
     {"parts":[{"center":[0.1,0.0,3.0],"radius":0.2}],"core_index":0},
     {"parts":[{"center":[-0.2,0.1,5.0],"radius":0.3}],"core_index":0}]}"#;
    let r = lab(&["project", "central", "--axis", "0,0,1"], cone_family);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(json(&r.stdout)["ambient_dim"], 2);
    let r = lab(&["project", "central", "--axis", "1,0,0"], cone_family);
    assert_eq!(r.code, EXIT_INVALID);
}

#[test]
fn render_writes_svg_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let fam = lab(&["gen", "discs", "--n", "4", "--closed"], "");
    let out = dir.path().join("scene.svg");
    let r = lab(
        &["render", "--wedge", "2,3", "--out", out.to_str().unwrap()],
        &fam.stdout,
    );
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let svg = std::fs::read_to_string(out).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("wedge-0"));
    assert_eq!(
        lab(&["render", "--wedge", "2,9"], &fam.stdout).code,
        EXIT_INVALID
    );
}

#[test]
fn check_nearball_reports_the_constant() {
    let r = lab(&["check-nearball", "--r-grid", "0.5"], TRIANGLE);
    assert_eq!(r.code, EXIT_OK);
    let d = &json(&r.stdout)["payload"]["data"];
    assert_eq!(d["K"], 1.0);
    assert_eq!(d["weak_condition"][0]["sup_r_esc"], 0.01);
}

#[test]
fn invalid_inputs_exit_with_one() {
    assert_eq!(lab(&["pierce", "--k", "1"], "not json").code, EXIT_INVALID);
    assert_eq!(
        lab(&["pierce", "--k", "2", "--m", "1"], TRIANGLE).code,
        EXIT_INVALID
    );
    assert_eq!(lab(&["frobnicate"], "").code, EXIT_INVALID);
    assert_eq!(
        lab(&["pierce", "--k", "1", "--tol", "-1"], TRIANGLE).code,
        EXIT_INVALID
    );
    let v = lab(
        &["verify", "/nonexistent/f.json", "/nonexistent/c.json"],
        "",
    );
    assert_eq!(v.code, EXIT_INVALID);
    assert!(!v.stderr.is_empty());
}

#[test]
fn help_exits_cleanly() {
    let r = lab(&["--help"], "");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("dichotomy"));
}
