use std::fmt::Debug;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use siegel_cli::commands::{
    ClassesOutput, EpsilonOutput, GramRootOutput, IsotropyTestOutput, MaximalGroupsOutput, RootVerification,
};
use siegel_cli::manifest::RunManifest;
use siegel_cli::reproduce::{example_form, example_generators, example_roots, Report};
use siegel_theta::dims::DimReport;
use siegel_theta::linalg::IntMatrix;
use siegel_theta::relations::{RelationCheck, TransformCheck};
use siegel_theta::span::SpanRank;
use siegel_theta::theta::CertifiedValue;

fn siegel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel")).args(args).output().expect("binary runs")
}

fn fixture(name: &str, v: &Value) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.display().to_string()
}

fn matrix_fixture(name: &str, m: &IntMatrix) -> String {
    fixture(name, &m.to_json())
}

/// Parses stdout as `T`, then checks serialize → parse is the identity.
fn round_trip<T: Serialize + DeserializeOwned + PartialEq + Debug>(out: &Output) -> T {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let first: T = serde_json::from_slice(&out.stdout).expect("stdout matches the schema");
    let again: T = serde_json::from_str(&serde_json::to_string(&first).unwrap()).unwrap();
    assert_eq!(first, again);
    first
}

fn point(re: f64, im: f64) -> Value {
    json!({"genus": 1, "re": [[re]], "im": [[im]]})
}

#[test]
fn classes_at_scale_two() {
    let out: ClassesOutput = round_trip(&siegel(&["classes", "--dim", "4", "--scale", "2"]));
    assert_eq!(out.count, 6);
    assert_eq!(out.classes.len(), 6);
}

#[test]
fn isotropy_of_the_example() {
    let s = matrix_fixture("example.json", example_form().matrix());
    let out: MaximalGroupsOutput = round_trip(&siegel(&["isotropy", "--form", &s, "--level", "4", "--maximal"]));
    assert_eq!(out.count, 3);
    assert_eq!(out.module_order, "4");
    let v = matrix_fixture("v1.json", &example_generators()[0]);
    let test: IsotropyTestOutput = round_trip(&siegel(&["isotropy", "--form", &s, "--test", &v]));
    assert!(test.isotropic);
}

#[test]
fn gram_roots_of_the_example() {
    let s = matrix_fixture("example-roots.json", example_form().matrix());
    for (i, (v, a)) in example_generators().iter().zip(example_roots()).enumerate() {
        let vf = matrix_fixture(&format!("v{i}.json"), v);
        let out: GramRootOutput = round_trip(&siegel(&["gram-root", "--form", &s, "--isotropic", &vf, "--dedup"]));
        assert!(out.count > 0);
        let af = matrix_fixture(&format!("a{i}.json"), &a);
        let check: RootVerification = round_trip(&siegel(&["gram-root", "--form", &s, "--isotropic", &vf, "--verify", &af]));
        assert!(check.valid);
    }
}

#[test]
fn theta_eval_at_i() {
    let spec = fixture("nullwert.json", &json!({"kind": "nullwert", "a": ["0"], "b": ["0"]}));
    let tau = fixture("i.json", &point(0.0, 1.0));
    let out: CertifiedValue = round_trip(&siegel(&["theta", "eval", "--spec", &spec, "--tau", &tau, "--eps", "1e-12"]));
    assert!((out.value.re - 1.086_434_811_213_308_1).abs() <= 1e-11);
    let raw: Value = serde_json::from_slice(&siegel(&["theta", "eval", "--spec", &spec, "--tau", &tau]).stdout).unwrap();
    assert!(raw["value"].as_array().is_some_and(|v| v.len() == 2));
}

#[test]
fn mumford_instance() {
    let inst = fixture(
        "instance.json",
        &json!({
            "t": {"rows": 1, "cols": 1, "data": [["1"]]},
            "a": {"rows": 1, "cols": 1, "data": [["1/2"]]},
            "p": {"rows": 1, "cols": 1, "data": [["0"]]},
            "q": {"rows": 1, "cols": 1, "data": [["1/2"]]}
        }),
    );
    let tau = fixture("tau-mumford.json", &point(0.1, 0.9));
    let out: RelationCheck = round_trip(&siegel(&["mumford", "--instance", &inst, "--tau", &tau]));
    assert_eq!((out.k1, out.k2), (2, 1));
    assert!(out.residual <= out.lhs.bound + out.rhs.bound);
}

#[test]
fn epsilon_and_transformation() {
    let s = matrix_fixture("det2.json", &IntMatrix::from_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 2]]));
    let m = matrix_fixture("m.json", &IntMatrix::from_rows(&[&[13, 8], &[8, 5]]));
    let out: EpsilonOutput = round_trip(&siegel(&["epsilon", "--form", &s, "--matrix", &m]));
    assert_eq!(out.epsilon, -1);
    let e4 = matrix_fixture("e4.json", &IntMatrix::identity(4));
    let tau = fixture("tau-transform.json", &point(-0.625, 0.15));
    let check: TransformCheck = round_trip(&siegel(&["transform-check", "--form", &e4, "--matrix", &m, "--tau", &tau]));
    assert_eq!(check.epsilon, 1);
    assert!((check.ratio.re - 1.0).abs() <= 1e-6 && check.ratio.im.abs() <= 1e-6);
}

#[test]
fn dims_reports() {
    let out: DimReport = round_trip(&siegel(&["dims", "--which", "4-8", "--genus", "2"]));
    assert_eq!(out.value, 695.into());
    assert!(out.paths_agree());
    let flagged: DimReport = round_trip(&siegel(&["dims", "--which", "4-8", "--genus", "5"]));
    assert!(flagged.outside_validity);
    let raw: Value = serde_json::from_slice(&siegel(&["dims", "--which", "2", "--genus", "3"]).stdout).unwrap();
    assert_eq!(raw["value"], json!("15"));
}

#[test]
fn span_ranks() {
    let out: SpanRank = round_trip(&siegel(&["span-rank", "--genus", "1", "--degree", "4", "--cutoff", "32"]));
    assert_eq!((out.monomials, out.rank), (15, 14));
    assert!(out.stabilized);
    let f: SpanRank = round_trip(&siegel(&["span-rank", "--degree", "4", "--cutoff", "32", "--second-kind"]));
    assert_eq!(f.rank, 5);
}

#[test]
fn reproduce_subset_and_unknown_item() {
    let report: Report = round_trip(&siegel(&["reproduce-paper", "--only", "dims", "--only", "ranks"]));
    assert!(report.passed);
    assert_eq!(report.items.len(), 2);
    let bad = siegel(&["reproduce-paper", "--only", "nonsense"]);
    assert!(!bad.status.success());
}

#[test]
fn flipped_sign_fixture_is_rejected_with_context() {
    let neg = IntMatrix::from_rows(&[&[-2, 0, -1, -1], &[0, -2, -1, 1], &[-1, -1, -2, 0], &[-1, 1, 0, -2]]);
    let s = matrix_fixture("flipped.json", &neg);
    let out = siegel(&["isotropy", "--form", &s, "--maximal"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not positive definite") && err.contains("flipped.json"), "{err}");
}

#[test]
fn manifests_are_reproducible() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let s = matrix_fixture("manifest-form.json", example_form().matrix());
    let digests: Vec<RunManifest> = (0..2)
        .map(|k| {
            let path = dir.join(format!("manifest-{k}.json"));
            let path = path.display().to_string();
            assert!(siegel(&["isotropy", "--form", &s, "--maximal", "--manifest", &path]).status.success());
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
        })
        .collect();
    assert_eq!(digests[0].result_digest, digests[1].result_digest);
    assert_eq!(digests[0].input_digests, digests[1].input_digests);
    assert_eq!(digests[0].input_digests.len(), 1);
}
