use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::{Registry, Resource, Validator};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_opclass");

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validator(name: &str) -> Validator {
    let mut registry = Registry::new();
    let mut root = None;
    for entry in std::fs::read_dir(schema_dir()).unwrap() {
        let path = entry.unwrap().path();
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let id = schema["$id"].as_str().unwrap().to_string();
        if path.file_name().unwrap() == name {
            root = Some(schema.clone());
        }
        registry = registry.add(id, Resource::from_contents(schema)).unwrap();
    }
    let registry = registry.prepare().unwrap();
    jsonschema::options()
        .with_registry(&registry)
        .build(&root.expect("schema exists"))
        .unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

fn opclass(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("OPCLASS_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const J2: &str = r#"{"dim":2,"entries":[[0,0],[1,0],[0,0],[0,0]]}"#;
const I3: &str = r#"{"dim":3,"entries":[[1,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[1,0]]}"#;
const FIVE_J2: &str = r#"{"dim":3,"entries":[[5,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0]]}"#;
const ONE_J2: &str = r#"{"dim":3,"entries":[[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0]]}"#;
const J3: &str = r#"{"dim":3,"entries":[[0,0],[1,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0]]}"#;

fn statuses(doc: &Value) -> Vec<(String, String)> {
    doc["verdicts"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn classify_identity_is_member_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.json", I3);
    let out = opclass(dir.path(), &["classify", "i.json"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_valid("verdict.schema.json", &doc);
    assert!(statuses(&doc).iter().all(|(_, s)| s == "Member"));
}

#[test]
fn classify_j2_with_k_list() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "j2.json", J2);
    let out = opclass(dir.path(), &["classify", "j2.json", "--k", "1", "2"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_valid("verdict.schema.json", &doc);
    let st = |c: &str| doc["verdicts"][c]["status"].as_str().unwrap().to_string();
    assert_eq!(st("KQuasiParanormal(1)"), "Member");
    assert_eq!(st("KQuasiParanormal(2)"), "Member");
    assert_eq!(st("Paranormal"), "NonMember");
    assert_eq!(st("Normaloid"), "NonMember");
    assert!(doc["verdicts"].get("KQuasiParanormal(3)").is_none());
}

#[test]
fn classify_rejects_non_square_and_garbage() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "r.mtx", "%%MatrixMarket matrix coordinate complex general\n2 3 1\n1 1 1 0\n");
    let out = opclass(dir.path(), &["classify", "r.mtx"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not square"));
    write(dir.path(), "bad.json", r#"{"dim":2,"entries":[[1,0]]}"#);
    assert_eq!(code(&opclass(dir.path(), &["classify", "bad.json"])), 1);
    assert_eq!(code(&opclass(dir.path(), &["classify", "missing.json"])), 1);
    write(dir.path(), "i.json", I3);
    assert_eq!(code(&opclass(dir.path(), &["classify", "i.json", "--p", "2"])), 1);
}

#[test]
fn format_flag_overrides_extension() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "j2.txt", "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n");
    assert_eq!(code(&opclass(dir.path(), &["classify", "j2.txt"])), 1);
    let out = opclass(dir.path(), &["classify", "j2.txt", "--format", "matrix-market"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdicts"]["Paranormal"]["status"], "NonMember");
}

#[test]
fn decompose_normal_pure() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.json", FIVE_J2);
    let out = opclass(dir.path(), &["decompose", "normal-pure", "t.json"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_valid("decomposition.schema.json", &doc);
    assert_eq!(doc["labels"], serde_json::json!(["NormalPart", "PurePart"]));
    assert_eq!(doc["block_dims"], serde_json::json!([1, 2]));
    let five = &doc["blocks"][0]["entries"][0];
    assert!((five[0].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!(doc["residuals"]["reassembly"].as_f64().unwrap() < 1e-12);
}

#[test]
fn decompose_root_and_hypothesis_violation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "t.json", ONE_J2);
    let out = opclass(dir.path(), &["decompose", "root", "t.json", "--n", "2", "--k", "1", "-o", "d.json"]);
    assert_eq!(code(&out), 0);
    let doc = read_json(&dir.path().join("d.json"));
    assert_valid("decomposition.schema.json", &doc);
    assert_eq!(doc["labels"], serde_json::json!(["NormalPart", "NilpotentPart"]));
    assert_eq!(doc["block_dims"], serde_json::json!([1, 2]));

    write(dir.path(), "j3.json", J3);
    let out = opclass(dir.path(), &["decompose", "root", "j3.json", "--n", "3", "--k", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis violated"));
}

#[test]
fn decompose_nilpotent2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "j2.json", J2);
    let out = opclass(dir.path(), &["decompose", "nilpotent2", "j2.json"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_valid("decomposition.schema.json", &doc);
    assert!((doc["C"]["entries"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    write(dir.path(), "j3.json", J3);
    assert_eq!(code(&opclass(dir.path(), &["decompose", "nilpotent2", "j3.json"])), 1);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = opclass(dir.path(), &["generate", "counterexample", "--dim-m", "2", "--dim-n", "2", "--seed", "7", "-o", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    let sidecar = read_json(&dir.path().join("a.json.sidecar.json"));
    assert_valid("sidecar.schema.json", &sidecar);
    assert_valid("matrix.schema.json", &read_json(&dir.path().join("a.json")));
    assert_eq!(sidecar["all_confirmed"], true);
    let o = opclass(dir.path(), &["generate", "counterexample", "--seed", "8", "-o", "c.json"]);
    assert_eq!(code(&o), 0);
    assert_ne!(a, std::fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn generate_jordan_certifies_nil_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = opclass(dir.path(), &["generate", "jordan", "--dim", "4", "--index", "3", "--seed", "1", "-o", "j.mtx"]);
    assert_eq!(code(&o), 0);
    let sidecar = read_json(&dir.path().join("j.mtx.sidecar.json"));
    assert_valid("sidecar.schema.json", &sidecar);
    assert_eq!(sidecar["format"], "matrix-market");
    let certs = sidecar["certifications"].as_array().unwrap();
    let nil = certs.iter().find(|c| c["property"] == "NilIndex(3)").unwrap();
    assert_eq!(nil["observed"], "Member");
    assert_eq!(nil["confirmed"], true);
    let text = std::fs::read_to_string(dir.path().join("j.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix array complex general"));
}

#[test]
fn generate_rr_certifies_square_root_of_normal() {
    let dir = tempfile::tempdir().unwrap();
    let o = opclass(dir.path(), &["generate", "rr", "--seed", "3", "-o", "r.json"]);
    assert_eq!(code(&o), 0);
    let sidecar = read_json(&dir.path().join("r.json.sidecar.json"));
    assert_eq!(sidecar["certifications"][0]["property"], "SquareRootOfNormal");
    assert_eq!(sidecar["certifications"][0]["observed"], "Member");
}

#[test]
fn generate_needs_seed_and_valid_spec() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&opclass(dir.path(), &["generate", "ginibre", "--dim", "3", "-o", "g.json"])), 1);
    assert_eq!(code(&opclass(dir.path(), &["generate", "jordan", "--dim", "2", "--index", "3", "--seed", "1", "-o", "g.json"])), 1);
    assert!(!dir.path().join("g.json").exists());
    let o = Command::new(BIN)
        .args(["generate", "ginibre", "--dim", "3", "-o", "g.json"])
        .current_dir(dir.path())
        .env("OPCLASS_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&dir.path().join("g.json.sidecar.json"))["spec"]["seed"], 5);
}

#[test]
fn generate_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", r#"{"kind":"k-quasi","dim_normal":2,"dim_nil":3,"k":2,"seed":0}"#);
    let o = opclass(dir.path(), &["generate", "spec", "spec.json", "--seed", "4", "-o", "k.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sidecar = read_json(&dir.path().join("k.json.sidecar.json"));
    assert_eq!(sidecar["spec"]["seed"], 4);
    assert_eq!(sidecar["all_confirmed"], true);
}

#[test]
fn generate_then_classify_reproduces_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["counterexample", "--seed", "11", "-o", "a.json"],
        &["k-quasi", "--dim-normal", "2", "--dim-nil", "3", "--k", "2", "--seed", "12", "-o", "b.mtx"],
        &["ginibre", "--dim", "4", "--seed", "13", "-o", "c.json"],
        &["scalar-root", "--dim", "3", "--n", "3", "--lambda", "8,0", "--seed", "14", "-o", "d.mtx"],
    ];
    for args in cases {
        let mut full = vec!["generate"];
        full.extend_from_slice(args);
        assert_eq!(code(&opclass(dir.path(), &full)), 0);
        let out_name = args[args.len() - 1];
        let seed = args[args.iter().position(|a| *a == "--seed").unwrap() + 1];
        let sidecar = read_json(&dir.path().join(format!("{out_name}.sidecar.json")));
        let o = opclass(dir.path(), &["classify", out_name, "--seed", seed]);
        assert_eq!(stdout_json(&o), sidecar["classification"], "{out_name}");
    }
}

#[test]
fn verify_ando_records_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let o = opclass(dir.path(), &["verify", "ando", "--trials", "10", "-o", "r.json"]);
    assert_eq!(code(&o), 0);
    let report = read_json(&dir.path().join("r.json"));
    assert_valid("report.schema.json", &report);
    let obs = report["reports"][0]["observations"].as_array().unwrap();
    assert!(obs.iter().any(|o| o["kind"] == "counterexample-confirmation"));
    let o = opclass(dir.path(), &["report", "r.json"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("ando"));
}

#[test]
fn verify_unknown_theorem_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = opclass(dir.path(), &["verify", "bogus-id", "-o", "r.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown theorem"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn verify_canonical_reports_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = opclass(dir.path(), &["verify", "embry", "fuglede-putnam", "--trials", "20", "--seed", "9", "--canonical", "-o", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !n.ends_with(".json"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&opclass(dir.path(), &[])), 1);
    assert_eq!(code(&opclass(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&opclass(dir.path(), &["decompose", "sideways", "t.json"])), 1);
    assert_eq!(code(&opclass(dir.path(), &["--help"])), 0);
}
