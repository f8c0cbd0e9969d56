use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use epoly::cli::{self, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use proptest::prelude::*;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_epoly"));
    c.env_remove(cli::EXPECTED_ENV);
    c
}

fn scratch(contents: &str) -> PathBuf {
    static N: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("epoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{}.sx", N.fetch_add(1, Ordering::Relaxed)));
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("epoly").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn audit_sl_json() {
    let out = bin().args(["audit", "--suite", "sl", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let documented: Vec<&str> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] == "documented")
        .map(|e| e["label"].as_str().unwrap())
        .collect();
    assert_eq!(documented, ["IE.SL"]);
    assert!(v["entries"].as_array().unwrap().iter().all(|e| e["status"] != "mismatch"));
}

#[test]
fn missing_file() {
    let (code, out, err) = run(&["eval", "missing.sx"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("cannot read missing.sx"), "{err}");
}

#[test]
fn betti_command() {
    let (code, out, _) = run(&["betti", "IE.SL", "--dim", "6"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "1 0 1 0 17 0 17\n"));
    let (code, out, _) = run(&["betti", "gl:IE", "--dim", "10", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["betti"], serde_json::json!([1, 4, 7, 8, 9, 12, 15, 16, 14, 8, 2]));
    assert_eq!(run(&["betti", "Nowhere", "--dim", "2"]).0, EXIT_USAGE);
    // a Jacobian under the signed convention has negative odd weights
    assert_eq!(run(&["betti", "B.Jac", "--dim", "2", "--convention", "signed"]).0, EXIT_FAILED);
}

#[test]
fn usage_errors() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["audit", "--suite", "xl"]).0, EXIT_USAGE);
    assert_eq!(run(&["betti", "IE.SL"]).0, EXIT_USAGE);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("audit"));
}

#[test]
fn parse_error_reports_position() {
    let path = scratch("space X = Point;\nspace Y = Z;\n");
    let (code, _, err) = run(&["eval", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains(":2:11: unbound name 'Z'"), "{err}");
}

#[test]
fn eval_convention_flag() {
    let path = scratch("space J = Abelian(1);\nexpect(J, uv + u + v + 1);\n");
    let path = path.to_str().unwrap();
    assert_eq!(run(&["eval", path]).0, EXIT_FAILED);
    assert_eq!(run(&["eval", path, "--convention", "unsigned"]).0, EXIT_OK);
    let pinned = scratch("convention signed;\nspace J = Abelian(1);\nexpect(J, uv - u - v + 1);\n");
    assert_eq!(run(&["eval", pinned.to_str().unwrap(), "--convention", "unsigned"]).0, EXIT_OK);
}

#[test]
fn bundled_programs_evaluate_cleanly() {
    for f in ["sl.sx", "gl.sx"] {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/").to_string() + f;
        let (code, out, _) = run(&["eval", &path]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(!out.contains("mismatch"));
    }
}

#[test]
fn expected_override() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/expected.json")).unwrap();
    let tampered = text.replacen("[3, 3, 16]]", "[3, 3, 17]]", 1);
    assert_ne!(text, tampered);
    let path = scratch(&tampered);
    let out = bin().args(["audit", "--suite", "sl"]).env(cli::EXPECTED_ENV, &path).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAILED));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mismatch"));

    let out = bin().args(["audit"]).env(cli::EXPECTED_ENV, "/nonexistent/expected.json").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let broken = scratch("[{");
    let out = bin().args(["audit"]).env(cli::EXPECTED_ENV, &broken).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn audit_text_is_stable() {
    let a = bin().arg("audit").output().unwrap();
    let b = bin().arg("audit").output().unwrap();
    assert_eq!(a.status.code(), Some(EXIT_OK));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("0 failures, 4 documented discrepancies"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A program fails exactly when one of its expectations is wrong.
    #[test]
    fn exit_code_tracks_expectations(cases in prop::collection::vec((0u32..4, 0u32..3, any::<bool>()), 0..6)) {
        let mut src = String::new();
        for (i, (n, g, correct)) in cases.iter().enumerate() {
            src += &format!("space X{i} = Proj({n}) * Abelian({g});\n");
            let mut e = String::from("0");
            for k in 0..=*n {
                e += &format!(" + u^{k}v^{k}");
            }
            let mut want: epoly::poly::BivariatePoly = e.parse().unwrap();
            let jac: epoly::poly::BivariatePoly = "1 - u - v + uv".parse().unwrap();
            for _ in 0..*g {
                want = &want * &jac;
            }
            if !correct {
                want = &want + &epoly::poly::BivariatePoly::one();
            }
            src += &format!("expect(X{i}, {want});\n");
        }
        let path = scratch(&src);
        let (code, _, _) = run(&["eval", path.to_str().unwrap(), "--format", "json"]);
        let want = if cases.iter().all(|c| c.2) { EXIT_OK } else { EXIT_FAILED };
        prop_assert_eq!(code, want);
    }
}
