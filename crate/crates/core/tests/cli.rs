use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lintensor(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lintensor")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SOLVABLE: &[&str] = &[
    "batch.json",
    "identity.json",
    "levi_civita.json",
    "levi_civita_rational.json",
    "oracle.json",
    "rank2.json",
    "rank3_random.json",
    "rank4.json",
    "traced.json",
    "traced_rational.json",
];

#[test]
fn round_trip_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for name in SOLVABLE {
        let out = dir.path().join(name);
        let solve = lintensor(&["solve", "-i", s(&fixture(name)), "-o", s(&out)]);
        assert_eq!(solve.code, 0, "{name}: {}", solve.stderr);
        assert!(solve.stderr.contains("residual_inf="), "{name}");
        let verify = lintensor(&["verify", "-i", s(&fixture(name)), "-s", s(&out)]);
        assert_eq!(verify.code, 0, "{name}: {}{}", verify.stdout, verify.stderr);
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["batch.json", "traced.json", "levi_civita_rational.json"] {
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        assert_eq!(lintensor(&["solve", "-i", s(&fixture(name)), "-o", s(&a)]).code, 0);
        assert_eq!(lintensor(&["solve", "-i", s(&fixture(name)), "-o", s(&b)]).code, 0);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{name}");
    }
}

#[test]
fn solution_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    assert_eq!(lintensor(&["solve", "-i", s(&fixture("identity.json")), "-o", s(&out)]).code, 0);
    let sol = read_json(&out);
    let problem = read_json(&fixture("identity.json"));
    assert_eq!(sol["N"], problem["B"]);
    assert_eq!(sol["path"], "plain");
    assert_eq!(sol["inverse_first_row"], serde_json::json!([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    assert_eq!(sol["canonical_order"][1], serde_json::json!([3, 1, 2]));
    assert_eq!(sol["rank_within_dimension"], true);
    assert_eq!(sol["degeneracy"]["singular"], false);

    assert_eq!(lintensor(&["solve", "-i", s(&fixture("levi_civita_rational.json")), "-o", s(&out)]).code, 0);
    let sol = read_json(&out);
    assert_eq!(sol["path"], "reduced");
    assert_eq!(sol["inverse_first_row"], serde_json::json!(["-1/2", "1/2", "1/2"]));
    assert_eq!(sol["residual_inf"], "0");

    assert_eq!(lintensor(&["solve", "-i", s(&fixture("batch.json")), "-o", s(&out)]).code, 0);
    assert_eq!(read_json(&out)["solutions"].as_array().unwrap().len(), 5);
}

#[test]
fn batch_matches_individual_solves() {
    let dir = tempfile::tempdir().unwrap();
    let batch_out = dir.path().join("batch_out.json");
    assert_eq!(lintensor(&["solve", "-i", s(&fixture("batch.json")), "-o", s(&batch_out)]).code, 0);
    let batch = read_json(&batch_out);
    let mut problem = read_json(&fixture("batch.json"));
    let items = problem["batch"].as_array().unwrap().clone();
    problem.as_object_mut().unwrap().remove("batch");
    for (i, b) in items.into_iter().enumerate() {
        problem["B"] = b;
        let single_in = dir.path().join("single.json");
        let single_out = dir.path().join("single_out.json");
        std::fs::write(&single_in, problem.to_string()).unwrap();
        assert_eq!(lintensor(&["solve", "-i", s(&single_in), "-o", s(&single_out)]).code, 0);
        assert_eq!(read_json(&single_out)["N"], batch["solutions"][i]["N"]);
    }
}

#[test]
fn singular_system_exits_2_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let run = lintensor(&["solve", "-i", s(&fixture("cyclic_singular.json")), "-o", s(&out)]);
    assert_eq!(run.code, 2, "{}", run.stderr);
    let report = read_json(&out);
    assert_eq!(report["error"], "singular-system");
    assert_eq!(report["degeneracy"]["singular"], true);
    assert!(report["degeneracy"]["vanishing"].as_array().unwrap().contains(&Value::from("sigma1")));
    assert_eq!(report["degeneracy"]["nullity"], 2);
}

#[test]
fn verify_rejects_perturbed_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    assert_eq!(lintensor(&["solve", "-i", s(&fixture("rank3_random.json")), "-o", s(&out)]).code, 0);
    let mut sol = read_json(&out);
    let v = sol["N"]["values"][5].as_f64().unwrap();
    sol["N"]["values"][5] = Value::from(v + 1e-3);
    std::fs::write(&out, sol.to_string()).unwrap();
    let run = lintensor(&["verify", "-i", s(&fixture("rank3_random.json")), "-s", s(&out)]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("FAILED"));
}

#[test]
fn analyze_reports() {
    let run = lintensor(&["analyze", "-i", s(&fixture("cyclic_singular.json"))]);
    assert_eq!(run.code, 0);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(report["coefficient_matrix"]["singular"], true);
    assert_eq!(report["coefficient_matrix"]["vanishing"][0], "sigma1");

    let run = lintensor(&["analyze", "-i", s(&fixture("identity.json"))]);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(report["coefficient_matrix"]["det"], 1.0);
    assert_eq!(report["coefficient_matrix"]["singular"], false);

    for name in ["rank3_random.json", "traced_rational.json", "levi_civita.json"] {
        let run = lintensor(&["analyze", "-i", s(&fixture(name))]);
        assert_eq!(run.code, 0, "{name}");
        let report: Value = serde_json::from_str(&run.stdout).unwrap();
        assert_eq!(report["det_matches_sigma"], true, "{name}");
    }
    let run = lintensor(&["analyze", "-i", s(&fixture("traced.json"))]);
    let report: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(report["gamma"]["size"], 3);
}

#[test]
fn coeffs_command() {
    let run = lintensor(&["coeffs", "--rank", "3", "--coefficients", "0,1,1,0,0,0", "--symmetry", "2,3,+1", "--rational"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let out: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(out["inverse_first_row"], serde_json::json!(["-1/2", "1/2", "1/2"]));

    let run = lintensor(&["coeffs", "--rank", "3", "--coefficients", "1,0,0,0,0,0"]);
    let out: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(out["inverse_first_row"], serde_json::json!([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));

    let run = lintensor(&["coeffs", "--rank", "2", "--coefficients", "3,1", "--rational", "--full-inverse"]);
    let out: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(out["inverse_first_row"], serde_json::json!(["3/8", "-1/8"]));
    assert_eq!(out["inverse"][1], serde_json::json!(["-1/8", "3/8"]));

    let run = lintensor(&["coeffs", "--rank", "3", "--coefficients", "-1,0,1,0,0,0"]);
    assert_eq!(run.code, 2);
}

#[test]
fn invalid_input_exits_3_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0]}"#, "coefficients"),
        (r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "B": {"shape": [2, 2], "values": [1, 2, 3, true]}}"#, "B.values[3]"),
        (r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "B": {"shape": [2, 3], "values": [1, 2, 3, 4]}}"#, "B.shape"),
        (r#"{"rank": 2, "dim": 2, "coefficients": [1, 0]}"#, "B"),
        (r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "mode": "traced"}"#, "metric"),
        ("not json", ""),
    ];
    for (text, path) in cases {
        let input = dir.path().join("bad.json");
        std::fs::write(&input, text).unwrap();
        let run = lintensor(&["solve", "-i", s(&input), "-o", s(&dir.path().join("out.json"))]);
        assert_eq!(run.code, 3, "{text}");
        assert!(run.stderr.contains(path), "{text}: {}", run.stderr);
    }
    // Source inconsistent with the declared symmetry.
    let mut p = read_json(&fixture("rank3_random.json"));
    p["coefficients"] = serde_json::json!([0, 1, 1, 0, 0, 0]);
    p["symmetry"] = serde_json::json!({"pair": [2, 3], "sign": 1});
    let input = dir.path().join("asym.json");
    std::fs::write(&input, p.to_string()).unwrap();
    let run = lintensor(&["solve", "-i", s(&input), "-o", s(&dir.path().join("out.json"))]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("symmetry"));

    assert_eq!(lintensor(&["frobnicate"]).code, 3);
    assert_eq!(lintensor(&["solve", "-i", "/nonexistent.json", "-o", "/tmp/x.json"]).code, 3);
    assert_eq!(lintensor(&["coeffs", "--rank", "3"]).code, 3);
    assert_eq!(lintensor(&["coeffs", "--rank", "3", "--coefficients", "1,0,0,0,0,0", "--symmetry", "1,1,+1"]).code, 3);
}
