//! End-to-end tests of the `peakshave` binary: every subcommand, every exit
//! code, and byte-level determinism of the JSON output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_peakshave"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Generates an instance into `dir` and returns its path.
fn gen_instance(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.push("-o");
    all.push(path_str(&path));
    let out = run(&all);
    assert_eq!(code(&out), 0, "gen failed: {}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_solve_verify_round_trip_succeeds() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "3", "-t", "8", "--seed", "11", "--profile", "diurnal"]);
    let sol = dir.path().join("sol.json");

    let out = run(&["solve", path_str(&inst), "--objective", "absolute", "-o", path_str(&sol)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let report: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(report["objective"], "absolute");
    let gap = report["gap"].as_f64().unwrap();
    let limit = report["bound_limit"].as_f64().unwrap();
    assert!(gap >= -1e-6 && gap <= limit + 1e-6, "gap {gap} vs limit {limit}");

    let out = run(&["verify", path_str(&inst), "--schedule", path_str(&sol), "--objective", "absolute"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verdict = stdout_json(&out);
    assert_eq!(verdict["verified"], Value::Bool(true));
    assert_eq!(verdict["feasible"], Value::Bool(true));
    assert_eq!(verdict["certificate_ok"], Value::Bool(true));
}

#[test]
fn verify_accepts_a_bare_schedule_matrix() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "5", "--seed", "4"]);
    let out = run(&["solve", path_str(&inst)]);
    assert_eq!(code(&out), 0);
    let schedule = stdout_json(&out)["schedule"].clone();

    let bare = dir.path().join("bare.json");
    std::fs::write(&bare, serde_json::to_string(&schedule).unwrap()).unwrap();
    let out = run(&["verify", path_str(&inst), "--schedule", path_str(&bare)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["verified"], Value::Bool(true));
}

#[test]
fn verify_rejects_a_tampered_schedule_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "6", "--seed", "21", "--force-run"]);
    let out = run(&["solve", path_str(&inst)]);
    assert_eq!(code(&out), 0);
    let mut schedule = stdout_json(&out)["schedule"].clone();

    // Flipping one bit must break feasibility or a certificate; either way
    // the verdict is "not verified".
    let bit = schedule[0][0].as_u64().unwrap();
    schedule[0][0] = Value::from(1 - bit);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&schedule).unwrap()).unwrap();

    let out = run(&["verify", path_str(&inst), "--schedule", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["verified"], Value::Bool(false));
}

#[test]
fn verify_rejects_a_shape_mismatch() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "5", "--seed", "4"]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[[0,1],[1,0]]").unwrap();
    let out = run(&["verify", path_str(&inst), "--schedule", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));
}

#[test]
fn infeasible_instance_exits_2_from_solve_and_oracle() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "4", "--seed", "9"]);
    let mut parsed: Value =
        serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    // No storage window survives a demand this far above total throughput.
    parsed["converters"][0]["demand"][0] = Value::from(1000);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_string(&parsed).unwrap()).unwrap();

    let out = run(&["solve", path_str(&broken)]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["oracle", path_str(&broken)]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_cap_exceeded_exits_3() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "4", "-t", "10", "--seed", "2"]);
    let out = run(&["oracle", path_str(&inst)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));

    // Raising the cap turns the same instance solvable.
    let out = run(&["oracle", path_str(&inst), "--oracle-cap", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["value"].is_number());
}

#[test]
fn identical_seeds_and_flags_give_byte_identical_output() {
    let dir = TempDir::new().unwrap();
    let args = ["-c", "3", "-t", "7", "--seed", "33", "--profile", "diurnal"];
    let a = gen_instance(&dir, "a.json", &args);
    let b = gen_instance(&dir, "b.json", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let s1 = run(&["solve", path_str(&a), "--objective", "fluctuation"]);
    let s2 = run(&["solve", path_str(&b), "--objective", "fluctuation"]);
    assert_eq!(code(&s1), 0);
    assert_eq!(s1.stdout, s2.stdout);

    let c1 = run(&["compare", "--batch", "3", "-c", "2", "-t", "4", "--seed", "5"]);
    let c2 = run(&["compare", "--batch", "3", "-c", "2", "-t", "4", "--seed", "5"]);
    assert_eq!(code(&c1), 0);
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn compare_batch_respects_the_error_bound_on_every_case() {
    let out = run(&[
        "compare", "--batch", "8", "-c", "2", "-t", "5", "--seed", "17",
        "--objective", "maximal", "--force-run",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["all_respected"], Value::Bool(true));
    let cases = report["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 8);
    for case in cases {
        assert_eq!(case["bound_respected"], Value::Bool(true));
        let gap = case["gap"].as_f64().unwrap();
        let limit = case["bound_limit"].as_f64().unwrap();
        assert!(gap >= -1e-6 && gap <= limit + 1e-6);
        // The pipeline can never beat the exact optimum.
        assert!(case["approx_value"].as_f64().unwrap() >= case["exact_value"].as_f64().unwrap() - 1e-6);
        assert!(case["lp_bound"].as_f64().unwrap() <= case["exact_value"].as_f64().unwrap() + 1e-6);
    }
}

#[test]
fn compare_on_a_single_file_reports_one_case() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "4", "--seed", "1"]);
    let out = run(&["compare", path_str(&inst), "--objective", "basic"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["cases"].as_array().unwrap().len(), 1);
    assert!(report["cases"][0]["seed"].is_null() || report["cases"][0].get("seed").is_none());
}

#[test]
fn zero_draw_converters_are_scheduled_and_reported() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "2", "-t", "4", "--seed", "3"]);
    let mut parsed: Value =
        serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    // A converter that draws no electricity but must run every interval to
    // keep its buffer inside the (pinned) storage window.
    parsed["converters"].as_array_mut().unwrap().push(serde_json::json!({
        "id": "z0", "E": 0, "H": 1,
        "demand": [1, 1, 1, 1],
        "soc_lower": [0, 0, 0, 0, 0],
        "soc_upper": [0, 0, 0, 0, 0],
    }));
    let mixed = dir.path().join("mixed.json");
    std::fs::write(&mixed, serde_json::to_string(&parsed).unwrap()).unwrap();

    let sol = dir.path().join("sol.json");
    let out = run(&["solve", path_str(&mixed), "-o", path_str(&sol)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(report["zero_draw_converters"], serde_json::json!(["z0"]));
    assert_eq!(report["schedule"][2], serde_json::json!([1, 1, 1, 1]));

    let out = run(&["verify", path_str(&mixed), "--schedule", path_str(&sol)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["verified"], Value::Bool(true));
}

#[test]
fn bad_arguments_exit_1_and_help_exits_0() {
    let out = run(&["solve", "/nonexistent-instance.json"]);
    assert_eq!(code(&out), 1);

    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "1", "-t", "2", "--seed", "0"]);
    let out = run(&["solve", path_str(&inst), "--objective", "bogus"]);
    assert_eq!(code(&out), 1);

    let out = run(&["gen", "-c", "0", "-t", "4"]);
    assert_eq!(code(&out), 1);

    let out = run(&["compare", path_str(&inst), "--batch", "2"]);
    assert_eq!(code(&out), 1);
    let out = run(&["compare"]);
    assert_eq!(code(&out), 1);

    let out = run(&["no-such-subcommand"]);
    assert_eq!(code(&out), 1);

    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn malformed_instance_json_exits_1() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["solve", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot parse"));
}

#[test]
fn solve_handles_every_objective() {
    let dir = TempDir::new().unwrap();
    let inst = gen_instance(&dir, "inst.json", &["-c", "3", "-t", "6", "--seed", "8", "--profile", "diurnal"]);
    for objective in ["basic", "maximal", "absolute", "fluctuation"] {
        let out = run(&["solve", path_str(&inst), "--objective", objective]);
        assert_eq!(code(&out), 0, "{objective}: {}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        assert_eq!(report["objective"], objective);
        // The headline value is the schedule's value under that objective.
        assert_eq!(report["value"], report["objectives"][objective]);
    }
}
