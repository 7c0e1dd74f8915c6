//! End-to-end tests of the `diampreserve` binary: exit codes, JSON
//! shapes, pipes between commands, and byte stability.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diampreserve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(input)
        .expect("stdin written");
    child.wait_with_output().expect("binary exits")
}

fn write_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).expect("temp file written");
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const IDENTITY_3: &str = r#"{
  "schema": "diampreserve/1",
  "field": "real", "n": 3, "mode": "exact",
  "rows": [["1","0","0"],["0","1","0"],["0","0","1"]]
}"#;

const DOUBLED_2: &str = r#"{"field":"real","n":2,"mode":"exact","rows":[["2","0"],["0","2"]]}"#;

#[test]
fn check_identity_is_preserving() {
    let path = write_file("identity3.json", IDENTITY_3);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["verdict"], "preserving");
    assert_eq!(json["numerical"], false);
    assert_eq!(json["certificate"]["tau"]["re"], "1");
    assert_eq!(json["certificate"]["sigma"], serde_json::json!([0, 1, 2]));
}

#[test]
fn check_doubling_is_refuted_with_a_witness() {
    let path = write_file("doubled2.json", DOUBLED_2);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let json = stdout_json(&out);
    assert_eq!(json["verdict"], "not_preserving");
    assert_eq!(json["witness"]["vector"], serde_json::json!(["0", "1"]));
    assert_eq!(json["witness"]["diam_squared_before"], "1");
    assert_eq!(json["witness"]["diam_squared_after"], "4");
}

#[test]
fn malformed_input_exits_three() {
    let ragged = r#"{"field":"real","n":3,"mode":"exact","rows":[["1","0","0","0"],["0","1","0","0"],["0","0","1","0"]]}"#;
    let path = write_file("ragged.json", ragged);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(!out.stderr.is_empty());

    let out = run(&["check", "/nonexistent/matrix.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn generate_pipes_into_decompose_and_round_trips() {
    let gen = run(&["generate", "--n", "5", "--field", "complex", "--seed", "7"]);
    assert_eq!(code(&gen), 0);
    let bundle = stdout_json(&gen);
    let expected_form = bundle["form"].clone();

    let dec = run_with_stdin(&["decompose", "-"], &gen.stdout);
    assert_eq!(code(&dec), 0);
    let recovered = stdout_json(&dec);
    assert_eq!(recovered, expected_form);
}

#[test]
fn generate_check_pipeline_exit_codes() {
    for seed in [1u64, 2, 3] {
        let gen = run(&[
            "generate",
            "--n",
            "4",
            "--field",
            "real",
            "--seed",
            &seed.to_string(),
        ]);
        let chk = run_with_stdin(&["check", "-"], &gen.stdout);
        assert_eq!(code(&chk), 0, "bijective generated form must check clean");
    }
    let gen = run(&[
        "generate",
        "--n",
        "4",
        "--field",
        "complex",
        "--seed",
        "9",
        "--singular",
    ]);
    let chk = run_with_stdin(&["check", "-"], &gen.stdout);
    assert_eq!(code(&chk), 2, "singular generated form must exit 2");
    assert_eq!(stdout_json(&chk)["verdict"], "singular");
}

#[test]
fn replay_on_generated_canonical_map_passes() {
    let gen = run(&["generate", "--n", "4", "--field", "complex", "--seed", "11"]);
    let rep = run_with_stdin(&["replay", "-"], &gen.stdout);
    assert_eq!(code(&rep), 0);
    let json = stdout_json(&rep);
    assert_eq!(json["all_pass"], true);
    let steps = json["steps"].as_array().unwrap();
    assert!(steps.len() >= 7);
    assert!(steps.iter().all(|s| s["pass"] == true));
}

#[test]
fn replay_flags_non_canonical_and_degenerate() {
    let diag = r#"{"field":"real","n":3,"mode":"exact","rows":[["1","0","0"],["0","2","0"],["0","0","3"]]}"#;
    let path = write_file("diag3.json", diag);
    let out = run(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["all_pass"], false);

    let path = write_file("doubled2_replay.json", DOUBLED_2);
    let out = run(&["replay", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn witness_on_doubling_reports_the_gap() {
    let path = write_file("doubled2_w.json", DOUBLED_2);
    let out = run(&["witness", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let json = stdout_json(&out);
    assert_eq!(json["witness"]["vector"], serde_json::json!(["0", "1"]));
    assert_eq!(json["witness"]["diam_squared_before"], "1");
    assert_eq!(json["witness"]["diam_squared_after"], "4");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let gen1 = run(&["generate", "--n", "6", "--field", "complex", "--seed", "42"]);
    let gen2 = run(&["generate", "--n", "6", "--field", "complex", "--seed", "42"]);
    assert_eq!(gen1.stdout, gen2.stdout);

    let chk1 = run_with_stdin(&["check", "-", "--seed", "5"], &gen1.stdout);
    let chk2 = run_with_stdin(&["check", "-", "--seed", "5"], &gen2.stdout);
    assert_eq!(chk1.stdout, chk2.stdout);
}

#[test]
fn csv_exact_and_float_import() {
    let path = write_file("swap.csv", "0, 1\n1, 0\n");
    let out = run(&["check", "--csv", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["mode"], "exact");
    assert_eq!(json["verdict"], "preserving");

    let path = write_file("scaled.csv", "1.5, 0.0\n0.0, 1.5\n");
    let out = run(&["check", "--csv", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let json = stdout_json(&out);
    assert_eq!(json["mode"], "float");
    assert_eq!(json["numerical"], true);
}

#[test]
fn float_mode_file_gets_numerical_verdict() {
    let float_file = r#"{"field":"real","n":2,"mode":"float","rows":[[0.0,1.0],[1.0,0.0]]}"#;
    let path = write_file("float_swap.json", float_file);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["numerical"], true);
    assert_eq!(json["tolerance"], 1e-9);
    assert_eq!(json["verdict"], "preserving");
}

#[test]
fn tol_flag_forces_the_numerical_pipeline() {
    let path = write_file("identity3_tol.json", IDENTITY_3);
    let out = run(&["check", path.to_str().unwrap(), "--tol", "1e-6"]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["mode"], "float");
    assert_eq!(json["tolerance"], 1e-6);

    let out = run(&["replay", path.to_str().unwrap(), "--tol", "1e-6"]);
    assert_eq!(code(&out), 3, "replay must reject --tol");
}

#[test]
fn exact_flag_rejects_float_input_and_json_flag_is_default() {
    let float_file = r#"{"field":"real","n":2,"mode":"float","rows":[[0.0,1.0],[1.0,0.0]]}"#;
    let path = write_file("float_exact_flag.json", float_file);
    let out = run(&["check", path.to_str().unwrap(), "--exact"]);
    assert_eq!(code(&out), 3);

    let path = write_file("identity3_json_flag.json", IDENTITY_3);
    let with_flag = run(&["check", path.to_str().unwrap(), "--json"]);
    let without = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&with_flag), 0);
    assert_eq!(with_flag.stdout, without.stdout);
}

#[test]
fn mixed_mode_file_is_rejected() {
    let mixed = r#"{"field":"real","n":2,"mode":"exact","rows":[["1","0"],[0.5,"1"]]}"#;
    let path = write_file("mixed.json", mixed);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn two_point_representatives_are_stable() {
    let swap = r#"{"field":"real","n":2,"mode":"exact","rows":[["0","1"],["1","0"]]}"#;
    let path = write_file("swap2.json", swap);
    let a = run(&["decompose", path.to_str().unwrap()]);
    let b = run(&["decompose", path.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let json = stdout_json(&a);
    assert_eq!(json["tau"]["re"], "-1");
    assert_eq!(json["sigma"], serde_json::json!([0, 1]));
    assert_eq!(json["t"], serde_json::json!(["1", "1"]));
}

#[test]
fn degenerate_single_point_exits_two() {
    let single = r#"{"field":"real","n":1,"mode":"exact","rows":[["5/3"]]}"#;
    let path = write_file("single.json", single);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let json = stdout_json(&out);
    assert_eq!(json["verdict"], "degenerate_dimension");
    assert!(json["certificate"].is_object());
}

#[test]
fn pretty_appends_a_summary_line() {
    let path = write_file("identity3_pretty.json", IDENTITY_3);
    let out = run(&["check", path.to_str().unwrap(), "--pretty"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\n# verdict: preserving (exact)"));
}
