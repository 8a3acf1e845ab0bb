use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_packcoh"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn temp(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("packcoh-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn annulus_roundtrip_scenario_passes() {
    let out = bin().arg("run").arg(scenario("annulus_roundtrip.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], Value::Bool(true));
    assert_eq!(r["scenario"], "annulus-roundtrip");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["per_degree"][1]["betti_complex"], 1);
}

#[test]
fn candidate_cap_gives_exit_two_with_bounds() {
    let out = run(&["--generate", "cycle:35", "packing-norm", "--p", "1", "--ell", "2", "--rmin", "1", "--rmax", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["candidates"], 70);
    assert_eq!(r["status"], "candidate-cap-exceeded");
    let (lo, hi) = (r["result"]["lower"].as_f64().unwrap(), r["result"]["upper"].as_f64().unwrap());
    assert!(lo <= hi);
}

#[test]
fn malformed_input_exits_64() {
    let bad = bin().arg("run").arg(scenario("bad_scenario.json")).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
    assert!(!bad.stderr.is_empty());
    assert_eq!(run(&["--generate", "spiral:3", "betti"]).status.code(), Some(64));
    assert_eq!(run(&["betti", "--no-such-flag"]).status.code(), Some(64));
    assert_eq!(run(&["betti"]).status.code(), Some(64), "a task needs a space");
    assert_eq!(run(&["--generate", "path:4", "rips", "--scale", "x/0"]).status.code(), Some(64));
}

#[test]
fn failed_verdict_exits_one() {
    // the whole 4-cycle is a ball of radius 2, and its degree-1 class never dies
    let out = run(&["--generate", "cycle:4", "vanishing-radius", "--R", "2", "--L", "1", "--complex", "vr", "--scale", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["vanishing_radius"], Value::Null);
}

#[test]
fn transfer_witness_replays_and_detects_tampering() {
    let dir = temp("witness");
    let out = bin().arg("--out").arg(&dir).arg("run").arg(scenario("annulus_transfer.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let w = dir.join("witness.json");
    assert_eq!(bin().arg("replay").arg(&w).output().unwrap().status.code(), Some(0));

    let mut doc: Value = serde_json::from_slice(&std::fs::read(&w).unwrap()).unwrap();
    let parts = doc["steps"][2]["output"].as_array_mut().unwrap();
    let part = parts.iter_mut().find(|p| !p.as_array().unwrap().is_empty()).unwrap();
    part[0] = Value::String("12345".into());
    let bad = dir.join("tampered.json");
    std::fs::write(&bad, serde_json::to_vec(&doc).unwrap()).unwrap();
    let out = bin().arg("replay").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["first_mismatch"], 2);
}

#[test]
fn out_directory_gets_report_and_summary() {
    let dir = temp("out");
    let out = bin().arg("--out").arg(&dir).args(["--generate", "cycle:12", "rips", "--scale", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&std::fs::read(dir.join("rips.json")).unwrap()).unwrap();
    assert_eq!(r["counts"], serde_json::json!([12, 24, 12]));
    assert!(std::fs::read_to_string(dir.join("rips.txt")).unwrap().contains("[12, 24, 12]"));
}

#[test]
fn csv_rows_flatten_the_report() {
    let out = run(&["--format", "csv", "--generate", "annulus:12x2", "betti", "--scale", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("path,value\n"));
    assert!(text.contains("per_degree.1.betti,1\n"));
}

#[test]
fn generated_space_round_trips_through_a_file() {
    let dir = temp("gen");
    std::fs::create_dir_all(&dir).unwrap();
    let out = run(&["generate", "grid:3x3"]);
    let file = dir.join("grid.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let a = bin().arg("--space").arg(&file).args(["betti", "--scale", "1"]).output().unwrap();
    let b = run(&["--generate", "grid:3x3", "betti", "--scale", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seeds_are_recorded_and_change_random_inputs() {
    let a = report(&run(&["--seed", "1", "--generate", "path:9", "norm-equivalence", "--samples", "2"]));
    let b = report(&run(&["--seed", "2", "--generate", "path:9", "norm-equivalence", "--samples", "2"]));
    assert_eq!(a["seed"], 1);
    assert_ne!(a["samples"], b["samples"]);
    let again = report(&run(&["--seed", "1", "--generate", "path:9", "norm-equivalence", "--samples", "2"]));
    assert_eq!(a, again);
}
