use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coded-cache"));
    c.env("CODED_CACHE_THREADS", "2");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, 0, "{stderr}");
    serde_json::from_str(&stdout).unwrap()
}

fn vertices(v: &Value) -> Vec<(String, String)> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|p| (p["M"].as_str().unwrap().to_string(), p["R"].as_str().unwrap().to_string()))
        .collect()
}

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(m, r)| (m.to_string(), r.to_string())).collect()
}

#[test]
fn region_closure_for_three_files_four_users() {
    let doc = json(&["region", "--n", "3", "--k", "4", "--grid", "0"]);
    assert_eq!(doc["schema"], "v1");
    assert_eq!(doc["curves"].as_array().unwrap().len(), 5);
    assert_eq!(
        vertices(&doc["closure"]["vertices"]),
        pairs(&[("0", "3"), ("1/4", "9/4"), ("3/4", "3/2"), ("4/3", "5/6"), ("3/2", "2/3"), ("9/4", "1/4"), ("3", "0")])
    );
}

#[test]
fn region_single_t_has_no_closure() {
    let doc = json(&["region", "--n", "3", "--k", "4", "--t", "2", "--grid", "2"]);
    assert!(doc.get("closure").is_none());
    assert_eq!(
        vertices(&doc["curves"][0]["vertices"]),
        pairs(&[("1/2", "2"), ("5/6", "3/2"), ("4/3", "5/6"), ("3/2", "2/3")])
    );
    let samples = doc["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    assert!(samples[0]["R"].is_null());
    assert_eq!(samples[1]["M"], "3/2");
    assert_eq!(samples[1]["R"], "2/3");
}

#[test]
fn curves_contain_known_values() {
    let doc = json(&["curves", "--n", "3", "--k", "4"]);
    let series = doc["series"].as_array().unwrap();
    let find = |label: &str| vertices(&series.iter().find(|s| s["label"] == label).unwrap()["points"]);
    assert!(find("Yu").contains(&("3/2".into(), "2/3".into())));
    assert!(find("TianChen").contains(&("5/6".into(), "3/2".into())));
    assert!(find("region").contains(&("4/3".into(), "5/6".into())));
}

#[test]
fn curves_note_schemes_outside_their_regime() {
    let doc = json(&["curves", "--n", "4", "--k", "2"]);
    let labels: Vec<&str> = doc["series"].as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert!(!labels.contains(&"TianChen"));
    assert!(!doc["notes"].as_array().unwrap().is_empty());
}

#[test]
fn verify_passes_and_records_parities() {
    let doc = json(&["verify", "--n", "3", "--k", "4", "--t", "2", "--seed", "7"]);
    assert_eq!(doc["verdict"], "PASS");
    assert!(doc["first_failure"].is_null());
    let split = doc["single_pattern_runs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["demand"] == "(1,1,2,3)" && r["pattern"] == "[(2,1,0):{{1,2}}; (2,0,1):{{1,3}}; (1,1,1):{{1},{2,3}}]")
        .expect("split pattern run recorded");
    assert_eq!(split["parities_per_user"], 8);
    assert_eq!(split["transmissions"], 5);
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for name in ["yu_membership", "tian_chen_membership", "redundancy_reduction", "hidden_connection", "end_to_end"] {
        assert!(names.contains(&name), "{name} missing");
    }
}

#[test]
fn small_field_is_a_configuration_error() {
    let (code, _, stderr) = run(&["verify", "--n", "3", "--k", "4", "--m", "64"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("too small"), "{stderr}");
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(run(&["region", "--n", "3", "--k", "4", "--t", "5"]).0, 2);
    assert_eq!(run(&["region", "--n", "0", "--k", "4"]).0, 2);
    assert_eq!(run(&["verify", "--n", "2", "--k", "2", "--m", "12"]).0, 2);
    assert_eq!(run(&["region", "--n", "3"]).0, 2);
    assert_eq!(run(&["region", "--n", "3", "--k", "4", "--t", "some"]).0, 2);
}

#[test]
fn writes_files_into_out_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested");
    let (code, stdout, _) =
        run(&["region", "--n", "2", "--k", "3", "--format", "both", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path.join("region.json")).unwrap()).unwrap();
    assert_eq!(doc["N"], 2);
    let csv = std::fs::read_to_string(path.join("region.csv")).unwrap();
    assert!(csv.starts_with("series,M,R\n"));
    assert!(csv.lines().any(|l| l.starts_with("closure,")));
}

#[test]
fn csv_uses_twelve_significant_digits() {
    let (code, stdout, _) = run(&["region", "--n", "3", "--k", "4", "--t", "2", "--format", "csv", "--grid", "0"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("t=2,1.33333333333,0.833333333333"), "{stdout}");
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["verify", "--n", "2", "--k", "3", "--seed", "3"];
    let one = bin().env("CODED_CACHE_THREADS", "1").args(args).output().unwrap();
    let four = bin().env("CODED_CACHE_THREADS", "4").args(args).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}
