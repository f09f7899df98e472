//! Exit-code contract and output-shape checks for the `locc-marker` binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locc-marker"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

#[test]
fn analyze_named_ensemble_succeeds() {
    let (code, stdout, _) = run(&["analyze", "--named", "duan4", "--m", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("indistinguishable"));
}

#[test]
fn analyze_missing_source_is_an_input_error() {
    let (code, _, stderr) = run(&["analyze"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--named or --file"));
}

#[test]
fn analyze_unknown_named_ensemble_is_an_input_error() {
    let (code, _, _) = run(&["analyze", "--named", "nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn analyze_malformed_file_is_an_input_error() {
    let dir = std::env::temp_dir().join("locc_cli_test_bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.json");
    std::fs::write(&path, "{}").unwrap();
    let (code, _, stderr) = run(&["analyze", "--file", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("schema"));
}

#[test]
fn branch_cap_exhaustion_exits_three() {
    let (code, _, stderr) =
        run(&["detect", "--named", "duan4", "--target", "D1", "--branch-cap", "2"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("cap"));
}

#[test]
fn undecidable_classification_exits_four() {
    // Two Bell states span a 2-dim subspace with a 2-dim complement:
    // outside every decidable fragment.
    let doc = serde_json::json!({
        "name": "two_bell",
        "party_dims": [2, 2],
        "factor_assignment": [0, 1],
        "members": [
            { "label": "b1", "kind": "pure",
              "amplitudes": [[[0.7071067811865476, 0.0], [0.0, 0.0]],
                              [[0.0, 0.0], [0.7071067811865476, 0.0]]] },
            { "label": "b2", "kind": "pure",
              "amplitudes": [[[0.0, 0.0], [0.7071067811865476, 0.0]],
                              [[0.7071067811865476, 0.0], [0.0, 0.0]]] }
        ]
    });
    let dir = std::env::temp_dir().join("locc_cli_test_undecidable");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("two_bell.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, _, stderr) = run(&["classify", "--file", path.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(stderr.contains("undecidable"));
}

#[test]
fn unmarkable_ensemble_exits_five_with_pointer() {
    let (code, _, stderr) = run(&["mark", "--named", "duan4", "--m", "2"]);
    assert_eq!(code, 5);
    assert!(stderr.contains("D1"));
    assert!(stderr.contains("branches fail"));
}

#[test]
fn unknown_claim_id_exits_two() {
    let (code, _, _) = run(&["reproduce", "nonsense_claim"]);
    assert_eq!(code, 2);
}

#[test]
fn single_fast_claims_pass() {
    let (code, stdout, _) = run(&["reproduce", "eq2_smolin", "appD_counts"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("2 pass"));
    assert!(stdout.contains("0 fail"));
}

#[test]
fn ensembles_listing_and_dump_round_trip() {
    let (code, stdout, _) = run(&["ensembles"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("bennett9"));

    let dir = std::env::temp_dir().join("locc_cli_test_dump");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bell.json");
    let (code, _, _) =
        run(&["ensembles", "--named", "bell", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, stdout, _) = run(&["analyze", "--file", path.to_str().unwrap(), "--restarts", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("independent"));
}

#[test]
fn mark_requires_m_two_for_the_mixed_protocols() {
    let (code, _, _) = run(&["mark", "--named", "yu", "--d", "2", "--m", "3"]);
    assert_eq!(code, 5);
}

#[test]
fn yu_marking_modes_match_their_success_values() {
    let (code, stdout, _) = run(&[
        "mark", "--named", "yu", "--d", "3", "--m", "2", "--mode", "any_anticorrelated",
        "--format", "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let s = v["simulation"]["per_hypothesis"]["rho_sigma"]["success_probability"]
        .as_f64()
        .unwrap();
    assert!((s - 0.75).abs() < 1e-9);

    let (code, stdout, _) = run(&[
        "mark", "--named", "yu", "--d", "3", "--m", "2", "--mode", "strict01",
        "--format", "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let s = v["simulation"]["per_hypothesis"]["rho_sigma"]["success_probability"]
        .as_f64()
        .unwrap();
    assert!((s - 1.0 / 8.0).abs() < 1e-9);
}

#[test]
fn json_reports_are_deterministic_across_runs() {
    let args = ["reproduce", "prop6", "--format", "json"];
    let (c1, out1, _) = run(&args);
    let (c2, out2, _) = run(&args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert_eq!(out1, out2, "identical config must produce byte-identical JSON");
}

#[test]
fn env_seed_overrides_the_flag_default() {
    let out = bin()
        .args(["reproduce", "prop6", "--format", "json"])
        .env("LOCC_MARKER_SEED", "123")
        .output()
        .expect("binary runs");
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(v["config"]["seed"], 123);
}
