//! End-to-end checks of the command-line surface: exit codes, deterministic
//! output, and the documented examples.

use std::process::Command;

fn moatforge(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_moatforge"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
        out.status.code(),
    )
}

#[test]
fn solve_spider_ok_exit_zero() {
    let (stdout, _, code) = moatforge(&["solve", "--family", "spider", "--k", "3", "--q", "30"]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["status"], "OK");
    let ratio: Vec<i64> = json["ratio"]
        .as_str()
        .unwrap()
        .split('/')
        .map(|p| p.parse().unwrap())
        .collect();
    // ratio <= 19988/10000 by cross multiplication.
    assert!(ratio[0] * 10_000 <= 19_988 * ratio.get(1).copied().unwrap_or(1));
}

#[test]
fn solve_subdiv_triangle_ratio() {
    let (stdout, _, code) = moatforge(&["solve", "--family", "subdiv-triangle"]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["ratio"], "100000/50429"); // 2 / 1.00858
}

#[test]
fn solve_missing_file_exit_one() {
    let (_, stderr, code) = moatforge(&["solve", "--file", "missing.stp", "--format", "stp"]);
    assert_eq!(code, Some(1));
    assert!(stderr.contains("error"));
}

#[test]
fn verify_capture_is_a_finding_not_a_failure() {
    let (stdout, _, code) = moatforge(&[
        "verify",
        "--family",
        "gap-gadget",
        "--delta",
        "9/10",
        "--audits",
        "feasible",
    ]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["completed"], false);
    assert!(!json["captures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_fig3_feasible_value() {
    let (stdout, _, code) = moatforge(&[
        "verify",
        "--family",
        "gap-gadget",
        "--delta",
        "7/8",
        "--audits",
        "feasible",
    ]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["scaled_value"], "15/2");
    assert_eq!(json["audits"][0]["status"], "FEASIBLE");
}

#[test]
fn verify_laminar_bound() {
    let (stdout, _, code) = moatforge(&[
        "verify", "--family", "cycle", "--n", "20", "--k", "5", "--audits", "laminar",
    ]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["audits"][0]["status"], "PASS");
    assert_eq!(json["audits"][0]["detail"]["bound"], "15");
    assert_eq!(json["audits"][0]["detail"]["opt"], "16");
}

#[test]
fn deterministic_output() {
    // Byte-identical up to the measured wall-clock field.
    let strip_runtime = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.contains("runtime_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let args = ["solve", "--family", "random", "--n", "14", "--k", "5", "--seed", "9"];
    let (a, _, _) = moatforge(&args);
    let (b, _, _) = moatforge(&args);
    assert_eq!(strip_runtime(&a), strip_runtime(&b));
    assert!(!a.is_empty());
}

#[test]
fn generate_then_solve_from_file() {
    let dir = std::env::temp_dir().join("moatforge-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tri.graph");
    let (text, _, code) = moatforge(&["generate", "--family", "subdiv-triangle"]);
    assert_eq!(code, Some(0));
    std::fs::write(&path, &text).unwrap();
    let (stdout, _, code) = moatforge(&["solve", "--file", path.to_str().unwrap()]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["mst"], "4");
}

#[test]
fn batch_mixed_manifest_preserves_order() {
    let dir = std::env::temp_dir().join("moatforge-cli-batch");
    std::fs::create_dir_all(&dir).unwrap();
    let manifest = dir.join("manifest.jsonl");
    std::fs::write(
        &manifest,
        concat!(
            "{\"verb\": \"solve\", \"family\": \"subdiv-triangle\"}\n",
            "{\"verb\": \"verify\", \"family\": \"gap-gadget\", \"delta\": \"7/8\"}\n",
            "{\"verb\": \"solve\", \"family\": \"gap-gadget\"}\n",
        ),
    )
    .unwrap();
    let out = dir.join("results.jsonl");
    let csv = dir.join("summary.csv");
    let (_, _, code) = moatforge(&[
        "batch",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    let results = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = results
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["instance"], "subdiv-triangle");
    assert_eq!(lines[1]["verb"], "verify");
    assert_eq!(lines[2]["instance"], "gap-gadget");
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("instance,mst,opt,lp,dual,tree,ratio"));
    assert_eq!(csv_text.lines().count(), 4);
}

#[test]
fn batch_empty_manifest_exit_zero() {
    let dir = std::env::temp_dir().join("moatforge-cli-batch-empty");
    std::fs::create_dir_all(&dir).unwrap();
    let manifest = dir.join("empty.jsonl");
    std::fs::write(&manifest, "").unwrap();
    let (stdout, _, code) = moatforge(&["batch", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code, Some(0));
    assert!(stdout.trim().is_empty());
}

#[test]
fn oracle_dw_and_export_round_trip() {
    let (stdout, _, code) = moatforge(&["oracle", "dw", "--family", "spider", "--k", "3", "--q", "5"]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["opt"], "9");

    let (lp_text, _, code) = moatforge(&["oracle", "export", "--family", "subdiv-triangle"]);
    assert_eq!(code, Some(0));
    assert!(lp_text.starts_with("Minimize"));
    assert!(lp_text.trim_end().ends_with("End"));
}

#[test]
fn root_override_keeps_certificate() {
    // Re-rooting changes the dual's orientation, never the guarantee.
    let (stdout, _, code) = moatforge(&["solve", "--family", "gap-gadget", "--root", "1"]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["status"], "OK");
    assert_eq!(json["mst"], "8");
}

#[test]
fn subdivide_mode_verify() {
    let (stdout, _, code) = moatforge(&[
        "verify",
        "--family",
        "subdiv-triangle",
        "--delta",
        "1",
        "--mode",
        "subdivide",
        "--eps-prime",
        "1/10",
        "--audits",
        "feasible",
    ]);
    assert_eq!(code, Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["scaled_value"], "4");
    assert_eq!(json["audits"][0]["status"], "FEASIBLE");
}

#[test]
fn trace_out_writes_json() {
    let dir = std::env::temp_dir().join("moatforge-cli-trace");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.json");
    let (_, _, code) = moatforge(&[
        "verify",
        "--family",
        "subdiv-triangle",
        "--delta",
        "1",
        "--trace-out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(trace["delta"], "1");
    assert_eq!(trace["halted"], false);
    assert!(trace["events"].as_array().unwrap().len() > 1);
    assert!(trace["forest"]["sets"].as_array().unwrap().len() == 4);
}
