//! End-to-end checks of the `sgl` binary: exit codes, output formats,
//! fixture freshness and error wording.

use std::path::Path;
use std::process::{Command, Output};

fn sgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgl"))
        .args(args)
        .env_remove("SGL_ENUM_CAP")
        .output()
        .unwrap()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert!(sgl(&["--help"]).status.success());
    assert!(sgl(&["--version"]).status.success());
    assert!(sgl(&["solve", "--help"]).status.success());
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 6] = [
        &["solve", "--paper", "7-12", "--order", "P_x,P_y,P_q"],
        &["solve", "--paper", "nope"],
        &["solve"],
        &["ratio", "--paper", "7-12", "--tie", "sideways"],
        &["bound", "--p", "0.4"],
        &["solve", "--paper", "7-12", "--seed", "soon"],
    ];
    for args in cases {
        let out = sgl(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr_of(&out));
    }

    let out = Command::new(env!("CARGO_BIN_EXE_sgl"))
        .args(["ratio", "--paper", "7-12", "--exact"])
        .env("SGL_ENUM_CAP", "three")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("SGL_ENUM_CAP"));
}

#[test]
fn domain_errors_exit_one_with_kind() {
    let out = Command::new(env!("CARGO_BIN_EXE_sgl"))
        .args(["ratio", "--paper", "19-33", "--exact"])
        .env("SGL_ENUM_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).starts_with("TooLarge:"),
        "{}",
        stderr_of(&out)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.instance");
    std::fs::write(&bad, "{\"kind\": \"weighted-coverage\",").unwrap();
    let out = sgl(&["opt", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).starts_with("ParseError:"),
        "{}",
        stderr_of(&out)
    );

    let out = sgl(&["opt", "--instance", "/nonexistent/x.instance"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).starts_with("IoError:"),
        "{}",
        stderr_of(&out)
    );

    // Bound parameters outside the domain are rejected by the library.
    let out = sgl(&["bound", "--p", "1.5", "--q", "0.4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).starts_with("OutOfRange:"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn shipped_fixtures_are_fresh() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let dir = tempfile::tempdir().unwrap();
    for name in ["7-12", "19-33"] {
        let fresh = dir.path().join(name);
        let out = sgl(&["paper", name, "--out", fresh.to_str().unwrap()]);
        assert!(out.status.success());
        let committed =
            std::fs::read(root.join("fixtures").join(format!("{name}.instance"))).unwrap();
        assert_eq!(
            std::fs::read(&fresh).unwrap(),
            committed,
            "fixtures/{name}.instance is stale"
        );
    }
}

#[test]
fn human_output_rounds_and_json_keeps_precision() {
    let human = stdout_of(&sgl(&[
        "ratio",
        "--paper",
        "19-33",
        "--exact",
        "--tie",
        "last-index",
    ]));
    assert!(human.contains("ratio: 0.575758"), "{human}");
    assert!(human.contains("fraction: 19/33"), "{human}");

    let json = stdout_of(&sgl(&[
        "ratio",
        "--paper",
        "19-33",
        "--exact",
        "--tie",
        "last-index",
        "--format",
        "json",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["command"], "ratio");
    assert_eq!(doc["instance"], "19-33");
    assert_eq!(doc["tie"], "last-index");
    assert_eq!(doc["report"]["ratio"].as_f64().unwrap(), 152.0 / 264.0);
    assert_eq!(doc["report"]["ratio_fraction"][0], 19);
    assert_eq!(doc["report"]["ratio_fraction"][1], 33);
    assert!(doc["version"].is_string());
}

#[test]
fn solve_json_carries_provenance_and_steps() {
    let json = stdout_of(&sgl(&[
        "solve",
        "--paper",
        "7-12",
        "--tie",
        "last-index",
        "--format",
        "json",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["command"], "solve");
    assert_eq!(doc["seed"], 0);
    assert_eq!(doc["final_value"], 7.0);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 3);
    assert_eq!(doc["steps"][0]["options"].as_array().unwrap().len(), 4);

    let explicit = stdout_of(&sgl(&[
        "solve",
        "--paper",
        "7-12",
        "--order",
        "P_z,P_y,P_x",
        "--tie",
        "last-index",
        "--format",
        "json",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&explicit).unwrap();
    assert_eq!(doc["seed"], serde_json::Value::Null);
    assert_eq!(doc["order"][0], "P_z");
}

#[test]
fn csv_trace_has_header_and_rows() {
    let csv = stdout_of(&sgl(&[
        "solve",
        "--paper",
        "7-12",
        "--order",
        "P_x,P_y,P_z",
        "--tie",
        "last-index",
        "--format",
        "csv",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,part,element,gain,value");
    assert_eq!(lines[1], "1,P_x,x2,4,4");
    assert_eq!(lines.len(), 4);
}

#[test]
fn reduce_swm_emits_a_loadable_coverage_document() {
    let dir = tempfile::tempdir().unwrap();
    let swm_path = dir.path().join("two.swm");
    std::fs::write(
        &swm_path,
        r#"{
  "kind": "swm-coverage",
  "items": ["i1", "i2"],
  "bidders": [
    {"name": "a", "universe": {"p": 2.0, "q": 3.0}, "covers": {"i1": ["p"], "i2": ["p", "q"]}},
    {"name": "b", "universe": ["r"], "covers": {"i1": ["r"]}}
  ]
}"#,
    )
    .unwrap();

    let reduced_path = dir.path().join("two.instance");
    let out = sgl(&[
        "reduce-swm",
        "--instance",
        swm_path.to_str().unwrap(),
        "--out",
        reduced_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    let opt = stdout_of(&sgl(&["opt", "--instance", reduced_path.to_str().unwrap()]));
    assert!(opt.contains("opt_value: 6.000000"), "{opt}");
    assert!(opt.contains("i1@b i2@a"), "{opt}");
}

#[test]
fn verify_passes_on_builtins() {
    for name in ["7-12", "19-33"] {
        let args: &[&str] = if name == "7-12" {
            &["verify", "--paper", name]
        } else {
            &["verify", "--paper", name, "--sampled", "--trials", "2000"]
        };
        let out = sgl(args);
        assert!(out.status.success(), "{}", stderr_of(&out));
        assert!(stdout_of(&out).ends_with("PASS\n"));
    }
}

#[test]
fn check_potential_passes_on_builtins() {
    for name in ["7-12", "19-33"] {
        let out = sgl(&["check-potential", "--paper", name, "--tie", "last-index"]);
        assert!(out.status.success(), "{}", stderr_of(&out));
        assert!(stdout_of(&out).contains("monotone_violations: 0"));
    }
}

#[test]
fn extend_and_compose_emit_documents() {
    let extended = stdout_of(&sgl(&["extend", "--paper", "7-12", "--dummies", "3"]));
    let doc: serde_json::Value = serde_json::from_str(&extended).unwrap();
    assert_eq!(doc["name"], "7-12+3d");
    assert_eq!(doc["parts"].as_array().unwrap().len(), 6);

    let composed = stdout_of(&sgl(&["compose", "--paper", "7-12", "--copies", "2"]));
    let doc: serde_json::Value = serde_json::from_str(&composed).unwrap();
    assert_eq!(doc["name"], "7-12x2");
    assert_eq!(doc["parts"].as_array().unwrap().len(), 6);
    assert_eq!(doc["universe"].as_array().unwrap().len(), 24);
}
