use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flatstats"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), args)
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn profile_mask_example() {
    let doc = json_of(&run(&["profile", "--n", "3", "--d", "1", "--mask", "0x03"]));
    assert_eq!(doc["results"]["counts"], serde_json::json!(["15", "12", "1"]));
    assert_eq!(doc["results"]["total"], "28");
    assert_eq!(doc["command"], "profile");
}

#[test]
fn profile_construct_example() {
    let doc = json_of(&run(&[
        "profile",
        "--n",
        "3",
        "--d",
        "2",
        "--construct",
        r#"{"kind":"hyperplane","n":3,"parity":0}"#,
    ]));
    assert_eq!(
        doc["results"]["counts"],
        serde_json::json!(["1", "0", "12", "0", "1"])
    );
}

#[test]
fn profile_empty_mask_puts_everything_at_zero() {
    let doc = json_of(&run(&["profile", "--n", "3", "--d", "2", "--mask", "0x00"]));
    assert_eq!(doc["results"]["counts"][0], doc["results"]["total"]);
    assert_eq!(doc["results"]["set_size"], 0);
}

#[test]
fn profile_points_use_high_coordinate_first() {
    // "110" is x_3=1, x_2=1, x_1=0: the point 6. {000, 001} is the mask 0x03.
    let by_points = json_of(&run(&["profile", "--n", "3", "--d", "1", "--points", "000,001"]));
    let by_mask = json_of(&run(&["profile", "--n", "3", "--d", "1", "--mask", "0x03"]));
    assert_eq!(by_points["results"], by_mask["results"]);
    let single = json_of(&run(&["profile", "--n", "3", "--d", "1", "--points", "110"]));
    assert_eq!(single["results"]["set_hex"], "40");
}

#[test]
fn profile_rejects_bad_input() {
    let out = run(&["profile", "--n", "3", "--d", "1", "--points", "01"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["profile", "--n", "3", "--d", "1", "--mask", "0x03", "--points", "000"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["profile", "--n", "3", "--d", "9", "--mask", "0x03"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "profile", "--n", "4", "--d", "1",
        "--construct", r#"{"kind":"hyperplane","n":3,"parity":0}"#,
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn profile_cube_family() {
    let doc = json_of(&run(&[
        "profile", "--n", "3", "--d", "2", "--family", "cube",
        "--construct", r#"{"kind":"sympoly","n":3,"d":2}"#,
    ]));
    // all-odd set: even levels are empty
    assert_eq!(doc["results"]["counts"][0], "0");
    assert_eq!(doc["results"]["counts"][2], "0");
    assert_eq!(doc["results"]["counts"][4], "0");
    assert_eq!(doc["results"]["odd_fraction"]["ratio"], "1/1");
}

#[test]
fn profile_csv_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["profile", "--n", "3", "--d", "1", "--mask", "0x03", "--csv", "p.csv"],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,count,num,den,decimal");
    assert_eq!(lines[1], "0,15,15,28,0.535714285714");
    assert_eq!(lines.len(), 4);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn bounds_half_level_is_exact() {
    let doc = json_of(&run(&["bounds", "--d", "3", "--s", "4"]));
    assert_eq!(doc["results"]["best_lower"]["ratio"], "7/8");
    assert_eq!(doc["results"]["best_upper"]["ratio"], "7/8");
    assert_eq!(doc["results"]["k"], 2);
}

#[test]
fn bounds_odd_s_capped_at_half() {
    let doc = json_of(&run(&["bounds", "--d", "3", "--s", "3"]));
    assert_eq!(doc["results"]["best_upper"]["ratio"], "1/2");
}

#[test]
fn bounds_even_s_entries() {
    let doc = json_of(&run(&["bounds", "--d", "3", "--s", "2"]));
    assert_eq!(doc["results"]["best_lower"]["ratio"], "21/32");
    let uppers = doc["results"]["upper"].as_array().unwrap();
    assert!(uppers
        .iter()
        .any(|e| e["name"] == "blocking_even_upper" && e["value"]["ratio"] == "4/5"));
    // the series bound is strictly stronger here
    assert_eq!(doc["results"]["best_upper"]["decimal"], "0.763508727434");
    assert!(!doc["provenance"]["theorems"].as_array().unwrap().is_empty());
}

#[test]
fn bounds_terms_flag_refines_series() {
    let doc = json_of(&run(&["bounds", "--d", "3", "--s", "2", "--terms", "8"]));
    let b = &doc["results"]["bootstrap"];
    assert_eq!(b["terms"], 8);
    assert!(b["certified"]["decimal"].as_str().unwrap().starts_with("0.76"));
    let out = run(&["bounds", "--d", "3", "--s", "3", "--terms", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bounds_rejects_out_of_range() {
    let out = run(&["bounds", "--d", "3", "--s", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
}

#[test]
fn verify_writes_report_and_exits_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "--n", "3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read(dir.path().join("verify-report.json")).unwrap();
    assert_eq!(file, out.stdout);
    let doc: Value = serde_json::from_slice(&file).unwrap();
    assert_eq!(doc["results"]["all_ok"], true);
    assert_eq!(doc["results"]["claims"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_claim_filter_single_entry() {
    let doc = json_of(&run(&["verify", "--n", "3", "--d", "2", "--claims", "odd_bound"]));
    let claims = doc["results"]["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 1);
    assert_eq!(claims[0]["id"], "odd_bound");
    assert_eq!(claims[0]["status"], "verified");
}

#[test]
fn verify_unknown_claim_is_usage_error() {
    let out = run(&["verify", "--n", "3", "--d", "2", "--claims", "no_such_claim"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_self_test_corruption_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "--n", "3", "--d", "2", "--self-test-corrupt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("complement_symmetry"));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"]["all_ok"], false);
    // report file still written
    assert!(dir.path().join("verify-report.json").exists());
}

#[test]
fn search_exhaustive_example() {
    let doc = json_of(&run(&[
        "search", "--mode", "exhaustive", "--n", "4", "--d", "2", "--s", "2",
        "--witness-limit", "64",
    ]));
    assert_eq!(doc["results"]["value"]["ratio"], "4/5");
    assert_eq!(doc["results"]["witness_count"], 30);
    assert_eq!(doc["results"]["visited"], 65536);
    let witnesses: Vec<&str> = doc["results"]["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap())
        .collect();
    assert!(witnesses.contains(&"9669"), "parity set missing: {witnesses:?}");
}

#[test]
fn search_large_n_needs_anneal() {
    let out = run(&["search", "--mode", "exhaustive", "--n", "6", "--d", "2", "--s", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("anneal"));
}

#[test]
fn search_anneal_seeded_is_deterministic() {
    let args = [
        "search", "--mode", "anneal", "--n", "5", "--d", "2", "--s", "2",
        "--iterations", "300", "--restarts", "2", "--seed", "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn search_checkpoint_resumes_and_matches_plain_run() {
    let plain = run(&["search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2"]);
    assert!(plain.status.success());

    let dir = tempfile::tempdir().unwrap();
    let args = [
        "search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2",
        "--checkpoint", "scan.json", "--chunk-size", "64",
    ];
    let first = run_in(dir.path(), &args);
    assert!(first.status.success());
    assert_eq!(first.stdout, plain.stdout);

    // a rerun resumes at the end of the enumeration and reports identically
    let cp: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.json")).unwrap())
            .unwrap();
    assert_eq!(cp["token"], "flatstats-exhaustive-scan");
    assert_eq!(cp["next"], 256);
    assert_eq!(cp["chunks"].as_array().unwrap().len(), 4);
    let second = run_in(dir.path(), &args);
    assert_eq!(second.stdout, plain.stdout);
}

#[test]
fn search_checkpoint_resumes_after_partial_scan() {
    let dir = tempfile::tempdir().unwrap();
    // a genuine half-finished state: one chunk covering the first 128 masks
    let chunk = flatstats::search::exhaustive_chunk(3, 2, 2, 0, 128, false).unwrap();
    let state = serde_json::json!({
        "token": "flatstats-exhaustive-scan",
        "version": 1,
        "n": 3, "d": 2, "s": 2,
        "symmetric": false,
        "next": 128,
        "chunks": [serde_json::to_value(&chunk).unwrap()],
    });
    std::fs::write(dir.path().join("scan.json"), state.to_string()).unwrap();
    let resumed = run_in(
        dir.path(),
        &[
            "search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2",
            "--checkpoint", "scan.json",
        ],
    );
    assert!(resumed.status.success());
    let plain = run(&["search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2"]);
    assert_eq!(resumed.stdout, plain.stdout);
}

#[test]
fn search_checkpoint_rejects_mismatched_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2",
        "--checkpoint", "scan.json",
    ];
    assert!(run_in(dir.path(), &args).status.success());
    let out = run_in(
        dir.path(),
        &[
            "search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "1",
            "--checkpoint", "scan.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checkpoint"));
}

#[test]
fn construct_sympoly_reports_all_odd() {
    let doc = json_of(&run(&["construct", "--kind", "sympoly", "--n", "6", "--d", "3"]));
    assert_eq!(doc["results"]["all_odd"]["verified"], true);
    assert_eq!(doc["results"]["all_odd"]["d"], 3);
    let points = doc["results"]["points"].as_array().unwrap();
    assert_eq!(points.len() as u64, doc["results"]["size"].as_u64().unwrap());
    assert!(points.iter().all(|p| p.as_str().unwrap().len() == 6));
}

#[test]
fn construct_preimage_by_flags() {
    let doc = json_of(&run(&[
        "construct", "--kind", "preimage", "--n", "4", "--d", "3", "--k", "1", "--j", "1",
    ]));
    assert_eq!(doc["results"]["size"], 4);
    assert_eq!(doc["results"]["hex"], "1111");
    assert_eq!(doc["results"]["points"][0], "0000");
    assert_eq!(doc["results"]["points"][1], "0100");
}

#[test]
fn construct_spec_json_perturbed() {
    let doc = json_of(&run(&[
        "construct", "--spec",
        r#"{"kind":"perturbed","base":{"kind":"hyperplane","n":4,"parity":0},"mode":"delete","prob_num":1,"prob_den":2,"seed":9}"#,
    ]));
    assert!(doc["results"]["size"].as_u64().unwrap() <= 8);
    assert_eq!(doc["results"]["spec"]["kind"], "perturbed");
    assert!(doc["results"]["all_odd"].is_null());
}

#[test]
fn construct_flag_conflicts_are_usage_errors() {
    let out = run(&["construct", "--kind", "sympoly", "--n", "6", "--d", "3", "--spec", "{}"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["construct", "--kind", "sympoly", "--n", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["construct"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_d6_has_63_rows() {
    let out = run(&["table", "--d", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,s,k,best_lower,best_upper");
    assert_eq!(lines.len(), 64);
    assert!(lines[32].starts_with("6,32,5,"));
    assert!(!text.contains('\r'));
    // even-s rows: gap from 1 shrinks as k grows
    let gap = |line: &str| {
        let upper: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        1.0 - upper
    };
    assert!(gap(lines[2]) > gap(lines[4]), "k=1 gap vs k=2 gap");
    assert!(gap(lines[4]) > gap(lines[8]), "k=2 gap vs k=3 gap");
}

#[test]
fn out_flag_duplicates_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["bounds", "--d", "2", "--s", "2", "--out", "report.json"],
    );
    assert!(out.status.success());
    let file = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(file, out.stdout);
}

#[test]
fn oversized_instance_exits_three() {
    let out = run(&["profile", "--n", "25", "--d", "12", "--mask", "0x0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn reports_are_byte_deterministic() {
    for args in [
        vec!["profile", "--n", "4", "--d", "2", "--mask", "0x9669"],
        vec!["bounds", "--d", "4", "--s", "6"],
        vec!["search", "--mode", "exhaustive", "--n", "3", "--d", "1", "--s", "1"],
        vec!["table", "--d", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn wall_time_stays_on_stderr() {
    let out = run(&["bounds", "--d", "2", "--s", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall time"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("wall time"));
}

#[test]
fn json_round_trip_is_identity() {
    for args in [
        vec!["profile", "--n", "3", "--d", "2", "--mask", "0x96"],
        vec!["bounds", "--d", "3", "--s", "2", "--terms", "4"],
        vec!["verify", "--n", "3", "--d", "2", "--claims", "odd_bound,half_level_bound"],
        vec!["search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2"],
        vec!["construct", "--kind", "hyperplane", "--n", "4", "--parity", "1"],
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_in(dir.path(), &args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
        assert_eq!(text, again, "round trip changed bytes for {args:?}");
    }
}

mod schema {
    use super::*;
    use regex::Regex;

    /// Interprets the subset of JSON Schema keywords the shipped schema uses.
    fn check(schema: &Value, doc: &Value, path: &str) -> Result<(), String> {
        if let Some(c) = schema.get("const") {
            if c != doc {
                return Err(format!("{path}: expected const {c}"));
            }
        }
        if let Some(options) = schema.get("enum") {
            if !options.as_array().unwrap().contains(doc) {
                return Err(format!("{path}: {doc} not in enum"));
            }
        }
        if let Some(t) = schema.get("type").and_then(Value::as_str) {
            let ok = match t {
                "object" => doc.is_object(),
                "array" => doc.is_array(),
                "string" => doc.is_string(),
                "integer" => doc.is_i64() || doc.is_u64(),
                "number" => doc.is_number(),
                "boolean" => doc.is_boolean(),
                "null" => doc.is_null(),
                other => return Err(format!("{path}: unhandled type {other}")),
            };
            if !ok {
                return Err(format!("{path}: not a {t}"));
            }
        }
        if let Some(pattern) = schema.get("pattern").and_then(Value::as_str) {
            let re = Regex::new(pattern).unwrap();
            let s = doc.as_str().ok_or_else(|| format!("{path}: pattern on non-string"))?;
            if !re.is_match(s) {
                return Err(format!("{path}: {s:?} fails pattern {pattern}"));
            }
        }
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().unwrap();
                if doc.get(key).is_none() {
                    return Err(format!("{path}: missing required key {key}"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            let obj = doc.as_object().ok_or_else(|| format!("{path}: not an object"))?;
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    check(sub, v, &format!("{path}.{key}"))?;
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for key in obj.keys() {
                    if !props.contains_key(key) {
                        return Err(format!("{path}: unexpected key {key}"));
                    }
                }
            }
        }
        if let Some(items) = schema.get("items") {
            if let Some(arr) = doc.as_array() {
                if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
                    if (arr.len() as u64) < min {
                        return Err(format!("{path}: fewer than {min} items"));
                    }
                }
                for (i, v) in arr.iter().enumerate() {
                    check(items, v, &format!("{path}[{i}]"))?;
                }
            }
        }
        Ok(())
    }

    /// Any object shaped like a rational must satisfy the $defs/rational rules.
    fn check_rationals(defs: &Value, doc: &Value, path: &str) -> Result<(), String> {
        match doc {
            Value::Object(map) => {
                if map.contains_key("num") && map.contains_key("den") {
                    check(&defs["rational"], doc, path)?;
                } else {
                    for (k, v) in map {
                        check_rationals(defs, v, &format!("{path}.{k}"))?;
                    }
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    check_rationals(defs, v, &format!("{path}[{i}]"))?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    #[test]
    fn every_report_validates_against_shipped_schema() {
        let schema_path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../schema/report.schema.json");
        let schema: Value =
            serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
        for args in [
            vec!["profile", "--n", "4", "--d", "2", "--mask", "0x9669"],
            vec!["profile", "--n", "4", "--d", "2", "--family", "cube", "--mask", "0x9669"],
            vec!["bounds", "--d", "3", "--s", "2", "--terms", "16"],
            vec!["bounds", "--d", "2", "--s", "2", "--n", "4"],
            vec!["verify", "--n", "3", "--d", "2"],
            vec!["search", "--mode", "exhaustive", "--n", "3", "--d", "2", "--s", "2"],
            vec![
                "search", "--mode", "anneal", "--n", "5", "--d", "2", "--s", "2",
                "--iterations", "200", "--restarts", "2",
            ],
            vec!["construct", "--kind", "sympoly", "--n", "5", "--d", "3"],
        ] {
            let dir = tempfile::tempdir().unwrap();
            let out = run_in(dir.path(), &args);
            assert!(out.status.success(), "{args:?}");
            let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
            check(&schema, &doc, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
            check_rationals(&schema["$defs"], &doc, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
    }
}
