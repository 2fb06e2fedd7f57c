//! CLI acceptance: byte-determinism on the built-ins, report content, and
//! exit-code conventions.

use std::process::{Command, Output};

fn focuskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focuskit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = focuskit(args);
    assert!(
        out.status.success(),
        "focuskit {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn criterion_11_cli_byte_determinism() {
    let invocations: &[&[&str]] = &[
        &["table2"],
        &["table2", "--format", "json"],
        &["gamma-curve", "--from", "0.1", "--to", "0.95", "--n", "100"],
        &["gamma-curve", "--from", "0.1", "--to", "0.95", "--n", "100", "--format", "svg"],
        &["first-order", "--f1", "17.49", "--f2", "-5.43", "--d", "15.23", "--fno", "3", "--fov", "6.2", "--near", "2000"],
        &["trace", "--lens", "mfm30", "--field", "3.1", "--rings", "4", "--arms", "8", "--format", "csv"],
        &["trace", "--lens", "mms45", "--format", "svg"],
        &["focus-sweep", "--lens", "mfm30", "--near", "2000"],
        &["tolerance", "--lens", "mfm30", "--decenter-um", "25"],
        &["array-plan", "--cone", "7", "--mfov", "8.28", "--total-fov", "100", "--pitch", "2", "--efl", "45", "--diagonal", "6.52", "--display-px", "1920"],
        &["validate", "--lens", "mms45"],
        &["validate", "--lens", "mfm30", "--format", "json"],
    ];
    for args in invocations {
        let first = stdout_of(args);
        let second = stdout_of(args);
        assert_eq!(first, second, "non-deterministic output for {args:?}");
        assert!(!first.is_empty(), "empty output for {args:?}");
    }
    println!("PASS criterion 11 (CLI): {} invocations byte-identical across runs", invocations.len());
}

#[test]
fn table2_reproduces_the_family() {
    let out = stdout_of(&["table2"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(
        lines[0],
        "lens,f_mm,fno,near_m,travel_um,r_o_um,gamma_published,gamma_computed"
    );
    let expected_r_o = [312.5, 300.0, 306.25, 320.0, 337.5, 312.5, 302.5, 300.0];
    for (line, want) in lines[1..].iter().zip(expected_r_o) {
        let cells: Vec<&str> = line.split(',').collect();
        let r_o: f64 = cells[5].parse().unwrap();
        assert!((r_o - want).abs() < 1e-3, "{line}");
        let published: f64 = cells[6].parse().unwrap();
        let computed: f64 = cells[7].parse().unwrap();
        assert!((published - computed).abs() <= 0.01, "{line}");
    }
}

#[test]
fn validate_prints_the_total_track() {
    let out = stdout_of(&["validate", "--lens", "mms45"]);
    assert!(
        out.contains("total_track_mm: 124.100"),
        "missing total-track line in:\n{out}"
    );
    assert!(out.contains("violations: 0"));
}

#[test]
fn focus_sweep_travel_in_band() {
    let out = stdout_of(&["focus-sweep", "--lens", "mfm30", "--near", "2000"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let travel = report["travel_range_um"].as_f64().unwrap();
    assert!((190.0..=240.0).contains(&travel), "travel {travel}");
}

#[test]
fn sweep_csv_schema() {
    let out = stdout_of(&[
        "focus-sweep",
        "--lens",
        "mfm30",
        "--distances",
        "inf,4000,2000",
        "--format",
        "csv",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "object_distance_mm,best_shift_um,rms_um");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("inf,0,"));
}

#[test]
fn array_plan_reports_both_equivalent_focal_lengths() {
    let out = stdout_of(&[
        "array-plan", "--cone", "7", "--mfov", "8.28", "--total-fov", "100",
        "--pitch", "2", "--efl", "45", "--diagonal", "6.52",
    ]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let diag = report["eq_fl_diagonal_mm"].as_f64().unwrap();
    let ifov = report["eq_fl_ifov_mm"].as_f64().unwrap();
    assert!((diag - 298.64).abs() < 0.01, "diagonal {diag}");
    assert!((ifov - 180.0).abs() < 1e-9, "ifov {ifov}");
    let overlap = report["overlap_deg"].as_f64().unwrap();
    assert!((overlap - 1.28).abs() < 1e-12);
}

#[test]
fn gamma_curve_svg_has_labeled_axes() {
    let out = stdout_of(&["gamma-curve", "--from", "0.2", "--to", "0.7", "--n", "50", "--format", "svg"]);
    assert!(out.starts_with("<svg"));
    assert!(out.contains("alpha = f1/f"));
    assert!(out.contains("gamma = R/R_o"));
    assert!(out.contains("polyline"));
}

#[test]
fn every_verb_documents_units_in_help() {
    for verb in [
        "first-order",
        "gamma-curve",
        "table2",
        "trace",
        "focus-sweep",
        "tolerance",
        "array-plan",
        "validate",
    ] {
        let out = focuskit(&[verb, "--help"]);
        assert!(out.status.success(), "{verb} --help failed");
        let text = String::from_utf8_lossy(&out.stdout).to_lowercase();
        assert!(
            text.contains("mm") || text.contains("um") || text.contains("degrees") || text.contains("prescription"),
            "{verb} --help does not mention units:\n{text}"
        );
    }
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    // usage error: missing required arguments
    let usage = focuskit(&["first-order", "--f1", "17.49"]);
    assert_eq!(usage.status.code(), Some(2), "usage errors exit 2");

    // input error: unknown builtin
    let input = focuskit(&["validate", "--lens", "nosuch"]);
    assert_eq!(input.status.code(), Some(3), "input errors exit 3");
    assert!(!input.stderr.is_empty());

    // numeric failure: afocal configuration
    let numeric = focuskit(&["first-order", "--f1", "100", "--f2", "100", "--d", "200"]);
    assert_eq!(numeric.status.code(), Some(4), "numeric failures exit 4");

    // unsupported format for the verb
    let format = focuskit(&["table2", "--format", "svg"]);
    assert_eq!(format.status.code(), Some(2), "illegal format exits 2");
}

#[test]
fn output_flag_writes_the_artifact_file() {
    let dir = std::env::temp_dir().join("focuskit-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let _ = std::fs::remove_file(&path);
    let out = focuskit(&[
        "gamma-curve", "--from", "0.2", "--to", "0.7", "--n", "10",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let contents = std::fs::read_to_string(&path).unwrap();
    assert!(contents.starts_with("alpha,gamma\n"));
    assert_eq!(contents.lines().count(), 11);
}

#[test]
fn input_file_round_trips_through_the_cli() {
    // emit a builtin, perturb nothing, feed it back through --input
    let dir = std::env::temp_dir().join("focuskit-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mfm30-copy.json");
    let doc = focuskit::prescription::emit(&focuskit::prescription::builtin("mfm30").unwrap());
    std::fs::write(&path, doc).unwrap();
    let out = stdout_of(&["validate", "--input", path.to_str().unwrap()]);
    assert!(out.contains("prescription: mfm30"));
    assert!(out.contains("violations: 0"));
}

#[test]
fn dirty_prescription_fails_validation_with_exit_3() {
    let dir = std::env::temp_dir().join("focuskit-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    let mut doc: serde_json::Value = serde_json::from_str(&focuskit::prescription::emit(
        &focuskit::prescription::builtin("mfm30").unwrap(),
    ))
    .unwrap();
    doc["surfaces"][4]["semi_diameter_mm"] = serde_json::json!("-1.0");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = focuskit(&["validate", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("violations: 1"), "{text}");
}
