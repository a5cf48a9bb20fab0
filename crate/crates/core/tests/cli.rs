// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;

use fcpd::cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use fcpd::series::write_csv;
use fcpd::simulation::{generate_series, midpoint_change, Family, MaternParams, MeanFunction};

const BASE: MaternParams = MaternParams { sigma2: 1.0, range: 0.2, smoothness: 1.0 };

fn write_input(dir: &Path) -> std::path::PathBuf {
    let sc = midpoint_change(400, (MeanFunction::Psi(2), BASE), (MeanFunction::Psi(5), BASE), Family::Gaussian, 20, 7);
    let (series, _) = generate_series(&sc).unwrap();
    let path = dir.join("input.csv");
    write_csv(&series, fs::File::create(&path).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_writes_a_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let out = dir.path().join("report.json");
    assert_eq!(run(["fcpd", "detect", s(&input), "--header", "--out", s(&out)]), EXIT_OK);
    let report = fcpd::parse_report(&fs::read_to_string(&out).unwrap()).unwrap();
    report.validate().unwrap();
    assert!(report.changepoints.iter().any(|t| t.abs_diff(200) <= 10), "{:?}", report.changepoints);
    assert_eq!(report.diagnostics.n, 400);

    let fixed = dir.path().join("fixed.json");
    let code = run(["fcpd", "detect", s(&input), "--header", "--out", s(&fixed), "--lambda", "30", "--c", "10"]);
    assert_eq!(code, EXIT_OK);
    let report = fcpd::parse_report(&fs::read_to_string(&fixed).unwrap()).unwrap();
    assert_eq!(report.tuned.tvn.unwrap().c, 10);
    assert!(report.tuned.tvn.unwrap().bic.is_none());
}

#[test]
fn malformed_input_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "1,2\n3,oops\n5,6\n").unwrap();
    let out = dir.path().join("report.json");
    assert_eq!(run(["fcpd", "detect", s(&input), "--out", s(&out)]), EXIT_DATA);
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn bad_alpha_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let out = dir.path().join("r.json");
    assert_eq!(run(["fcpd", "detect", s(&input), "--header", "--out", s(&out), "--alpha", "2"]), EXIT_USAGE);
    assert!(!out.exists());
}

#[test]
fn tune_writes_surface() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let out = dir.path().join("tuned.json");
    let surface = dir.path().join("surface.csv");
    let code = run([
        "fcpd", "tune", s(&input), "--header", "--out", s(&out), "--surface", s(&surface),
        "--grid-min", "0.5", "--grid-max", "2.5", "--grid-step", "0.5",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["tvn"]["lambda"].as_f64().unwrap() > 0.0);
    let rows = fs::read_to_string(&surface).unwrap().lines().count();
    assert_eq!(rows, 1 + 2 * 25);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    fs::write(
        &scenario,
        r#"{"kind": "sparse", "varied": "mean", "family": "gp", "changepoints": 2,
            "segment_length": [150, 250], "grid_size": 15, "replicates": 3, "seed": 5}"#,
    )
    .unwrap();
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        assert_eq!(run(["fcpd", "simulate", "--scenario", s(&scenario), "--out", s(&out)]), EXIT_OK);
        out
    };
    let a = run_once("a");
    let b = run_once("b");
    let ra = fs::read_to_string(a.join("replicates.csv")).unwrap();
    assert_eq!(ra, fs::read_to_string(b.join("replicates.csv")).unwrap());
    assert_eq!(
        fs::read_to_string(a.join("summary.csv")).unwrap(),
        fs::read_to_string(b.join("summary.csv")).unwrap()
    );
    assert_eq!(ra.lines().count(), 4);
    assert!(ra.lines().nth(1).unwrap().starts_with("0,"));
    assert_eq!(fs::read_to_string(a.join("timings.csv")).unwrap().lines().count(), 4);
}

#[test]
fn unknown_scenario_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    fs::write(&scenario, r#"{"kind": "none", "family": "gp", "bogus": 1}"#).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(["fcpd", "simulate", "--scenario", s(&scenario), "--out", s(&out)]), EXIT_DATA);
    assert!(!out.exists());
}

#[test]
fn bench_writes_medians() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let code = run(["fcpd", "bench", "--sizes", "200,400", "--replicates", "2", "--grid-size", "10", "--out", s(&out)]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,median_ms");
    assert!(lines[1].starts_with("200,"));
    assert!(lines[2].starts_with("400,"));
}

#[test]
fn constant_input_reports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(&input, "0.5,0.5,0.5\n0.5,0.5,0.5\n0.5,0.5,0.5\n").unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run(["fcpd", "detect", s(&input), "--out", s(&out), "--alpha", "0.001"]), EXIT_OK);
    let report = fcpd::parse_report(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.changepoints.is_empty());
    assert_eq!(report.alpha, 0.001);
}

#[test]
fn null_simulation_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("none.json");
    fs::write(&scenario, r#"{"kind": "none", "family": "gp", "seed": 11}"#).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(["fcpd", "simulate", "--scenario", s(&scenario), "--replicates", "20", "--out", s(&out)]), EXIT_OK);
    assert_eq!(fs::read_to_string(out.join("replicates.csv")).unwrap().lines().count(), 21);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "20");
    assert!(row[1].parse::<f64>().unwrap() <= 0.25, "{summary}");

    let one = dir.path().join("one");
    assert_eq!(run(["fcpd", "simulate", "--scenario", s(&scenario), "--replicates", "1", "--out", s(&one)]), EXIT_OK);
    assert_eq!(fs::read_to_string(one.join("replicates.csv")).unwrap().lines().count(), 2);
}

#[test]
fn bench_runtime_roughly_doubles() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.csv");
    assert_eq!(run(["fcpd", "bench", "--sizes", "300", "--replicates", "1", "--out", s(&single)]), EXIT_OK);
    assert_eq!(fs::read_to_string(&single).unwrap().lines().count(), 2);

    let out = dir.path().join("bench.csv");
    assert_eq!(run(["fcpd", "bench", "--sizes", "2000,4000", "--replicates", "3", "--out", s(&out)]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let ms: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(ms[1] / ms[0] <= 2.5, "{text}");
    assert_eq!(run(["fcpd", "bench", "--sizes", "50", "--out", s(&out)]), EXIT_USAGE);
}
