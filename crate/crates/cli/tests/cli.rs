use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lpocv"));
    c.env_remove("LPOCV_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn err_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn select_matches_golden() {
    let three = fixture("three.txt");
    let out = run(&[
        "select",
        "-i",
        path_str(&three),
        "--max-dim",
        "2",
        "-p",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("select_three.json")
    );
    let v: Value = serde_json::from_str(&golden("select_three.json")).unwrap();
    assert_eq!(v["chosen"]["dim"], 1);
    assert_eq!(v["risks"][0], -1.0);
    assert!((v["risks"][1].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn risk_closed_equals_brute() {
    let three = fixture("three.txt");
    for model in ["hist:2", "trig:1", "haar-wavelet:1", "poly:1:2"] {
        for p in ["1", "2"] {
            let closed = ok_json(&["risk", "-i", path_str(&three), "--model", model, "-p", p]);
            let brute = ok_json(&[
                "risk",
                "-i",
                path_str(&three),
                "--model",
                model,
                "-p",
                p,
                "--brute",
            ]);
            let (a, b) = (
                closed["risk"].as_f64().unwrap(),
                brute["risk"].as_f64().unwrap(),
            );
            assert!((a - b).abs() < 1e-10, "{model} p={p}: {a} vs {b}");
            assert_eq!(brute["method"], "brute");
        }
    }
}

#[test]
fn input_variants_agree() {
    let plain = ok_json(&[
        "risk",
        "-i",
        path_str(&fixture("three.txt")),
        "--model",
        "hist:2",
        "-p",
        "1",
    ]);
    let crlf = ok_json(&[
        "risk",
        "-i",
        path_str(&fixture("three_crlf.txt")),
        "--model",
        "hist:2",
        "-p",
        "1",
    ]);
    let csv = ok_json(&[
        "risk",
        "-i",
        path_str(&fixture("three.csv")),
        "--column",
        "x",
        "--model",
        "hist:2",
        "-p",
        "1",
    ]);
    let csv_idx = ok_json(&[
        "risk",
        "-i",
        path_str(&fixture("three.csv")),
        "--column",
        "1",
        "--model",
        "hist:2",
        "-p",
        "1",
    ]);
    assert_eq!(plain, crlf);
    assert_eq!(plain, csv);
    assert_eq!(plain, csv_idx);
}

#[test]
fn out_of_range_is_line_addressed_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = run(&[
        "risk",
        "-i",
        path_str(&fixture("out_of_range.txt")),
        "--model",
        "hist:2",
        "-p",
        "1",
        "-o",
        path_str(&target),
    ]);
    let e = err_json(&out);
    assert_eq!(e["schema_version"], 1);
    assert_eq!(e["error"]["code"], "parse_error");
    assert_eq!(e["error"]["line"], 1);
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn structured_errors() {
    let three = fixture("three.txt");
    let e = err_json(&run(&[
        "risk",
        "-i",
        path_str(&three),
        "--model",
        "hist:2",
        "-p",
        "3",
    ]));
    assert_eq!(e["error"]["code"], "invalid_p");
    let e = err_json(&run(&["select", "-i", path_str(&three), "-p", "auto"]));
    assert_eq!(e["error"]["code"], "usage_error");
    let e = err_json(&run(&[
        "risk",
        "-i",
        "/no/such/file",
        "--model",
        "hist:2",
        "-p",
        "1",
    ]));
    assert_eq!(e["error"]["code"], "io_error");
    let e = err_json(&run(&[
        "risk",
        "-i",
        path_str(&three),
        "--model",
        "spline:2",
        "-p",
        "1",
    ]));
    assert_eq!(e["error"]["code"], "usage_error");
    let e = err_json(&run(&["frobnicate"]));
    assert_eq!(e["error"]["code"], "usage_error");
    let e = err_json(&run(&[
        "risk",
        "-i",
        path_str(&three),
        "--model",
        "hist:2",
        "-p",
        "1",
        "--brute",
        "--cap",
        "2",
    ]));
    assert_eq!(e["error"]["code"], "enumeration_cap");
}

#[test]
fn penalty_sweep_golden_and_monotone() {
    let out = run(&[
        "penalty-sweep",
        "-i",
        path_str(&fixture("three.txt")),
        "--model",
        "hist:2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, golden("penalty_three.csv"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let c: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(c.len(), 2);
    assert!(c.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn density_grid_rows() {
    let out = run(&[
        "density-grid",
        "-i",
        path_str(&fixture("three.txt")),
        "--model",
        "hist:2",
        "--points",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,density");
    assert_eq!(lines.len(), 6);
    // two of three points in the left half: height 2 · 2/3
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 4.0 / 3.0).abs() < 1e-14);
}

#[test]
fn moments_verb() {
    let v = ok_json(&["moments", "--model", "hist:2", "-n", "4", "-p", "2"]);
    assert!((v["expectation"].as_f64().unwrap() + 0.5).abs() < 1e-14);
    assert!((v["bias"].as_f64().unwrap() - 0.25).abs() < 1e-14);
    let poly = v["hist_variance_poly"]["variance"].as_f64().unwrap();
    assert!((poly - v["variance"].as_f64().unwrap()).abs() < 1e-12);
    let v = ok_json(&[
        "moments",
        "--model",
        "trig:1",
        "--density",
        "cusp:10:1",
        "-n",
        "10",
        "-p",
        "3",
    ]);
    assert!(v["hist_variance_poly"].is_null());
}

#[test]
fn check_verb() {
    let v = ok_json(&["check", "--collection", "pc", "-n", "1000"]);
    assert_eq!(v["dims"].as_array().unwrap().len(), 20);
    let a = &v["assumptions"];
    for key in ["reg_ok", "reg2_ok", "reg3_ok", "pol_ok"] {
        assert_eq!(a[key], true, "{key}");
    }
    assert_eq!(a["ad_status"], "unknown");
    assert_eq!(v["p_range"]["empty"], false);
    let v = ok_json(&[
        "check",
        "--collection",
        "pc",
        "-n",
        "1000",
        "--density",
        "uniform",
    ]);
    assert_eq!(
        v["assumptions"]["ad_status"],
        "verified-sufficient-condition"
    );
    let v = ok_json(&[
        "check",
        "--collection",
        "pc",
        "-n",
        "100",
        "--max-dim",
        "100",
    ]);
    assert_eq!(v["assumptions"]["reg_ok"], false);
}

#[test]
fn auto_p_selection() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let text: String = (0..200)
        .map(|i| format!("{}\n", ((i * 37) % 200) as f64 / 200.0))
        .collect();
    std::fs::write(&data, text).unwrap();
    let v = ok_json(&[
        "select",
        "-i",
        path_str(&data),
        "-p",
        "auto",
        "--collection",
        "tp",
    ]);
    assert_eq!(v["p_source"], "auto");
    let p = v["p"].as_u64().unwrap();
    assert!(p > 100 && p < 200);
}

#[test]
fn simulation_golden_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let cfg = fixture("adaptivity.json");
    let out = run(&[
        "simulate",
        "adaptivity",
        "--config",
        path_str(&cfg),
        "--csv",
        path_str(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("adaptivity.json")
    );
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert!(rows.starts_with("n,p,mean_risk,stderr,oracle_risk,ratio\n"));

    let single = run(&[
        "--threads",
        "1",
        "simulate",
        "adaptivity",
        "--config",
        path_str(&cfg),
    ]);
    assert_eq!(single.stdout, golden("adaptivity.json").into_bytes());
    let env = bin()
        .env("LPOCV_THREADS", "2")
        .args(["simulate", "adaptivity", "--config", path_str(&cfg)])
        .output()
        .unwrap();
    assert_eq!(env.stdout, golden("adaptivity.json").into_bytes());
}

#[test]
fn oracle_ratio_overrides() {
    let v = ok_json(&[
        "simulate",
        "oracle-ratio",
        "--config",
        path_str(&fixture("adaptivity.json")),
        "--replications",
        "3",
        "--seed",
        "9",
    ]);
    assert_eq!(v["config"]["replications"], 3);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_passes() {
    let v = ok_json(&["verify", "--json"]);
    assert_eq!(v["failed"], 0);
    let out = run(&["verify"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));
}
