use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

fn infoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infoflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Random-walk price CSV; `days` consecutive calendar days from 2001-01-01.
fn write_walk(path: &Path, labels: &[&str], days: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.01).unwrap();
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let mut prices = vec![100.0f64; labels.len()];
    let mut text = format!("date,{}\n", labels.join(","));
    for d in 0..days {
        let date = start + Duration::days(d as i64);
        let row: Vec<String> = prices.iter().map(|p| format!("{p:.6}")).collect();
        text.push_str(&format!("{},{}\n", date.format("%Y-%m-%d"), row.join(",")));
        for p in prices.iter_mut() {
            *p *= f64::exp(normal.sample(&mut rng));
        }
    }
    fs::write(path, text).unwrap();
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn compute_writes_default_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("prices.csv");
    write_walk(&input, &["801010", "801020", "801030"], 400, 1);
    let out = dir.path().join("out");
    let res = infoflow(&["compute", "--input", s(&input), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        listing(&out),
        [
            "asymmetry_matrix.csv",
            "flows.csv",
            "regression.json",
            "run_manifest.json",
            "te_matrix.csv"
        ]
    );
    let te = read_csv(&out.join("te_matrix.csv"));
    assert_eq!(te.len(), 3);
    for (i, row) in te.iter().enumerate() {
        assert_eq!(row[i + 1], "0");
    }
    let manifest = read_json(&out.join("run_manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["estimator"]["q"], 15);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.csv");
    let res = infoflow(&["compute", "--input", s(&missing), "--out", s(&dir.path().join("o"))]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("nowhere.csv"));
    assert!(!dir.path().join("o").join("te_matrix.csv").exists());
}

#[test]
fn evolve_yearly_windows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("prices.csv");
    // 2001 through 2003.
    write_walk(&input, &["a", "b", "c"], 365 * 3, 2);
    let out = dir.path().join("out");
    let res = infoflow(&[
        "evolve", "--input", s(&input), "--window", "calendar-year", "--out", s(&out), "--emit",
        "evolution,matrices",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out.join("evolution.csv"));
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["2001", "2002", "2003"]);
    for year in ["2001", "2002", "2003"] {
        assert!(out.join(format!("te_matrix_{year}.csv")).exists());
    }

    let res = infoflow(&[
        "evolve", "--input", s(&input), "--min-observations", "400", "--out",
        s(&dir.path().join("none")),
    ]);
    assert!(!res.status.success());
}

#[test]
fn scan_q_rows_and_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("prices.csv");
    write_walk(&input, &["a", "b", "c", "d"], 600, 3);

    let scan = dir.path().join("scan");
    assert!(infoflow(&["scan-q", "--input", s(&input), "--out", s(&scan)]).status.success());
    let rows = read_csv(&scan.join("qscan.csv"));
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], "2");
    assert_eq!(rows[20][0], "22");

    let single = dir.path().join("single");
    let res = infoflow(&[
        "scan-q", "--input", s(&input), "--q-min", "15", "--q-max", "15", "--out", s(&single),
    ]);
    assert!(res.status.success());
    let row = &read_csv(&single.join("qscan.csv"))[0];

    let comp = dir.path().join("comp");
    assert!(infoflow(&["compute", "--input", s(&input), "--out", s(&comp)]).status.success());
    let summary = &read_json(&comp.join("run_manifest.json"))["summary"];
    let mean_te: f64 = row[1].parse().unwrap();
    let mean_abs: f64 = row[2].parse().unwrap();
    assert!((mean_te - summary["mean_te"].as_f64().unwrap()).abs() < 1e-10);
    assert!((mean_abs - summary["mean_abs_asymmetry"].as_f64().unwrap()).abs() < 1e-10);

    let res = infoflow(&[
        "scan-q", "--input", s(&input), "--q-min", "10", "--q-max", "5", "--out",
        s(&dir.path().join("bad")),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn synth_is_reproducible_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let res = infoflow(&["synth", "--kind", "lagged-copy", "--alphabet", "3", "--length", "500",
            "--seed", "9", "--out", s(p)]);
        assert!(res.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(dir.path().join("a.manifest.json").exists());

    let res = infoflow(&["synth", "--epsilon", "0.7", "--out", s(&dir.path().join("c.csv"))]);
    assert!(!res.status.success());
    assert!(!dir.path().join("c.csv").exists());
}

#[test]
fn synth_then_compute_recovers_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    let res = infoflow(&["synth", "--kind", "coupled-binary", "--epsilon", "0.1", "--length",
        "100000", "--seed", "4", "--out", s(&panel)]);
    assert!(res.status.success());
    let out = dir.path().join("out");
    let res = infoflow(&["compute", "--input", s(&panel), "--out", s(&out), "--emit",
        "matrices,flows"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let te = read_csv(&out.join("te_matrix.csv"));
    let x_to_y: f64 = te[0][2].parse().unwrap();
    let y_to_x: f64 = te[1][1].parse().unwrap();
    assert_eq!(te[0][0], "x");
    assert!((x_to_y - 0.531).abs() < 0.02, "{x_to_y}");
    assert!(y_to_x < 0.01, "{y_to_x}");
}

#[test]
fn flows_and_regress_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("prices.csv");
    write_walk(&input, &["a", "b", "c", "d", "e"], 500, 5);
    let full = dir.path().join("full");
    assert!(infoflow(&["compute", "--input", s(&input), "--out", s(&full)]).status.success());

    let flows = dir.path().join("flows");
    let res = infoflow(&["flows", "--matrix", s(&full.join("te_matrix.csv")), "--out", s(&flows)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    // The matrix file carries 12 significant digits, so recomputed flows agree to that precision.
    let direct = read_csv(&full.join("flows.csv"));
    let again = read_csv(&flows.join("flows.csv"));
    assert_eq!(direct.len(), again.len());
    for (a, b) in direct.iter().zip(&again) {
        assert_eq!(a[0], b[0]);
        assert_eq!(a[4], b[4]);
        for k in 1..4 {
            let (x, y): (f64, f64) = (a[k].parse().unwrap(), b[k].parse().unwrap());
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    let reg = dir.path().join("reg");
    let res = infoflow(&["regress", "--flows", s(&flows.join("flows.csv")), "--out", s(&reg)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let direct = read_json(&full.join("regression.json"));
    let again = read_json(&reg.join("regression.json"));
    for key in ["slope", "intercept", "r2_adjusted", "p_slope", "p_intercept"] {
        let (x, y) = (direct[key].as_f64().unwrap(), again[key].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{key}: {x} vs {y}");
    }
}

#[test]
fn forward_fill_policy_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let input: PathBuf = dir.path().join("gappy.csv");
    write_walk(&input, &["a", "b", "c"], 200, 6);
    let text = fs::read_to_string(&input).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // Blank one cell of column b.
    let mut cells: Vec<&str> = lines[50].split(',').collect();
    cells[2] = "";
    lines[50] = cells.join(",");
    fs::write(&input, lines.join("\n")).unwrap();

    let dropped = dir.path().join("drop");
    assert!(infoflow(&["compute", "--input", s(&input), "--out", s(&dropped)]).status.success());
    let filled = dir.path().join("fill");
    assert!(infoflow(&["compute", "--input", s(&input), "--align", "ffill:3", "--out", s(&filled)])
        .status
        .success());
    let m_drop = read_json(&dropped.join("run_manifest.json")).to_string();
    let m_fill = read_json(&filled.join("run_manifest.json")).to_string();
    assert_ne!(m_drop, m_fill);
    assert!(m_fill.contains("ffill") || m_fill.contains("forward"));
}
