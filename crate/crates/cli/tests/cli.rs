use std::path::Path;
use std::process::{Command, Output};

use resonance_core::dedekind::coefficient_oracle;

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonance"))
        .args(args)
        .env("RESONANCE_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>, Vec<String>) {
    let (body, summary): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| !l.starts_with("# "));
    let joined = body.join("\n");
    let mut r = csv::Reader::from_reader(joined.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows, summary.iter().map(|s| s[2..].to_string()).collect())
}

#[test]
fn coeffs_match_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["coeffs", "--d", "5", "--n-max", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (headers, rows, _) = csv_rows(&stdout(&o));
    assert_eq!(headers, ["n", "a_n"]);
    let oracle = coefficient_oracle(100, 5).unwrap();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let n: usize = row[0].parse().unwrap();
        assert_eq!(row[1].parse::<u64>().unwrap(), oracle[n]);
    }
}

#[test]
fn verify_suite_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--suite", "lemma2", "--d", "3", "--pairs", "10000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows, _) = csv_rows(&stdout(&o));
    assert_eq!(rows[0][0..4], ["lemma2", "10000", "0", "true"]);
}

#[test]
fn kernel_check_prints_hat_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["kernel", "--eta", "100", "--epsilon", "0.05", "--T", "10000", "--check", "lemma4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows, summary) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 200);
    let hat = summary.iter().find_map(|s| s.strip_prefix("hat_zero=")).unwrap();
    let hat: f64 = hat.parse().unwrap();
    assert!((hat / 0.30700 - 1.0).abs() < 0.05);
    assert!(summary.contains(&"lemma4=true".to_string()));
    let bad = run(dir.path(), &["kernel", "--eta", "4", "--T", "100", "--check", "nope"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_rows_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--d", "3", "--n-lo", "256", "--n-hi", "16384"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows, summary) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 7);
    let slope: f64 = summary[0].strip_prefix("slope=").unwrap().parse().unwrap();
    assert!(slope > 0.0);

    let o = run(dir.path(), &["sweep", "--d", "3", "--n-lo", "256", "--n-hi", "256", "--format", "json-lines"]);
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1]["slope"].is_null());

    let o = run(dir.path(), &["sweep", "--d", "3", "--n-lo", "512", "--n-hi", "256"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flags_and_keys_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["coeffs", "--d", "5", "--n-max", "10", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--bogus"));
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "d = 5\nwidget = 2\n").unwrap();
    let o = run(dir.path(), &["--config", conf.to_str().unwrap(), "coeffs", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("widget"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# shared settings\nd = 5\nn_max = 20\nbudget = 50\nformat = json-lines\n").unwrap();
    let o = run(dir.path(), &["--config", conf.to_str().unwrap(), "coeffs", "--n-max", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[10]["a_n"], 4);
}

#[test]
fn every_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["construct", "--d", "3", "--N", "1024"];
    let csv_out = stdout(&run(dir.path(), &base));
    let (headers, rows, summary) = csv_rows(&csv_out);
    assert_eq!(headers, ["index", "m", "omega", "log_value"]);
    assert!(summary.iter().any(|s| s == &format!("size={}", rows.len())));

    let json = stdout(&run(dir.path(), &[&base[..], &["--format", "json-lines"]].concat()));
    let objs: Vec<serde_json::Value> = json.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(objs.len(), rows.len() + 1);
    for (obj, row) in objs.iter().zip(&rows) {
        assert_eq!(obj["m"].as_str().unwrap(), row[1]);
        assert_eq!(obj["log_value"].as_f64().unwrap(), row[3].parse::<f64>().unwrap());
    }

    let text = stdout(&run(dir.path(), &[&base[..], &["--format", "text"]].concat()));
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), rows.len() + 1);
    for (block, row) in blocks.iter().zip(&rows) {
        let m = block.lines().find_map(|l| l.strip_prefix("m=")).unwrap();
        assert_eq!(m, row[1]);
    }
}

#[test]
fn serial_runs_are_byte_identical_and_cache_recovers() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name);
    let args = |file: &str| {
        vec![
            "--threads".to_string(),
            "1".into(),
            "galsum".into(),
            "--d".into(),
            "3".into(),
            "--N".into(),
            "4096".into(),
            "--table".into(),
            "profile".into(),
            "--output".into(),
            out(file).to_str().unwrap().to_string(),
        ]
    };
    let run_args = |file: &str| {
        let a = args(file);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        run(dir.path(), &refs)
    };
    assert!(run_args("a.csv").status.success());
    assert!(run_args("b.csv").status.success());
    let a = std::fs::read(out("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(out("b.csv")).unwrap());

    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("resonator-set-") && !name.ends_with(".sha256") {
            std::fs::write(&path, "resonator-set v1\ngarbage\n").unwrap();
        }
    }
    assert!(run_args("c.csv").status.success());
    assert_eq!(a, std::fs::read(out("c.csv")).unwrap());
    let provenance = std::fs::read_to_string(dir.path().join("provenance.jsonl")).unwrap();
    assert_eq!(provenance.lines().count(), 3);
    let first: serde_json::Value = serde_json::from_str(provenance.lines().next().unwrap()).unwrap();
    assert_eq!(first["command"], "galsum");
    assert_eq!(first["exit"], 0);
}

#[test]
fn search_appends_to_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("search.csv");
    let args = ["search", "--d", "3", "--T", "50", "--budget", "10", "--seed", "4", "--results", ledger.to_str().unwrap()];
    let o = run(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    run(dir.path(), &args);
    let (headers, rows, _) = csv_rows(&std::fs::read_to_string(&ledger).unwrap());
    assert_eq!(headers, ["seed", "T", "d", "budget", "t_star", "zeta_abs", "baseline_max", "reference"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
    let (_, out_rows, _) = csv_rows(&stdout(&o));
    assert_eq!(out_rows[0][6].parse::<f64>().unwrap(), rows[0][4].parse::<f64>().unwrap());
}

#[test]
fn zeta_grid_and_computation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["zeta", "--d", "4", "--sigma", "2", "--t-lo", "0", "--t-hi", "0", "--steps", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows, _) = csv_rows(&stdout(&o));
    let re: f64 = rows[0][1].parse().unwrap();
    assert!((re - 1.5067030099).abs() < 1e-9);
    let o = run(dir.path(), &["zeta", "--d", "4", "--sigma", "1", "--t-lo", "0", "--t-hi", "0", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
