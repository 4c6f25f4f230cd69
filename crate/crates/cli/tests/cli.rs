use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gmbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmbe"))
        .args(args)
        .env_remove("GMBE_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = gmbe(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", &p]);
    ok(&full);
    p
}

fn records(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn gen_ising_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--model", "ising-grid", "--rows", "10", "--cols", "10", "--t", "1.0", "--seed", "7"];
    let a = gen(dir.path(), "a.uai", &args);
    let b = gen(dir.path(), "b.uai", &args);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("MARKOV"));
    assert_eq!(lines.next(), Some("100"));
    lines.next();
    assert_eq!(lines.next(), Some("280"));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(format!("{a}.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "gen");
    assert_eq!(side["params"]["seed"], 7);
    assert!(side["git_hash"].is_string());
}

#[test]
fn gen_zero_strength_is_all_ones() {
    let text = ok(&["gen", "--model", "forney-3reg", "--factors", "4", "--t", "0", "--seed", "0"]);
    let mut lines = text.lines().skip(3);
    let m: usize = lines.next().unwrap().parse().unwrap();
    let values: Vec<f64> = lines
        .skip(m)
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4 * (1 + 8));
    assert!(values.chunks(9).all(|c| c[0] == 8.0 && c[1..].iter().all(|&x| x == 1.0)));
}

#[test]
fn be_matches_brute_force_and_unsplit_wmbe() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen(dir.path(), "m.uai", &["--model", "ising-grid", "--rows", "3", "--cols", "3", "--seed", "3"]);
    let be = json(&["bound", &m, "--method", "be"])["log_bound"].as_f64().unwrap();
    let brute = json(&["verify", &m, "--methods", "be"])["log_z"].as_f64().unwrap();
    assert!((be - brute).abs() < 1e-9);
    let wmbe = json(&["bound", &m, "--method", "wmbe", "--ibound", "99"])["log_bound"].as_f64().unwrap();
    assert!((wmbe - be).abs() < 1e-9);
}

#[test]
fn optimized_trace_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen(dir.path(), "m.uai", &["--model", "forney-3reg", "--factors", "12", "--seed", "1"]);
    let trace_path = dir.path().join("trace.csv");
    let r = json(&[
        "bound", &m, "--method", "wmbe-wg", "--ibound", "3", "--iters", "20",
        "--trace", trace_path.to_str().unwrap(),
    ]);
    let trace: Vec<f64> = r["trace"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(trace.len(), 21);
    assert_eq!(r["iters"], 20);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(trace[20] < trace[0]);
    let rows = records(&std::fs::read_to_string(trace_path).unwrap());
    assert_eq!(rows.len(), 21);
    assert_eq!(&rows[0][1], "WMBE-wG");
}

#[test]
fn verify_reports_sandwich() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen(dir.path(), "m.uai", &["--model", "forney-3reg", "--factors", "12", "--t", "1", "--seed", "5"]);
    let r = json(&["verify", &m, "--ibound", "3", "--iters", "10",
                   "--methods", "be,mbe,wmbe,wmbe-lower,wmbe-theta,wmbe-g"]);
    for line in r["results"].as_array().unwrap() {
        assert_eq!(line["status"], "ok", "{line}");
        let gap = line["gap"].as_f64().unwrap();
        match line["method"].as_str().unwrap() {
            "be" => assert!(gap.abs() < 1e-9),
            "wmbe-lower" => assert!(gap <= 1e-9),
            _ => assert!(gap >= -1e-9),
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(gmbe(&["bound"]).status.code(), Some(1));
    assert_eq!(gmbe(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gmbe(&["bound", "/nonexistent/model.uai"]).status.code(), Some(1));
    assert_eq!(gmbe(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let m = gen(dir.path(), "m.uai", &["--model", "forney-3reg", "--factors", "4"]);
    assert_eq!(gmbe(&["bound", &m, "--method", "wmbe-g", "--lower"]).status.code(), Some(1));
    // arity-3 factors do not fit ibound 2
    assert_eq!(gmbe(&["bound", &m, "--method", "mbe", "--ibound", "2"]).status.code(), Some(2));
    let bad = dir.path().join("bad.uai");
    std::fs::write(&bad, "MARKOV 1 2 1 1 0 2 0.3").unwrap();
    let out = gmbe(&["bound", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn sweep_counts_and_metric() {
    let text = ok(&[
        "sweep", "--model", "forney-3reg", "--factors", "10", "--t", "1.0", "--trials", "10",
        "--iters", "3", "--ibound", "3",
    ]);
    let rows = records(&text);
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| &r[11] == "ok" && &r[8] == "logZ_MBE"));
    let text = ok(&[
        "sweep", "--model", "forney-3reg", "--factors", "10", "--t", "0.5:1.5:0.5", "--trials", "2",
        "--iters", "2", "--ibound", "3", "--methods", "mbe,wmbe,wmbe-g",
    ]);
    let rows = records(&text);
    assert_eq!(rows.len(), 3 * 2 * 3);
    let ts: Vec<&str> = rows.iter().step_by(6).map(|r| &r[3]).collect();
    assert_eq!(ts, ["0.5", "1.0", "1.5"]);
    for r in rows.iter().filter(|r| &r[1] == "MBE") {
        assert_eq!(r[9].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn sweep_bytes_do_not_depend_on_workers() {
    let args = [
        "sweep", "--model", "ising-grid", "--rows", "4", "--cols", "4", "--t", "0.5:1.0:0.5",
        "--trials", "3", "--iters", "5", "--methods", "mbe,wmbe,wmbe-wtheta,wmbe-wg",
    ];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gmbe"))
            .args(args)
            .env("GMBE_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    let rows = records(std::str::from_utf8(&one).unwrap());
    assert_eq!(rows.len(), 2 * 3 * 4);
    assert!(rows.iter().all(|r| &r[8] == "logZ"));
}

#[test]
fn sweep_failures_are_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    ok(&[
        "sweep", "--model", "ising-grid", "--rows", "3", "--cols", "3", "--t", "1.0", "--trials", "2",
        "--ibound", "3", "--iters", "2", "--methods", "be,wmbe,wmbe-g", "-o", out.to_str().unwrap(),
    ]);
    let rows = records(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 6);
    for r in &rows {
        match &r[1] {
            "BE" => assert_eq!(&r[11], "ok"),
            _ => {
                assert!(r[11].starts_with("skipped:"), "{r:?}");
                assert_eq!(&r[6], "");
            }
        }
    }
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "sweep");
    assert_eq!(side["params"]["trials"], 2);
}
