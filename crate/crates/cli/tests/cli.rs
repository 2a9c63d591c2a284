use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minorfind"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn minorfind")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_petersen(dir: &Path) -> String {
    let path = dir.join("petersen.txt");
    let o = run(&["gen", "--family", "petersen", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    path.to_str().unwrap().to_owned()
}

#[test]
fn gen_is_seeded() {
    let a = run(&["--seed", "5", "gen", "--family", "regular", "--n", "40", "--d", "3"]);
    let b = run(&["--seed", "5", "gen", "--family", "regular", "--n", "40", "--d", "3"]);
    let c = run(&["--seed", "6", "gen", "--family", "regular", "--n", "40", "--d", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).starts_with("40 60"));
}

#[test]
fn gen_rejects_odd_regular() {
    let o = run(&["gen", "--family", "regular", "--n", "5", "--d", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn analyze_json_reports_exact_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_petersen(dir.path());
    let o = run(&["--format", "json", "analyze", &g, "--eps", "0.3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metrics"]["h"]["value"], 1.0);
    assert_eq!(v["metrics"]["h"]["method"], "exact");
    assert!((v["metrics"]["lambda_norm"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!(v["gate"]["route"].is_string());
}

#[test]
fn find_minor_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_petersen(dir.path());
    let w = dir.path().join("w.json");
    let o = run(&["find-minor", &g, "--eps", "0.3", "--mode", "constd", "-o", w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", &g, w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("valid"));

    // two non-adjacent singletons of the Petersen graph
    fs::write(&w, r#"{"kind":"complete","order":2,"branch_sets":[[0],[2]]}"#).unwrap();
    let o = run(&["verify", &g, w.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("invalid"));
}

#[test]
fn find_minor_json_history_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_petersen(dir.path());
    let o = run(&["--format", "json", "find-minor", &g, "--eps", "0.3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.get("history").is_none());
    let o = run(&["--format", "json", "find-minor", &g, "--eps", "0.3", "--emit-history"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["history"].as_array().is_some_and(|h| !h.is_empty()));
}

#[test]
fn sparse_regime_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_petersen(dir.path());
    let o = run(&["find-minor", &g, "--eps", "0.4", "--mode", "sparse"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime"));
}

#[test]
fn walk_and_cover() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_petersen(dir.path());
    let o = run(&["--format", "json", "walk", &g, "--steps", "30", "--start", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 31);
    assert_eq!(v["vertices"][0], 0);

    let t = dir.path().join("targets.json");
    fs::write(&t, "[[0,1,2],[7,8]]").unwrap();
    let o = run(&["--format", "json", "walk", &g, "--targets", t.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["set"].as_array().unwrap().is_empty());
}

#[test]
fn experiment_writes_csv_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"grid":{"families":["petersen","complete"],"n":[6]},
            "engine":{"eps":0.3,"mode":"constd"},"seeds":2,"budget_secs":30,
            "output":{"csv":"out.csv"}}"#,
    )
    .unwrap();
    let o = run(&["--jobs", "2", "experiment", cfg.to_str().unwrap()]);
    assert!(o.status.code().is_some_and(|c| c == 0 || c == 2), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(first.lines().count(), 5);
    assert_eq!(stdout(&o), first);

    let o = bin().args(["experiment", "--resume"]).env("MINORFIND_CONFIG", &cfg).output().unwrap();
    assert!(o.status.code().is_some());
    assert_eq!(fs::read_to_string(dir.path().join("out.csv")).unwrap(), first);
}

#[test]
fn experiment_bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema":1,"grid":{"families":[],"n":[]},"unknown":3}"#).unwrap();
    let o = run(&["experiment", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
