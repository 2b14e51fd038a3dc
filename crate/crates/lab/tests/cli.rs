use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "scenario,method,metric,mean,sem,sd,reps,seed";

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("lab runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = lab(args, cwd);
    assert!(
        out.status.success(),
        "lab {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

const SEQ_CONFIG: &str = r#"{
  "kind": "sequential",
  "scenario": {
    "label": "small",
    "s0": 2,
    "d": 12,
    "horizon": 80,
    "methods": [
      {"estimator": "opt_lasso", "c0": 0.8, "c0_hard": 0.6},
      {"estimator": "lasso", "c0": 0.8},
      {"estimator": "oracle_ls"}
    ]
  },
  "reps": 3,
  "seed": 11
}"#;

#[test]
fn run_is_deterministic_and_reproducible_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), SEQ_CONFIG).unwrap();
    let stdout = ok(&["run", "--config", "cfg.json", "--out", "a"], d);
    ok(
        &["run", "--config", "cfg.json", "--out", "b", "--jobs", "2"],
        d,
    );
    let table = read(d.join("a/table.csv"));
    assert_eq!(table.lines().next().unwrap(), HEADER);
    assert_eq!(table, stdout);
    assert_eq!(table, read(d.join("b/table.csv")));
    assert!(!table.contains('\r'));

    ok(&["run", "--config", "a/manifest.json", "--out", "c"], d);
    assert_eq!(table, read(d.join("c/table.csv")));
    assert_eq!(read(d.join("a/curves.csv")), read(d.join("c/curves.csv")));

    let manifest: serde_json::Value =
        serde_json::from_str(&read(d.join("a/manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["experiments"][0]["reps"], 3);
    assert!(manifest["version"].as_str().unwrap().starts_with('v'));
    assert!(manifest["wall_time_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn preset_with_overrides_is_job_independent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "preset", "bandit-a", "--reps", "2", "--T", "150", "--seed", "3",
    ];
    let mut one = args.to_vec();
    one.extend(["--jobs", "1", "--out", "one"]);
    let mut two = args.to_vec();
    two.extend(["--jobs", "2", "--out", "two"]);
    ok(&one, d);
    ok(&two, d);
    let t = read(d.join("one/table.csv"));
    assert_eq!(t, read(d.join("two/table.csv")));
    for p in ["three_stage", "two_stage_opt", "two_stage_lasso"] {
        assert!(t.contains(&format!("bandit-a,{p},cum_regret,")), "{t}");
    }
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), SEQ_CONFIG).unwrap();
    ok(&["run", "--config", "cfg.json", "--out", "a"], d);
    ok(
        &[
            "plot",
            "--curves",
            "a/curves.csv",
            "--out",
            "fig.svg",
            "--metric",
            "running_error",
        ],
        d,
    );
    let svg = read(d.join("fig.svg"));
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    let out = lab(
        &[
            "plot",
            "--curves",
            "a/curves.csv",
            "--out",
            "x.svg",
            "--metric",
            "nope",
        ],
        d,
    );
    assert!(!out.status.success());
}

#[test]
fn fixtures_packing_dumps_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "fixtures",
            "packing",
            "--d",
            "20",
            "--s",
            "3",
            "--r",
            "1",
            "--delta",
            "0.1",
            "--samples",
            "50",
            "--out",
            "fx",
        ],
        d,
    );
    let table = read(d.join("fx/table.csv"));
    assert!(table.contains(",packing,size,"));
    let omega = read(d.join("fx/omega1.csv"));
    assert_eq!(omega.lines().count(), 51);
    assert!(read(d.join("fx/packing.csv")).starts_with("vector,coordinate,value\n"));
    let bad = lab(
        &[
            "fixtures", "packing", "--d", "7", "--s", "4", "--out", "fx2",
        ],
        d,
    );
    assert!(!bad.status.success());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bad.json"),
        SEQ_CONFIG.replace("\"s0\": 2", "\"s0\": 0"),
    )
    .unwrap();
    let out = lab(&["run", "--config", "bad.json", "--out", "x"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`s0`"));
    fs::write(
        d.join("typo.json"),
        SEQ_CONFIG.replace("\"horizon\"", "\"horizn\""),
    )
    .unwrap();
    assert!(!lab(&["run", "--config", "typo.json", "--out", "x"], d)
        .status
        .success());
}

#[test]
fn sweep_flags_one_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), SEQ_CONFIG).unwrap();
    ok(
        &[
            "sweep",
            "--config",
            "cfg.json",
            "--c0",
            "0.8,1",
            "--c0-hard",
            "0.4,0.6",
            "--out",
            "sw",
        ],
        d,
    );
    let cells = read(d.join("sw/sweep.csv"));
    assert_eq!(cells.lines().count(), 5);
    assert_eq!(cells.matches(",true").count(), 1);
    ok(&["run", "--config", "sw/manifest.json", "--out", "sw2"], d);
    assert_eq!(read(d.join("sw/table.csv")), read(d.join("sw2/table.csv")));
}
