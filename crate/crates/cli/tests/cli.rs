//! End-to-end runs of the `shocknet` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shocknet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shocknet"))
        .args(args)
        .env_remove("SHOCKNET_WORKERS")
        .output()
        .unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/fixtures")
        .join(name)
}

fn grid(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/grids")
        .join(name)
        .display()
        .to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn model_args(name: &str) -> Vec<String> {
    let dir = fixture(name);
    vec![
        "--economy-dir".into(),
        s(&dir),
        "--scenario".into(),
        s(&dir.join("scenario.json")),
    ]
}

fn run(cmd: &str, mut args: Vec<String>, extra: &[&str]) -> Output {
    args.extend(extra.iter().map(|a| a.to_string()));
    let mut all = vec![cmd];
    all.extend(args.iter().map(String::as_str));
    shocknet(&all)
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn validate_data_reports_clean_fixture() {
    let out = run("validate-data", model_args("d2"), &[]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 sectors, identity OK"));
}

#[test]
fn validation_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture("d2")).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, tmp.path().join(p.file_name().unwrap())).unwrap();
    }
    let states = tmp.path().join("initial_states.csv");
    fs::write(&states, read(&states).replace("S0,110,", "S0,120,")).unwrap();
    let args = vec![
        "--economy-dir".to_string(),
        s(tmp.path()),
        "--scenario".into(),
        s(&tmp.path().join("scenario.json")),
    ];
    let out = run("validate-data", args.clone(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("S0"));
    let out = run("simulate", args, &["--out", &s(&tmp.path().join("out"))]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(shocknet(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(shocknet(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = s(&tmp.path().join("missing.csv"));
    let out = shocknet(&["compare", &missing, &missing]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("sim");
    let out = run(
        "simulate",
        model_args("d3"),
        &["--end-date", "2020-06-30", "--out", &s(&out_dir)],
    );
    assert_ok(&out);
    let traj = read(&out_dir.join("trajectory.csv"));
    assert!(traj.starts_with("t,date,sector,x,d,l,c,f,b2b_out\n"));
    // days 0..=121 for three sectors plus the national row
    assert_eq!(traj.lines().count(), 1 + 122 * 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["command"], "simulate");
    assert!(manifest["outputs"]["trajectory.csv"].is_string());
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 4);
}

#[test]
fn rerun_reproduces_outputs_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_ok(&run(
        "montecarlo",
        model_args("d3"),
        &[
            "--runs",
            "6",
            "--seed",
            "11",
            "--workers",
            "3",
            "--out",
            &s(&a),
        ],
    ));
    assert_ok(&shocknet(&[
        "rerun",
        &s(&a.join("manifest.json")),
        "--out",
        &s(&b),
    ]));
    for f in ["bands.csv", "samples.csv", "ensemble.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }

    let c = tmp.path().join("c");
    let d = tmp.path().join("d");
    assert_ok(&run(
        "simulate",
        model_args("d2"),
        &["--method", "continuous", "--out", &s(&c)],
    ));
    assert_ok(&shocknet(&[
        "rerun",
        &s(&c.join("manifest.json")),
        "--out",
        &s(&d),
    ]));
    assert_eq!(
        fs::read(c.join("trajectory.csv")).unwrap(),
        fs::read(d.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn rerun_refuses_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d2");
    fs::create_dir_all(&dir).unwrap();
    for entry in fs::read_dir(fixture("d2")).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, dir.join(p.file_name().unwrap())).unwrap();
    }
    let out_dir = tmp.path().join("run");
    let args = vec![
        "--economy-dir".to_string(),
        s(&dir),
        "--scenario".into(),
        s(&dir.join("scenario.json")),
    ];
    assert_ok(&run("simulate", args, &["--out", &s(&out_dir)]));
    let scenario = dir.join("scenario.json");
    fs::write(
        &scenario,
        read(&scenario).replace("\"b\": 0.7", "\"b\": 0.6"),
    )
    .unwrap();
    let out = shocknet(&[
        "rerun",
        &s(&out_dir.join("manifest.json")),
        "--out",
        &s(&tmp.path().join("again")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn grid_search_recovers_synthetic_point_and_resumes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    // the scenario defaults are tau = 14, gamma_f = 28, one of the toy grid points
    assert_ok(&run(
        "synthesize-data",
        model_args("d2"),
        &["--out", &s(&data)],
    ));
    let dataset = s(&data.join("dataset.csv"));
    let search = |out: &Path, extra: &[&str]| {
        let mut args = model_args("d2");
        args.extend(
            [
                "--grid",
                &grid("toy.json"),
                "--dataset",
                &dataset,
                "--out",
                &s(out),
            ]
            .map(String::from),
        );
        run("grid-search", args, extra)
    };

    let full = tmp.path().join("full");
    let out = search(&full, &["--workers", "1"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("tau=14;gamma_f=28"));
    let board = read(&full.join("leaderboard.csv"));
    let best: Vec<&str> = board.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(best, ["1", "3", "14", "28", "0.000000000"]);
    assert!(full.join("optimum_cells.csv").exists());

    let ck = s(&tmp.path().join("checkpoint.csv"));
    let part = tmp.path().join("part");
    assert_ok(&search(
        &part,
        &["--workers", "4", "--checkpoint", &ck, "--max-points", "2"],
    ));
    assert_eq!(read(&part.join("leaderboard.csv")).lines().count(), 3);
    assert!(!part.join("optimum_cells.csv").exists());
    assert_ok(&search(
        &part,
        &["--workers", "4", "--checkpoint", &ck, "--resume"],
    ));
    assert_eq!(read(&part.join("leaderboard.csv")), board);

    let out = search(&part, &["--resume"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_reports_deviations() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_ok(&run("simulate", model_args("d2"), &["--out", &s(&a)]));
    assert_ok(&run(
        "simulate",
        model_args("d2"),
        &["--dt", "0.5", "--out", &s(&b)],
    ));
    let out = shocknet(&[
        "compare",
        &s(&a.join("trajectory.csv")),
        &s(&b.join("trajectory.csv")),
    ]);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("column,max_abs,mean_abs,max_rel"));
    assert!(text.lines().any(|l| l.starts_with("x,")));
}

#[test]
fn generated_fixtures_match_shipped_ones() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ok(&shocknet(&["generate-fixtures", "--out", &s(tmp.path())]));
    for name in ["d2", "d3", "be_like"] {
        for entry in fs::read_dir(tmp.path().join(name)).unwrap() {
            let p = entry.unwrap().path();
            let shipped = fixture(name).join(p.file_name().unwrap());
            assert_eq!(
                fs::read(&p).unwrap(),
                fs::read(&shipped).unwrap(),
                "{}",
                p.display()
            );
        }
    }
    assert!(tmp.path().join("manifest.json").exists());
}
