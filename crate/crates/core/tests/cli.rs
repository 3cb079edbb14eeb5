//! The `pac-barrier` binary: subcommands, artifacts and exit codes
//! (0 success, 2 input error, 3 rejected or falsified, 4 budget exhausted).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pac-barrier"));
    c.env_remove("THREADS").env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn pac-barrier")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_size_prints_the_budget() {
    let o = run(&[
        "sample-size",
        "--route",
        "scenario",
        "--epsilon",
        "0.1",
        "--delta",
        "0.001",
        "--num-params",
        "28",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 699);
    assert_eq!(v["route"], "scenario");
}

#[test]
fn input_errors_exit_with_2() {
    let bad_eps = run(&[
        "sample-size",
        "--route",
        "vc",
        "--epsilon",
        "1.5",
        "--delta",
        "0.001",
        "--vc-dim",
        "3",
    ]);
    assert_eq!(code(&bad_eps), 2);
    let missing = run(&[
        "sample-size",
        "--route",
        "rademacher",
        "--delta",
        "0.001",
        "--ua",
        "2",
    ]);
    assert_eq!(code(&missing), 2);
    let unknown = run(&["run", "--benchmark", "no-such-system", "--seed", "1"]);
    assert_eq!(code(&unknown), 2);
    let dir = tempfile::tempdir().unwrap();
    // Multi-step statements are not licensed on the VC route; refused before any work.
    let vc_k = run(&[
        "run",
        "--benchmark",
        "ex1-vanderpol",
        "--route",
        "vc",
        "--horizon",
        "2",
        "--seed",
        "1",
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(code(&vc_k), 2);
    let no_seed = run(&["run", "--benchmark", "ex1-vanderpol"]);
    assert_eq!(code(&no_seed), 2);
    let threads = bin()
        .env("THREADS", "zero")
        .args(["bench-list"])
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
    let absent = run(&[
        "guarantee",
        "--cert",
        "/nonexistent/cert.json",
        "--out",
        p(&dir.path().join("pac.json")),
    ]);
    assert_eq!(code(&absent), 2);
}

#[test]
fn bench_list_names_all_systems() {
    let o = run(&["bench-list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in pac_barrier::benchmarks::NAMES {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn stage_by_stage_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("cand.json");
    let cert = dir.path().join("cert.json");
    let pac = dir.path().join("pac.json");
    let o = run(&[
        "synth-rbf",
        "--benchmark",
        "ex1-vanderpol",
        "--epsilon",
        "0.2",
        "--degree",
        "4",
        "--seed",
        "7",
        "--out",
        p(&cand),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    // A candidate carries no guarantee.
    let o = run(&["guarantee", "--cert", p(&cand), "--out", p(&pac)]);
    assert_eq!(code(&o), 3);

    // Too small a budget ends in Unknown.
    let o = run(&[
        "verify",
        "--cert",
        p(&cand),
        "--benchmark",
        "ex1-vanderpol",
        "--budget",
        "3",
    ]);
    assert_eq!(code(&o), 4);

    let o = run(&[
        "verify",
        "--cert",
        p(&cand),
        "--benchmark",
        "ex1-vanderpol",
        "--out",
        p(&cert),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let o = run(&[
        "guarantee",
        "--cert",
        p(&cert),
        "--horizon",
        "3",
        "--out",
        p(&pac),
    ]);
    assert_eq!(code(&o), 0);
    let g: serde_json::Value = serde_json::from_slice(&std::fs::read(&pac).unwrap()).unwrap();
    assert_eq!(g["theorem"], "Scenario-uniform-kstep");
    assert!((g["bound"]["value"].as_f64().unwrap() - 0.512).abs() < 1e-12);

    let csv = dir.path().join("validation.csv");
    let o = run(&[
        "mc-validate",
        "--cert",
        p(&cert),
        "--benchmark",
        "ex1-vanderpol",
        "--count",
        "5",
        "--trials",
        "500",
        "--out",
        p(&csv),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x1,x2,certified_bound,mc_estimate,cp_lower,cp_upper,pass"));
    assert_eq!(text.lines().count(), 6);

    // A barrier that is positive everywhere breaks the outside condition.
    let mut c: serde_json::Value = serde_json::from_slice(&std::fs::read(&cand).unwrap()).unwrap();
    let coeffs = c["coeffs"].as_array_mut().unwrap();
    for (i, v) in coeffs.iter_mut().enumerate() {
        *v = serde_json::json!(if i == 0 { 1.0 } else { 0.0 });
    }
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_vec(&c).unwrap()).unwrap();
    let o = run(&[
        "verify",
        "--cert",
        p(&broken),
        "--benchmark",
        "ex1-vanderpol",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn run_directory_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "run",
        "--benchmark",
        "ex1-vanderpol",
        "--seed",
        "7",
        "--out-dir",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "problem.json",
        "cert.json",
        "pac.json",
        "report.json",
        "validation.csv",
        "contour.csv",
        "summary.md",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let again = dir.path().join("again.json");
    let o = run(&[
        "verify",
        "--cert",
        p(&out.join("cert.json")),
        "--problem",
        p(&out.join("problem.json")),
        "--report",
        p(&again),
    ]);
    assert_eq!(code(&o), 0);
    let stored: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let fresh: serde_json::Value = serde_json::from_slice(&std::fs::read(&again).unwrap()).unwrap();
    assert_eq!(stored["verification"]["status"], fresh["status"]);
    let verdicts = |v: &serde_json::Value| -> Vec<serde_json::Value> {
        v["conditions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["verdict"].clone())
            .collect()
    };
    assert_eq!(verdicts(&stored["verification"]), verdicts(&fresh));
}
