// The full pipeline on a registered benchmark: sample size, synthesis,
// verification, guarantee, Monte Carlo validation and plot data.
//
// `cargo run --release --example benchmark_run [out-dir]`

use std::path::PathBuf;

use pac_barrier::bounds::Route;
use pac_barrier::pipeline::{run_pipeline, McSettings, RunConfig, RunResult};

pub fn run_in(out_dir: PathBuf) -> pac_barrier::Result<RunResult> {
    let mut cfg = RunConfig::new(Route::Scenario, 7, out_dir);
    cfg.benchmark = Some("ex1-vanderpol".into());
    cfg.horizon = 2;
    cfg.mc = McSettings {
        states: 20,
        trials: 2000,
        confidence: 0.99,
    };
    cfg.contour_resolution = 41;
    let result = run_pipeline(&cfg)?;
    println!(
        "{}",
        std::fs::read_to_string(cfg.out_dir.join("summary.md")).unwrap_or_default()
    );
    Ok(result)
}

pub fn run_example() -> pac_barrier::Result<RunResult> {
    let dir = std::env::temp_dir().join(format!("pac-barrier-example-{}", std::process::id()));
    let out = run_in(dir.clone());
    let _ = std::fs::remove_dir_all(&dir);
    out
}

fn main() {
    match std::env::args().nth(1) {
        Some(d) => run_in(PathBuf::from(d)).map(|_| ()),
        None => run_example().map(|_| ()),
    }
    .expect("pipeline example");
}
