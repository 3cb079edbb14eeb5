// Describing a custom system in JSON. The envelope may be omitted, in
// which case it is computed from the interval image of the dynamics.
//
// `cargo run --example problem_file`

use pac_barrier::pipeline::parse_json;
use pac_barrier::problem::{CertificationProblem, ProblemSpec};

const PROBLEM: &str = r#"{
  "state_dim": 2,
  "disturbance_dim": 1,
  "dynamics": [
    {"arity": 3, "terms": [{"exp": [1, 0, 0], "coef": 0.9}, {"exp": [0, 1, 0], "coef": 0.1}]},
    {"arity": 3, "terms": [{"exp": [0, 1, 0], "coef": 0.8}, {"exp": [0, 0, 1], "coef": 0.05}]}
  ],
  "safe_set": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0},
  "disturbance": {"coords": [{"type": "uniform", "lo": -1.0, "hi": 1.0}]}
}"#;

pub fn run_example() -> pac_barrier::Result<CertificationProblem> {
    let spec: ProblemSpec = parse_json(PROBLEM)?;
    let problem = spec.into_problem()?;
    println!("envelope: {:?}", problem.envelope);
    println!(
        "x+ at (0.5, 0.5), d = 1: {:?}",
        problem.step(&[0.5, 0.5], &[1.0])
    );
    // Schema errors carry a JSON pointer.
    let broken = PROBLEM.replace("\"radius\": 1.0", "\"radius\": \"one\"");
    if let Err(e) = parse_json::<ProblemSpec>(&broken) {
        println!("rejected: {e}");
    }
    Ok(problem)
}

fn main() {
    run_example().expect("problem file example");
}
