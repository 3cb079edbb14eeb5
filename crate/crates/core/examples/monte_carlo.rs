// Monte Carlo safety estimates with Clopper-Pearson intervals. Results do
// not depend on the number of worker threads.
//
// `cargo run --example monte_carlo`

use pac_barrier::benchmarks::load_benchmark;
use pac_barrier::verify::{mc_safety_estimate, SafetyEstimate};

pub fn run_example() -> pac_barrier::Result<Vec<SafetyEstimate>> {
    let p = load_benchmark("ex2-lotka")?.problem;
    let mut out = Vec::new();
    for x0 in [[0.0, 0.0], [0.5, 0.5], [-0.9, 0.3]] {
        let est = mc_safety_estimate(&p, &x0, 5, 20_000, 11, 0.99)?;
        println!(
            "x0 = {x0:?}: 5-step safety {:.4} in [{:.4}, {:.4}]",
            est.estimate, est.lower, est.upper
        );
        out.push(est);
    }
    Ok(out)
}

fn main() {
    run_example().expect("Monte Carlo example");
}
