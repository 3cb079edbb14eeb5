// Which statements each route licenses: multi-step bounds on the scenario
// route, one-step bounds elsewhere, and the Kushner bound for SBFs.
//
// `cargo run --example guarantee_rules`

use pac_barrier::guarantees::{kushner_bound, multistep_bound};

pub fn run_example() -> pac_barrier::Result<Vec<f64>> {
    let table: Vec<f64> = (1..=5).map(|k| multistep_bound(0.01, k)).collect();
    for (k, v) in table.iter().enumerate() {
        println!("(1 - 0.01)^{} = {v:.4}", k + 1);
    }
    // The Kushner bound is clamped at 0 once k lambda + h exceeds 1.
    for k in [1, 5, 20] {
        println!(
            "k = {k}: 1 - k 0.05 - 0.3 -> {:.2}",
            kushner_bound(0.05, 0.3, k)
        );
    }
    Ok(table)
}

fn main() {
    run_example().expect("guarantee example");
}
