// Sample budgets for the three PAC routes.
//
// `cargo run --example sample_size`

use pac_barrier::bounds::{
    rademacher_sample_size, scenario_sample_size, vc_sample_size, SampleBudget,
};

pub fn run_example() -> pac_barrier::Result<Vec<SampleBudget>> {
    // A degree-6 template in two states has 28 coefficients.
    let vc = vc_sample_size(0.1, 1e-3, 28)?;
    let scenario = scenario_sample_size(0.1, 1e-3, 28)?;
    // Rademacher route: |a|_2 <= 2, margin tau = 0.1, feature radius 3.
    let rademacher = rademacher_sample_size(2.0, 0.1, 1e-3, 3.0)?;
    for b in [&vc, &scenario, &rademacher] {
        println!("{:?}: M = {} (bound {:.2})", b.route, b.m, b.bound);
    }
    Ok(vec![vc, scenario, rademacher])
}

fn main() {
    run_example().expect("sample sizes");
}
