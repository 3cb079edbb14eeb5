// Expected next-step features from disturbance moments: one polynomial per
// feature replaces an average over every sample at every state.
//
// `cargo run --example moment_trick`

use pac_barrier::benchmarks::load_benchmark;
use pac_barrier::certify::{mean_feature_polys, required_moment_degree, BarrierTemplate};
use pac_barrier::stochastics::{draw_samples, empirical_moments};

/// Returns the largest relative gap between the two routes.
pub fn run_example() -> pac_barrier::Result<f64> {
    let p = load_benchmark("ex1-vanderpol")?.problem;
    let t = BarrierTemplate::new(2, 4)?;
    let samples = draw_samples(&p.disturbance, 2000, 3)?;
    let deg = required_moment_degree(&t.basis, &p.dynamics, 2);
    let moments = empirical_moments(&samples, deg);
    let means = mean_feature_polys(&t.basis, &p.dynamics, 2, &moments)?;
    let x = [0.3, -0.4];
    let mut worst: f64 = 0.0;
    let mut g = vec![0.0; t.size()];
    let mut direct = vec![0.0; t.size()];
    for j in 0..samples.m {
        t.features(&p.step(&x, samples.sample(j)), &mut g);
        for (acc, v) in direct.iter_mut().zip(&g) {
            *acc += v / samples.m as f64;
        }
    }
    for (mp, d) in means.iter().zip(&direct) {
        let viam = mp.eval(&x)?;
        worst = worst.max((viam - d).abs() / d.abs().max(1e-300));
    }
    println!(
        "{} features, moments up to degree {deg}, max relative gap {worst:e}",
        t.size()
    );
    Ok(worst)
}

fn main() {
    run_example().expect("moment example");
}
