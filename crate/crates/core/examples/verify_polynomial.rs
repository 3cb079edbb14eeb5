// Interval branch-and-bound on polynomial inequalities: one that holds on
// the region and one that fails, with the witness it returns.
//
// `cargo run --example verify_polynomial`

use pac_barrier::poly::Polynomial;
use pac_barrier::region::Region;
use pac_barrier::verify::{verify_inequality, InequalitySense, Verdict};

pub fn run_example() -> pac_barrier::Result<(Verdict, Verdict)> {
    let (x, y) = (Polynomial::var(2, 0), Polynomial::var(2, 1));
    let sq = &(&x - &y).pow(2) + &(&x * &y).pow(2);
    let region = Region::unit_ball(2);
    // (x - y)^2 + x^2 y^2 + 0.01 >= 0 holds everywhere.
    let holds = verify_inequality(
        &sq.add_constant(0.01),
        InequalitySense::Ge,
        &region,
        0.0,
        100_000,
    )?;
    // (x - y)^2 + x^2 y^2 >= 0.05 fails near the diagonal.
    let fails = verify_inequality(
        &sq.add_constant(-0.05),
        InequalitySense::Ge,
        &region,
        0.0,
        100_000,
    )?;
    println!("holds: {:?} after {} boxes", holds.verdict, holds.boxes);
    println!("fails: {:?}", fails.verdict);
    Ok((holds.verdict, fails.verdict))
}

fn main() {
    run_example().expect("verification example");
}
