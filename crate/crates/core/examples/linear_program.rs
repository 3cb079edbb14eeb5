// The bundled simplex solver on a small explicit LP.
//
// `cargo run --example linear_program`

use pac_barrier::lp::{solve_lp, LinearProgram, LpOutcome, Sense};

pub fn run_example() -> pac_barrier::Result<LpOutcome> {
    // max x + y  s.t.  x + 2y <= 4,  3x + y <= 6,  0 <= x, y <= 10.
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![-1.0, -1.0];
    lp.add_row(vec![1.0, 2.0], Sense::Le, 4.0);
    lp.add_row(vec![3.0, 1.0], Sense::Le, 6.0);
    lp.lower = vec![0.0, 0.0];
    lp.upper = vec![10.0, 10.0];
    let out = solve_lp(&lp, 1e-9)?;
    println!("{out:?}");
    Ok(out)
}

fn main() {
    run_example().expect("LP example");
}
