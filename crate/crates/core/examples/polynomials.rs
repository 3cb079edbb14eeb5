// Sparse polynomial algebra: composition with dynamics, derivatives and
// rigorous interval enclosures.
//
// `cargo run --example polynomials`

use pac_barrier::interval::{eval_interval, Interval};
use pac_barrier::poly::Polynomial;

pub fn run_example() -> pac_barrier::Result<(f64, Interval)> {
    // h(x, y) = 1 - x^2 - y^2, dynamics x+ = 0.5 x - x y, y+ = 0.9 y.
    let (x, y) = (Polynomial::var(2, 0), Polynomial::var(2, 1));
    let h = &(&x.pow(2) + &y.pow(2)).scale(-1.0) + &Polynomial::constant(2, 1.0);
    let fx = &x.scale(0.5) - &(&x * &y);
    let fy = y.scale(0.9);
    let h_next = h.compose(&[fx, fy])?;
    let dh = h_next.derivative(0);
    let at = h_next.eval(&[0.4, -0.2])?;
    let bx = [Interval::new(-0.5, 0.5)?, Interval::new(-0.5, 0.5)?];
    let range = eval_interval(&h_next, &bx)?;
    println!("h(f(0.4, -0.2)) = {at}");
    println!("d/dx h(f(x, y)) has {} terms", dh.num_terms());
    println!(
        "h(f(x, y)) over [-0.5, 0.5]^2 lies in [{}, {}]",
        range.lo, range.hi
    );
    Ok((at, range))
}

fn main() {
    run_example().expect("polynomial example");
}
