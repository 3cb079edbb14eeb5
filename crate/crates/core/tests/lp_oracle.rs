//! The bundled simplex against microlp on explicit instances, plus the
//! structural properties of the RBF collocation LP.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use pac_barrier::benchmarks::load_benchmark;
use pac_barrier::certify::{build_rbf_lp, collocation_points, BarrierTemplate, SynthesisConfig};
use pac_barrier::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use pac_barrier::stochastics::{draw_samples, sample_states};
use proptest::prelude::*;

/// Objective from microlp, or `None` when it reports infeasibility.
fn microlp_objective(lp: &LinearProgram) -> Option<f64> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..lp.num_vars)
        .map(|j| p.add_var(lp.objective[j], (lp.lower[j], lp.upper[j])))
        .collect();
    for r in &lp.rows {
        let op = match r.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Ge => ComparisonOp::Ge,
            Sense::Eq => ComparisonOp::Eq,
        };
        let expr: Vec<_> = vars.iter().zip(&r.coefs).map(|(&v, &c)| (v, c)).collect();
        p.add_constraint(expr, op, r.rhs);
    }
    match p.solve() {
        Ok(out) => out.solution().map(|s| s.objective()),
        Err(microlp::Error::Infeasible) => None,
        Err(e) => panic!("microlp: {e:?}"),
    }
}

fn optimum(lp: &LinearProgram) -> (Vec<f64>, f64) {
    match solve_lp(lp, 1e-9).unwrap() {
        LpOutcome::Optimal { x, objective } => (x, objective),
        other => panic!("expected an optimum, got {other:?}"),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

/// Random bounded LPs that are feasible by construction: every row holds
/// at `x0` with nonnegative slack.
fn feasible_lp() -> impl Strategy<Value = LinearProgram> {
    (2usize..6, 1usize..14).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(-4.0..4.0f64, n),
            prop::collection::vec(
                (prop::collection::vec(-5.0..5.0f64, n), 0.0..2.0f64, 0u8..3),
                m,
            ),
        )
            .prop_map(move |(c, x0, rows)| {
                let mut lp = LinearProgram::new(n);
                lp.objective = c;
                lp.lower = vec![-5.0; n];
                lp.upper = vec![5.0; n];
                for (coefs, slack, kind) in rows {
                    let at: f64 = coefs.iter().zip(&x0).map(|(a, b)| a * b).sum();
                    match kind {
                        0 => lp.add_row(coefs, Sense::Le, at + slack),
                        1 => lp.add_row(coefs, Sense::Ge, at - slack),
                        _ => lp.add_row(coefs, Sense::Eq, at),
                    }
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplex_matches_microlp(lp in feasible_lp()) {
        let (x, obj) = optimum(&lp);
        prop_assert!(lp.max_violation(&x) <= 1e-7, "residual {}", lp.max_violation(&x));
        prop_assert!((lp.objective_value(&x) - obj).abs() <= 1e-9);
        let other = microlp_objective(&lp).expect("feasible by construction");
        prop_assert!(close(obj, other), "simplex {obj} vs microlp {other}");
    }
}

#[test]
fn both_solvers_report_infeasibility() {
    let mut lp = LinearProgram::new(2);
    lp.lower = vec![-1.0, -1.0];
    lp.upper = vec![1.0, 1.0];
    lp.add_row(vec![1.0, 1.0], Sense::Ge, 1.5);
    lp.add_row(vec![1.0, -1.0], Sense::Ge, 0.8);
    assert_eq!(solve_lp(&lp, 1e-9).unwrap(), LpOutcome::Infeasible);
    assert_eq!(microlp_objective(&lp), None);
}

/// A small explicit RBF LP on the Van der Pol benchmark.
fn rbf_lp(m: usize) -> LinearProgram {
    let p = load_benchmark("ex1-vanderpol").unwrap().problem;
    let t = BarrierTemplate::new(2, 4).unwrap();
    let cfg = SynthesisConfig {
        collocation_per_axis: 8,
        boundary_points: 16,
        ..Default::default()
    };
    let samples = draw_samples(&p.disturbance, 40, 5).unwrap().truncated(m);
    let colloc = collocation_points(&p, &cfg);
    let anchors = sample_states(&p.safe_set, 50, 5);
    build_rbf_lp(&p, &t, &samples, &colloc, &anchors, &cfg, 100.0)
}

#[test]
fn rbf_lp_admits_zero() {
    let lp = rbf_lp(10);
    assert!(lp.max_violation(&vec![0.0; lp.num_vars]) <= 0.0);
}

#[test]
fn rbf_objective_nondecreasing_on_nested_samples() {
    let mut last = f64::NEG_INFINITY;
    for m in [5, 10, 20, 40] {
        let lp = rbf_lp(m);
        let (x, obj) = optimum(&lp);
        assert!(lp.max_violation(&x) <= 1e-7);
        let other = microlp_objective(&lp).expect("a = 0 is feasible");
        assert!(
            close(obj, other),
            "M = {m}: simplex {obj} vs microlp {other}"
        );
        assert!(obj >= last - 1e-9, "M = {m}: {obj} < {last}");
        last = obj;
    }
}
