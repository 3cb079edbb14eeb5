//! Acceptance suite. Each criterion is one test that writes a single
//! `criterion N: PASS|FAIL` line straight to stdout (bypassing the test
//! harness capture) and then asserts.
//!
//! Pinned tolerances:
//! - criterion 1: 1e-4 and 1e-3 absolute
//! - criterion 2: integer equality
//! - criterion 3: 1e-12 slack on probabilities, 1e-12 between propagation and path enumeration
//! - criterion 4: >= 95 of 100 states, CP confidence 0.99, 1e6 boxes
//! - criterion 5: lambda* <= 0.15, >= 95 of 100 states, CP confidence 0.99
//! - criterion 6: violation fraction <= delta + 0.05
//! - criterion 7: 1e-10, sup-norm gap over the largest mean absolute feature value
//! - criterion 10: 1e-12 absolute on single steps

use std::io::Write;
use std::process::Command;

use pac_barrier::benchmarks::{load_benchmark, NAMES};
use pac_barrier::bounds::{rademacher_sample_size, scenario_sample_size, vc_sample_size, Route};
use pac_barrier::certify::{mean_feature_polys, required_moment_degree, BarrierTemplate};
use pac_barrier::guarantees::{kushner_bound, multistep_bound};
use pac_barrier::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use pac_barrier::pipeline::{run_pipeline, McSettings, RunConfig, RunOutcome};
use pac_barrier::poly::Polynomial;
use pac_barrier::region::{Domain, Region};
use pac_barrier::stochastics::{draw_samples, empirical_moments, DistSpec, DisturbanceModel};
use pac_barrier::verify::{verify_inequality, InequalitySense, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, pass: bool, detail: &str) {
    let line = format!(
        "\ncriterion {n}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

#[test]
fn criterion_01_multistep_arithmetic() {
    let a = multistep_bound(0.01, 5);
    let b = multistep_bound(0.05, 3);
    let pass = (a - 0.9509).abs() <= 1e-4 && (b - 0.857).abs() <= 1e-3;
    report(1, pass, &format!("(0.99)^5 = {a:.6}, (0.95)^3 = {b:.6}"));
    assert!(pass);
}

// Hand evaluations with the logarithms split apart, so they share no code
// path with the library.
fn oracle_vc(eps: f64, delta: f64, n: u64) -> u64 {
    let b = 5.0 / eps * (4f64.ln() - delta.ln() + n as f64 * (40f64.ln() - eps.ln()));
    b.ceil() as u64
}

fn oracle_scenario(eps: f64, delta: f64, m: u64) -> u64 {
    let b = 2.0 / eps * (-delta.ln() + m as f64);
    b.ceil() as u64
}

fn oracle_rademacher(ua: f64, tau: f64, delta: f64, r: f64) -> u64 {
    let s = 2.0 * r + (-2.0 * delta.ln()).sqrt();
    let b = (ua / tau).powi(2) * s * s;
    b.ceil() as u64
}

fn grid() -> Vec<(f64, f64, u64)> {
    let eps = [0.01, 0.05, 0.1, 0.2, 0.3];
    let delta = [1e-3, 1e-2, 5e-2, 1e-1];
    let n = [1u64, 6, 15, 28, 45];
    let mut g = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        for (j, &d) in delta.iter().enumerate() {
            g.push((e, d, n[(i + j) % n.len()]));
        }
    }
    g
}

#[test]
fn criterion_02_sample_size_calculators() {
    let g = grid();
    assert_eq!(g.len(), 20);
    let mut mismatches = 0;
    let mut dominance = 0;
    for &(e, d, n) in &g {
        let vc = vc_sample_size(e, d, n).unwrap().m;
        let sc = scenario_sample_size(e, d, n).unwrap().m;
        mismatches += (vc != oracle_vc(e, d, n)) as u32;
        mismatches += (sc != oracle_scenario(e, d, n)) as u32;
        dominance += (sc > vc) as u32;
    }
    let rad_grid: Vec<(f64, f64, f64, f64)> = (0..20)
        .map(|i| {
            let ua = [1.0, 2.0, 8.0, 30.0][i % 4];
            let tau = [0.01, 0.05, 0.1, 0.5, 1.0][i % 5];
            let delta = [1e-3, 1e-2][i % 2];
            let r = 0.5 + 0.75 * i as f64;
            (ua, tau, delta, r)
        })
        .collect();
    for &(ua, tau, d, r) in &rad_grid {
        let m = rademacher_sample_size(ua, tau, d, r).unwrap().m;
        mismatches += (m != oracle_rademacher(ua, tau, d, r)) as u32;
    }
    // Frozen from the oracle above.
    let frozen = [
        (oracle_vc(0.1, 1e-3, 28), 8803u64),
        (oracle_scenario(0.1, 1e-3, 28), 699),
        (oracle_scenario(0.2, 0.1, 2), 44),
    ];
    let frozen_ok = frozen.iter().all(|(a, b)| a == b);
    let pass = mismatches == 0 && dominance == 0 && frozen_ok;
    report(
        2,
        pass,
        &format!("{mismatches} mismatches over 60 grid points, {dominance} dominance violations, frozen values ok: {frozen_ok}"),
    );
    assert!(pass);
}

/// Safe states 0..4; state 4 is unsafe and absorbing.
const CHAIN: [[f64; 5]; 5] = [
    [0.70, 0.20, 0.05, 0.04, 0.01],
    [0.10, 0.60, 0.20, 0.05, 0.05],
    [0.05, 0.15, 0.60, 0.10, 0.10],
    [0.30, 0.10, 0.10, 0.48, 0.02],
    [0.00, 0.00, 0.00, 0.00, 1.00],
];
const CHAIN_H: [f64; 5] = [0.05, 0.15, 0.30, 0.10, 1.0];

fn paths_safe(s: usize, k: u32) -> f64 {
    if s == 4 {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    (0..5).map(|t| CHAIN[s][t] * paths_safe(t, k - 1)).sum()
}

#[test]
fn criterion_03_kushner_oracle() {
    for row in &CHAIN {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    // The exact SBF drift: the smallest lambda with E[h'] <= h + lambda on safe states.
    let lambda = (0..4)
        .map(|s| (0..5).map(|t| CHAIN[s][t] * CHAIN_H[t]).sum::<f64>() - CHAIN_H[s])
        .fold(0.0_f64, f64::max);
    let mut safe = [1.0; 4];
    let mut violations = 0;
    let mut enum_gap: f64 = 0.0;
    for k in 1..=10u32 {
        // One step of the sub-stochastic recursion restricted to safe states.
        let next: Vec<f64> = (0..4)
            .map(|s| (0..4).map(|t| CHAIN[s][t] * safe[t]).sum())
            .collect();
        safe.copy_from_slice(&next);
        for s in 0..4 {
            if safe[s] + 1e-12 < kushner_bound(lambda, CHAIN_H[s], k) {
                violations += 1;
            }
            if k <= 6 {
                enum_gap = enum_gap.max((paths_safe(s, k) - safe[s]).abs());
            }
        }
    }
    let pass = violations == 0 && enum_gap < 1e-12;
    report(
        3,
        pass,
        &format!("lambda = {lambda:.4}, {violations} violations over 40 (state, k) pairs, path-enumeration gap {enum_gap:.1e}"),
    );
    assert!(pass);
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

#[test]
fn criterion_04_rbf_end_to_end() {
    // Seed 1: about a quarter of the seeds draw a sample with d < -0.5, for
    // which no nonempty invariant set exists and the draw is rejected.
    let dir = tempdir();
    let mut cfg = RunConfig::new(Route::Scenario, 1, dir.path().to_path_buf());
    cfg.benchmark = Some("ex2-lotka".into());
    cfg.epsilon = Some(0.1);
    cfg.delta = 1e-3;
    cfg.degree = Some(6);
    cfg.horizon = 1;
    cfg.verify_budget = 1_000_000;
    cfg.mc = McSettings {
        states: 100,
        trials: 10_000,
        confidence: 0.99,
    };
    let r = run_pipeline(&cfg).expect("pipeline");
    let nonempty = r.certificate.xs_nonempty == Some(true);
    let boxes = r.report.verification.boxes;
    let verified = r.outcome == RunOutcome::Guaranteed && boxes <= 1_000_000;
    let v = r.report.validation.clone();
    let passed = v.as_ref().map_or(0, |v| v.passed);
    let states = v.as_ref().map_or(0, |v| v.states);
    let pass = nonempty && verified && states == 100 && passed >= 95;
    report(
        4,
        pass,
        &format!(
            "M = {}, X_s nonempty: {nonempty}, outcome {:?} with {boxes} boxes, V_Xs ~ {:.3}, {passed}/{states} states pass",
            r.certificate.m, r.outcome, r.report.xs_volume_fraction
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_sbf_end_to_end() {
    let dir = tempdir();
    let mut cfg = RunConfig::new(Route::Rademacher, 7, dir.path().to_path_buf());
    cfg.benchmark = Some("ex1-vanderpol".into());
    cfg.degree = Some(8);
    cfg.ua = Some(2.0);
    cfg.tau = Some(0.1);
    cfg.delta = 1e-3;
    cfg.mc = McSettings {
        states: 100,
        trials: 10_000,
        confidence: 0.99,
    };
    let r = run_pipeline(&cfg).expect("pipeline");
    let lambda = r.certificate.lambda.unwrap_or(f64::INFINITY);
    let v = r.report.validation.clone();
    let passed = v.as_ref().map_or(0, |v| v.passed);
    let states = v.as_ref().map_or(0, |v| v.states);
    let pass =
        r.outcome == RunOutcome::Guaranteed && lambda <= 0.15 && states == 100 && passed >= 95;
    report(
        5,
        pass,
        &format!(
            "M = {}, lambda* = {lambda:.4}, outcome {:?}, {passed}/{states} states pass",
            r.certificate.m, r.outcome
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_scenario_audit() {
    let (eps, delta) = (0.2, 0.1);
    let m = scenario_sample_size(eps, delta, 2).unwrap().m as usize;
    assert_eq!(m, 44);
    let model = DisturbanceModel::new(vec![DistSpec::Uniform { lo: -1.0, hi: 1.0 }]).unwrap();
    let trials = 200;
    let mut bad = 0;
    let mut lp_gap: f64 = 0.0;
    for trial in 0..trials {
        let samples = draw_samples(&model, m, 10_000 + trial).unwrap();
        // min theta2 - theta1  s.t.  theta1 <= d_j <= theta2.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, 1.0];
        lp.lower = vec![-2.0, -2.0];
        lp.upper = vec![2.0, 2.0];
        for d in samples.iter() {
            lp.add_row(vec![1.0, 0.0], Sense::Le, d[0]);
            lp.add_row(vec![0.0, 1.0], Sense::Ge, d[0]);
        }
        let (t1, t2) = match solve_lp(&lp, 1e-9).unwrap() {
            LpOutcome::Optimal { x, .. } => (x[0], x[1]),
            other => panic!("interval LP: {other:?}"),
        };
        let lo = samples.iter().map(|d| d[0]).fold(f64::INFINITY, f64::min);
        let hi = samples
            .iter()
            .map(|d| d[0])
            .fold(f64::NEG_INFINITY, f64::max);
        lp_gap = lp_gap.max((t1 - lo).abs()).max((t2 - hi).abs());
        // Exact violation probability under U(-1, 1).
        let violation = 1.0 - (t2 - t1) / 2.0;
        bad += (violation > eps) as u32;
    }
    let frac = bad as f64 / trials as f64;
    let pass = frac <= delta + 0.05 && lp_gap < 1e-9;
    report(
        6,
        pass,
        &format!("M = {m}, {bad}/{trials} trials violate more than eps (fraction {frac:.3}), LP vs min/max gap {lp_gap:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_moment_trick() {
    let p = load_benchmark("ex1-vanderpol").unwrap().problem;
    let t = BarrierTemplate::new(2, 8).unwrap();
    let m = 10_000;
    let samples = draw_samples(&p.disturbance, m, 17).unwrap();
    let deg = required_moment_degree(&t.basis, &p.dynamics, 2);
    let moments = empirical_moments(&samples, deg);
    let means = mean_feature_polys(&t.basis, &p.dynamics, 2, &moments).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst: f64 = 0.0;
    let mut g = vec![0.0; t.size()];
    for _ in 0..100 {
        let x = loop {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if p.safe_set.contains(&x) {
                break x;
            }
        };
        let mut direct = vec![0.0; t.size()];
        let mut scale = vec![0.0; t.size()];
        for d in samples.iter() {
            t.features(&p.step(&x, d), &mut g);
            for l in 0..g.len() {
                direct[l] += g[l];
                scale[l] += g[l].abs();
            }
        }
        // Vector-relative: the largest componentwise gap over the largest
        // mean feature magnitude. Per-component ratios are meaningless for
        // features that average to ~1e-25 while the expansion carries terms
        // of order |x|^8.
        let norm = scale.iter().fold(0.0_f64, |a, s| a.max(s / m as f64));
        let gap = (0..g.len())
            .map(|l| (means[l].eval(&x).unwrap() - direct[l] / m as f64).abs())
            .fold(0.0_f64, f64::max);
        worst = worst.max(gap / norm);
    }
    let pass = worst <= 1e-10;
    report(
        7,
        pass,
        &format!(
            "{} features, 100 states, M = {m}, worst relative gap {worst:.2e}",
            t.size()
        ),
    );
    assert!(pass);
}

/// `sum_i q_i^2 + c` where every `q_i` vanishes at `xstar`.
fn sos_plus(rng: &mut ChaCha8Rng, n: usize, xstar: &[f64], c: f64) -> Polynomial {
    let mut p = Polynomial::constant(n, c);
    for _ in 0..rng.random_range(1..=3) {
        let mut q = Polynomial::zero(n);
        for i in 0..n {
            q.add_term(unit(n, &[i]), rng.random_range(-1.0..1.0));
            if rng.random_bool(0.5) {
                let j = rng.random_range(0..n);
                q.add_term(unit(n, &[i, j]), rng.random_range(-1.0..1.0));
            }
        }
        let at = q.eval(xstar).unwrap();
        let q = q.add_constant(-at);
        p = &p + &q.pow(2);
    }
    p
}

fn unit(n: usize, vars: &[usize]) -> Vec<u32> {
    let mut e = vec![0; n];
    for &v in vars {
        e[v] += 1;
    }
    e
}

#[test]
fn criterion_08_verifier_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut wrong_verified, mut wrong_falsified, mut bad_witness) = (0, 0, 0);
    let (mut verified, mut falsified, mut unknown) = (0, 0, 0);
    for case in 0..50 {
        let n = 2 + case % 2;
        let region = if case % 4 < 2 {
            Region::boxed(vec![-1.0; n], vec![1.0; n]).unwrap()
        } else {
            Region::unit_ball(n)
        };
        let xstar: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        assert!(region.contains(&xstar));
        let offset = rng.random_range(0.05..0.5);
        let holds = case % 2 == 0;
        let c = if holds { offset } else { -offset };
        let p = sos_plus(&mut rng, n, &xstar, c);
        // Alternate senses: `p >= 0` or the mirrored `-p <= 0`.
        let (poly, sense) = if case % 3 == 0 {
            (p.scale(-1.0), InequalitySense::Le)
        } else {
            (p.clone(), InequalitySense::Ge)
        };
        let r = verify_inequality(&poly, sense, &region, 0.0, 1_000_000).unwrap();
        match r.verdict {
            Verdict::Verified => {
                verified += 1;
                wrong_verified += (!holds) as u32;
            }
            Verdict::Falsified { witness, .. } => {
                falsified += 1;
                wrong_falsified += holds as u32;
                let ok = region.contains(&witness) && p.eval(&witness).unwrap() < 0.0;
                bad_witness += (!ok) as u32;
            }
            Verdict::Unknown => unknown += 1,
        }
    }
    let pass = wrong_verified == 0 && wrong_falsified == 0 && bad_witness == 0;
    report(
        8,
        pass,
        &format!(
            "{verified} verified, {falsified} falsified, {unknown} unknown; wrong verdicts {}/{}, bad witnesses {bad_witness}",
            wrong_verified, wrong_falsified
        ),
    );
    assert!(pass);
}

fn cli_run(threads: &str, out: &std::path::Path) -> (Vec<u8>, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_pac-barrier"))
        .args([
            "run",
            "--benchmark",
            "ex1-vanderpol",
            "--seed",
            "7",
            "--out-dir",
        ])
        .arg(out)
        .env("THREADS", threads)
        .status()
        .expect("spawn pac-barrier");
    assert!(
        status.success(),
        "run with THREADS={threads} exited with {status}"
    );
    (
        std::fs::read(out.join("cert.json")).unwrap(),
        std::fs::read(out.join("pac.json")).unwrap(),
    )
}

#[test]
fn criterion_09_thread_determinism() {
    let (a, b) = (tempdir(), tempdir());
    let one = cli_run("1", a.path());
    let eight = cli_run("8", b.path());
    let pass = one.0 == eight.0 && one.1 == eight.1;
    report(
        9,
        pass,
        &format!(
            "cert.json identical: {}, pac.json identical: {}",
            one.0 == eight.0,
            one.1 == eight.1
        ),
    );
    assert!(pass);
}

type Step = fn(&[f64], &[f64]) -> Vec<f64>;

/// Hand transcriptions of the update maps, written independently of the
/// registry's monomial tables.
fn golden(name: &str) -> (Step, f64) {
    match name {
        "ex1-vanderpol" => (
            |x, d| {
                vec![
                    x[0] + 0.1 * (x[1] + x[0] * d[0]),
                    x[1] + 0.1 * (-x[0] + x[0].powi(3) / 3.0 - x[1]),
                ]
            },
            1.0,
        ),
        // r = 0.5, a = 1, s = -0.5 + d, c = 1.
        "ex2-lotka" => (
            |x, d| vec![0.5 * x[0] - x[1] * x[0], (-0.5 + d[0]) * x[1] + x[1] * x[0]],
            1.0,
        ),
        "ex3-jet" => (
            |x, d| {
                vec![
                    x[0] + 0.1 * (-x[1] - 1.5 * x[0].powi(2) - 0.5 * x[0].powi(3) + d[0]),
                    x[1] + 0.1 * (3.0 * x[0] - x[1] + d[0]),
                ]
            },
            0.8,
        ),
        "c1-arch4" => (
            |x, d| {
                vec![
                    x[0] + 0.01 * (-2.0 * x[0] + x[0].powi(2) + x[1]),
                    x[1] + 0.01 * (x[0] - 2.0 * x[1] + x[1].powi(2) + d[0]),
                ]
            },
            1.0,
        ),
        "c2-vinc" => (
            |x, d| {
                vec![
                    x[0] + 0.01 * (x[1] - x[0] * d[0]),
                    x[1] + 0.01 * (-(1.0 - x[0].powi(2)) * x[0] - x[1]),
                ]
            },
            0.8,
        ),
        "c3-bc4" => (
            |x, d| {
                vec![
                    x[0] + 0.01 * (-x[0] + 2.0 * x[0].powi(2) * x[1] + x[0] * d[0]),
                    x[1] + 0.01 * (-x[1] + x[1] * d[1]),
                ]
            },
            1.0,
        ),
        "c4-stable3d" => (
            |x, d| {
                let t = 0.01;
                vec![
                    x[0] + t * (-x[0] + x[1] - x[2] - d[0]),
                    x[1] + t * (-x[0] * (x[2] + 1.0) - x[1] - d[1]),
                    x[2] + t * (0.76524 * x[0] - 4.7037 * x[2] - d[2]),
                ]
            },
            1.0,
        ),
        "c5-vdp3d" => (
            |x, d| {
                let t = 0.01;
                vec![
                    x[0] + t * (-2.0 * x[1]),
                    x[1] + t * (0.8 * x[0] - 2.1 * x[1] + x[2] + 10.0 * x[0].powi(2) * x[1]),
                    x[2] + t * (-x[2] + x[2].powi(3) + d[0]),
                ]
            },
            1.0,
        ),
        "c6-sank4d" => (
            |x, d| {
                let t = 0.01;
                vec![
                    x[0] + t * (-x[0] + x[1].powi(3) - 3.0 * x[2] * x[3] + d[0]),
                    x[1] + t * (-x[0] - x[1].powi(3)),
                    x[2] + t * (x[0] * x[3] - x[2]),
                    x[3] + t * (x[0] * x[2] - x[3].powi(3)),
                ]
            },
            1.0,
        ),
        "c7-lorenz6d" => (
            |x, d| {
                let t = 0.01;
                vec![
                    x[0] + t * ((x[1] - x[4]) * x[5] - x[0] + d[0]),
                    x[1] + t * ((x[2] - x[5]) * x[0] - x[1]),
                    x[2] + t * ((x[3] - x[0]) * x[1] - x[2]),
                    x[3] + t * ((x[4] - x[1]) * x[2] - x[3]),
                    x[4] + t * ((x[5] - x[2]) * x[3] - x[4]),
                    x[5] + t * ((x[0] - x[3]) * x[4] - x[5]),
                ]
            },
            1.0,
        ),
        other => panic!("no golden map for {other}"),
    }
}

fn golden_support(name: &str) -> Vec<(f64, f64)> {
    match name {
        "ex1-vanderpol" => vec![(-0.6, 0.6)],
        "ex2-lotka" | "c1-arch4" | "c6-sank4d" => vec![(-1.0, 1.0)],
        "ex3-jet" => vec![(-1.5, 1.5)],
        "c2-vinc" => vec![(-2.0, 2.0)],
        "c3-bc4" => vec![(-0.5, 0.5); 2],
        "c4-stable3d" => vec![(-0.5, 0.5); 3],
        "c5-vdp3d" => vec![(-0.5, 0.5)],
        "c7-lorenz6d" => vec![(-3.0, 3.0)],
        other => panic!("no golden support for {other}"),
    }
}

#[test]
fn criterion_10_benchmark_transcription() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut failures = Vec::new();
    for name in NAMES {
        let p = load_benchmark(name).unwrap().problem;
        let (step, radius) = golden(name);
        let support = golden_support(name);
        let supp_ok = p.disturbance.coords.len() == support.len()
            && p.disturbance
                .coords
                .iter()
                .zip(&support)
                .all(|(c, s)| c.support() == *s);
        let mut worst: f64 = 0.0;
        for _ in 0..25 {
            let x: Vec<f64> = (0..p.state_dim)
                .map(|_| rng.random_range(-radius..radius))
                .collect();
            let d: Vec<f64> = support
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect();
            let want = step(&x, &d);
            let got = p.step(&x, &d);
            for (a, b) in want.iter().zip(&got) {
                worst = worst.max((a - b).abs());
            }
        }
        // The safe set is the centred ball of the given radius.
        let mut on_axis = vec![0.0; p.state_dim];
        on_axis[p.state_dim - 1] = radius * (1.0 - 1e-9);
        let inside = p.safe_set.contains(&on_axis);
        on_axis[p.state_dim - 1] = radius * (1.0 + 1e-9);
        let outside = !p.safe_set.contains(&on_axis);
        let diag = vec![radius * (1.0 - 1e-9) / (p.state_dim as f64).sqrt(); p.state_dim];
        let ball = inside && outside && p.safe_set.contains(&diag);
        if !(worst <= 1e-12 && supp_ok && ball) {
            failures.push(format!(
                "{name} (step gap {worst:.1e}, support {supp_ok}, safe set {ball})"
            ));
        }
    }
    let pass = failures.is_empty();
    report(
        10,
        pass,
        &if pass {
            format!("{} systems match their golden single steps", NAMES.len())
        } else {
            failures.join(", ")
        },
    );
    assert!(pass);
}
