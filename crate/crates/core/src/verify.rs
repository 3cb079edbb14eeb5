//! Continuous-domain verification of barrier conditions and Monte Carlo
//! cross-checks.
//!
//! Every condition is normalized to `p >= 0` on a domain. Conditions that
//! must hold for each stored disturbance sample are checked as one
//! polynomial in `(x, d)`: a branch-and-bound node carries an x-box and the
//! subset of samples it still has to cover, and its d-box is the hull of that
//! subset. Nodes whose subset is empty never arise, and a node with a single
//! sample is an ordinary per-sample check.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{mean_feature_polys, CertKind, CertStatus, Certificate};
use crate::error::{Error, Result};
use crate::interval::{eval_compiled, Interval, IntervalPowerTable};
use crate::poly::{CompiledPoly, Polynomial};
use crate::problem::CertificationProblem;
use crate::region::{Annulus, Domain, Overlap, Region};
use crate::rng::{domain, substream};
use crate::stochastics::{draw_samples, sample_states_in, MomentTable, SampleSet, CHUNK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InequalitySense {
    /// `p >= 0`
    Ge,
    /// `p <= 0`
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Verified,
    Falsified {
        witness: Vec<f64>,
        /// Disturbance sample the witness uses, for per-sample conditions.
        #[serde(skip_serializing_if = "Option::is_none")]
        sample: Option<usize>,
        /// Value of the normalized condition (`>= 0` required) at the witness.
        value: f64,
    },
    Unknown,
}

/// The set a condition is imposed on.
#[derive(Clone, Debug)]
pub enum ConditionDomain {
    Region(Region),
    Annulus(Annulus),
}

impl Domain for ConditionDomain {
    fn dim(&self) -> usize {
        match self {
            ConditionDomain::Region(r) => r.dim(),
            ConditionDomain::Annulus(a) => a.dim(),
        }
    }
    fn bounding_box(&self) -> Vec<Interval> {
        match self {
            ConditionDomain::Region(r) => r.bounding_box(),
            ConditionDomain::Annulus(a) => a.bounding_box(),
        }
    }
    fn classify(&self, bx: &[Interval]) -> Overlap {
        match self {
            ConditionDomain::Region(r) => r.classify(bx),
            ConditionDomain::Annulus(a) => a.classify(bx),
        }
    }
    fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConditionDomain::Region(r) => r.contains(x),
            ConditionDomain::Annulus(a) => a.contains(x),
        }
    }
    fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConditionDomain::Region(r) => r.project(x),
            ConditionDomain::Annulus(a) => a.project(x),
        }
    }
}

/// A barrier condition `poly >= 0` on `domain`. For per-sample conditions
/// `poly` is over `(x, d)` and must hold at every stored sample.
#[derive(Clone, Debug)]
pub struct Condition {
    pub name: String,
    pub poly: Polynomial,
    pub domain: ConditionDomain,
    pub per_sample: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub boxes: usize,
    pub max_depth: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpotCheck {
    pub points: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub status: CertStatus,
    pub conditions: Vec<ConditionReport>,
    pub boxes: usize,
    pub max_depth: u32,
    pub budget: usize,
    pub wall_time_s: f64,
    pub spot_check: SpotCheck,
}

#[derive(Clone, Debug)]
pub struct VerifySettings {
    /// Violations at or below this size are tolerated.
    pub tol: f64,
    /// Maximum number of boxes across all conditions.
    pub budget: usize,
    /// Random (point, sample) pairs re-checked after a Verified verdict.
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            tol: 0.0,
            budget: 1_000_000,
            spot_checks: 100_000,
            seed: 0,
        }
    }
}

/// Shared box counter plus early-exit flag.
pub struct Budget {
    limit: usize,
    used: AtomicUsize,
    stop: AtomicBool,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Budget {
            limit,
            used: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
        }
    }

    fn take(&self) -> bool {
        self.used.fetch_add(1, Ordering::Relaxed) < self.limit
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::Relaxed).min(self.limit)
    }
}

/// Polynomial with its gradient, compiled for interval evaluation.
struct Enclosure {
    p: CompiledPoly,
    grad: Vec<CompiledPoly>,
    max_exp: Vec<u32>,
}

impl Enclosure {
    fn new(p: &Polynomial) -> Self {
        let grad: Vec<CompiledPoly> = (0..p.arity())
            .map(|i| CompiledPoly::new(&p.derivative(i)))
            .collect();
        Enclosure {
            p: CompiledPoly::new(p),
            grad,
            max_exp: p.max_exponents(),
        }
    }

    /// Lower bound of `p` over `bx` (natural extension intersected with the
    /// mean-value form), plus per-axis `width * |gradient|` scores.
    fn lower(&self, bx: &[Interval]) -> (f64, Vec<f64>) {
        let table = IntervalPowerTable::new(bx, &self.max_exp);
        let natural = eval_compiled(&self.p, &table);
        let c: Vec<f64> = bx.iter().map(|i| i.mid()).collect();
        let cbox: Vec<Interval> = c.iter().map(|&v| Interval::point(v)).collect();
        let ctable = IntervalPowerTable::new(&cbox, &self.max_exp);
        let mut mv = eval_compiled(&self.p, &ctable);
        let mut score = Vec::with_capacity(bx.len());
        for (i, g) in self.grad.iter().enumerate() {
            let gi = if g.num_terms() == 0 {
                Interval::point(0.0)
            } else {
                eval_compiled(g, &table)
            };
            let dx = bx[i] - Interval::point(c[i]);
            mv = mv + gi * dx;
            score.push(gi.mag() * bx[i].width());
        }
        (natural.lo.max(mv.lo), score)
    }
}

struct Node {
    bx: Vec<Interval>,
    samples: Vec<u32>,
    depth: u32,
}

struct Outcome {
    verdict: Verdict,
    boxes: usize,
    max_depth: u32,
    witnesses: Vec<(Vec<f64>, Option<usize>, f64)>,
}

fn hull_of(samples: &SampleSet, idx: &[u32]) -> Vec<Interval> {
    let mut h: Vec<Interval> = samples
        .sample(idx[0] as usize)
        .iter()
        .map(|&v| Interval::point(v))
        .collect();
    for &j in &idx[1..] {
        for (hi, &v) in h.iter_mut().zip(samples.sample(j as usize)) {
            *hi = hi.hull(&Interval::point(v));
        }
    }
    h
}

/// Depth-first branch-and-bound for `poly >= 0`. `witness_limit > 1` keeps
/// exploring after a violation to collect several counterexamples.
fn branch_and_bound(
    poly: &Polynomial,
    dom: &dyn Domain,
    samples: Option<&SampleSet>,
    subset: Vec<u32>,
    tol: f64,
    budget: &Budget,
    witness_limit: usize,
) -> Outcome {
    let n = dom.dim();
    let enc = Enclosure::new(poly);
    let mut stack = vec![Node {
        bx: {
            let mut b = dom.bounding_box();
            if let Some(s) = samples {
                b.extend(hull_of(s, &subset));
            }
            b
        },
        samples: subset,
        depth: 0,
    }];
    let mut boxes = 0usize;
    let mut max_depth = 0u32;
    let mut unknown = false;
    let mut witnesses = Vec::new();
    let point_value = |x: &[f64], j: Option<usize>| -> f64 {
        match (samples, j) {
            (Some(s), Some(j)) => {
                let z: Vec<f64> = x.iter().chain(s.sample(j)).copied().collect();
                poly.eval_unchecked(&z)
            }
            _ => poly.eval_unchecked(x),
        }
    };
    while let Some(node) = stack.pop() {
        if budget.stop.load(Ordering::Relaxed) {
            unknown = true;
            break;
        }
        if !budget.take() {
            unknown = true;
            break;
        }
        boxes += 1;
        max_depth = max_depth.max(node.depth);
        let overlap = dom.classify(&node.bx[..n]);
        if overlap == Overlap::Disjoint {
            continue;
        }
        let (lower, score) = enc.lower(&node.bx);
        if lower >= -tol {
            continue;
        }
        // Look for a concrete violation at the box center (or its projection).
        let c: Vec<f64> = node.bx[..n].iter().map(|i| i.mid()).collect();
        let probe = if dom.contains(&c) {
            Some(c)
        } else {
            let p = dom.project(&c);
            let inside =
                dom.contains(&p) && p.iter().zip(&node.bx[..n]).all(|(v, i)| i.contains(*v));
            inside.then_some(p)
        };
        if let Some(x) = probe {
            let mut worst: Option<(Option<usize>, f64)> = None;
            if samples.is_some() {
                let step = (node.samples.len() / 8).max(1);
                for &j in node.samples.iter().step_by(step) {
                    let v = point_value(&x, Some(j as usize));
                    if worst.is_none_or(|(_, w)| v < w) {
                        worst = Some((Some(j as usize), v));
                    }
                }
            } else {
                worst = Some((None, point_value(&x, None)));
            }
            if let Some((j, v)) = worst {
                if v < -tol {
                    witnesses.push((x, j, v));
                    if witnesses.len() >= witness_limit {
                        break;
                    }
                    continue;
                }
            }
        }
        // Split the axis with the largest width * |gradient| score; a
        // disturbance axis is split by partitioning the samples.
        let mut axis = (0..score.len())
            .filter(|&i| i < n || node.samples.len() > 1)
            .max_by(|&a, &b| score[a].total_cmp(&score[b]))
            .unwrap_or(0);
        if score[axis] == 0.0 {
            axis = (0..n)
                .max_by(|&a, &b| node.bx[a].width().total_cmp(&node.bx[b].width()))
                .unwrap_or(0);
        }
        if axis < n {
            let iv = node.bx[axis];
            if iv.width() <= 1e-12 * (1.0 + iv.mag()) {
                unknown = true;
                continue;
            }
            let mid = iv.mid();
            for half in [Interval::of(mid, iv.hi), Interval::of(iv.lo, mid)] {
                let mut bx = node.bx.clone();
                bx[axis] = half;
                stack.push(Node {
                    bx,
                    samples: node.samples.clone(),
                    depth: node.depth + 1,
                });
            }
        } else {
            let s = samples.expect("disturbance axes imply samples");
            let k = axis - n;
            let mut idx = node.samples;
            idx.sort_by(|&a, &b| {
                s.sample(a as usize)[k]
                    .total_cmp(&s.sample(b as usize)[k])
                    .then(a.cmp(&b))
            });
            let right = idx.split_off(idx.len() / 2);
            for part in [right, idx] {
                let mut bx = node.bx.clone();
                let h = hull_of(s, &part);
                bx[n..].copy_from_slice(&h);
                stack.push(Node {
                    bx,
                    samples: part,
                    depth: node.depth + 1,
                });
            }
        }
    }
    let verdict = if let Some((w, j, v)) = witnesses.first().cloned() {
        Verdict::Falsified {
            witness: w,
            sample: j,
            value: v,
        }
    } else if unknown {
        Verdict::Unknown
    } else {
        Verdict::Verified
    };
    Outcome {
        verdict,
        boxes,
        max_depth,
        witnesses,
    }
}

/// Number of independent tasks a per-sample condition is split into.
const SAMPLE_GROUPS: usize = 8;

fn sample_groups(samples: &SampleSet) -> Vec<Vec<u32>> {
    let mut idx: Vec<u32> = (0..samples.m as u32).collect();
    idx.sort_by(|&a, &b| {
        samples.sample(a as usize)[0]
            .total_cmp(&samples.sample(b as usize)[0])
            .then(a.cmp(&b))
    });
    let per = samples.m.div_ceil(SAMPLE_GROUPS).max(1);
    idx.chunks(per).map(|c| c.to_vec()).collect()
}

/// Checks all conditions; returns one report per condition plus any
/// collected counterexamples `(condition index, x, sample)`.
pub fn check_conditions(
    conds: &[Condition],
    samples: Option<&SampleSet>,
    tol: f64,
    budget: &Budget,
    witness_limit: usize,
) -> (Vec<ConditionReport>, Vec<(usize, Vec<f64>, Option<usize>)>) {
    let mut tasks: Vec<(usize, Vec<u32>)> = Vec::new();
    for (ci, c) in conds.iter().enumerate() {
        if c.per_sample {
            let s = samples.expect("per-sample condition needs samples");
            for g in sample_groups(s) {
                tasks.push((ci, g));
            }
        } else {
            tasks.push((ci, Vec::new()));
        }
    }
    let outcomes: Vec<(usize, Outcome)> = tasks
        .into_par_iter()
        .map(|(ci, subset)| {
            let c = &conds[ci];
            let s = if c.per_sample { samples } else { None };
            let out = branch_and_bound(
                &c.poly,
                &c.domain,
                s,
                subset,
                tol,
                budget,
                witness_limit.max(1),
            );
            if witness_limit <= 1 && matches!(out.verdict, Verdict::Falsified { .. }) {
                budget.stop.store(true, Ordering::Relaxed);
            }
            (ci, out)
        })
        .collect();
    let mut reports: Vec<ConditionReport> = conds
        .iter()
        .map(|c| ConditionReport {
            name: c.name.clone(),
            verdict: Verdict::Verified,
            boxes: 0,
            max_depth: 0,
        })
        .collect();
    let mut witnesses = Vec::new();
    for (ci, out) in outcomes {
        let r = &mut reports[ci];
        r.boxes += out.boxes;
        r.max_depth = r.max_depth.max(out.max_depth);
        match (&r.verdict, out.verdict) {
            (Verdict::Falsified { .. }, _) => {}
            (_, v @ Verdict::Falsified { .. }) => r.verdict = v,
            (Verdict::Unknown, _) => {}
            (_, Verdict::Unknown) => r.verdict = Verdict::Unknown,
            _ => {}
        }
        for (x, j, _) in out.witnesses {
            witnesses.push((ci, x, j));
        }
    }
    (reports, witnesses)
}

/// Checks `poly (sense) 0` over `region` by interval branch-and-bound.
/// Verified means every surviving box has an enclosure within `tol` of the
/// required sign; Falsified carries a point violating by more than `tol`.
pub fn verify_inequality(
    poly: &Polynomial,
    sense: InequalitySense,
    region: &dyn Domain,
    tol: f64,
    budget: usize,
) -> Result<ConditionReport> {
    if poly.arity() != region.dim() {
        return Err(Error::Arity {
            expected: region.dim(),
            got: poly.arity(),
        });
    }
    let p = match sense {
        InequalitySense::Ge => poly.clone(),
        InequalitySense::Le => -poly,
    };
    let out = branch_and_bound(&p, region, None, Vec::new(), tol, &Budget::new(budget), 1);
    Ok(ConditionReport {
        name: "inequality".into(),
        verdict: out.verdict,
        boxes: out.boxes,
        max_depth: out.max_depth,
    })
}

/// What a certificate's drift condition is checked against.
pub enum Evidence<'a> {
    Samples(&'a SampleSet),
    Moments(&'a MomentTable),
}

/// Rebuilds the sample set or moment table a certificate was synthesized from.
pub fn regenerate_evidence(
    cert: &Certificate,
    problem: &CertificationProblem,
) -> Result<EvidenceOwned> {
    match cert.kind {
        CertKind::Rbf => Ok(EvidenceOwned::Samples(draw_samples(
            &problem.disturbance,
            cert.m as usize,
            cert.seed,
        )?)),
        CertKind::Sbf => {
            let deg = crate::certify::required_moment_degree(
                &cert.basis,
                &problem.dynamics,
                problem.state_dim,
            );
            let table = match cert.moments {
                Some(crate::stochastics::MomentKind::Exact) => {
                    crate::stochastics::exact_moments(&problem.disturbance, deg)?
                }
                _ => crate::stochastics::streamed_empirical_moments(
                    &problem.disturbance,
                    cert.m as usize,
                    cert.seed,
                    deg,
                )?,
            };
            Ok(EvidenceOwned::Moments(table))
        }
    }
}

pub enum EvidenceOwned {
    Samples(SampleSet),
    Moments(MomentTable),
}

impl EvidenceOwned {
    pub fn borrow(&self) -> Evidence<'_> {
        match self {
            EvidenceOwned::Samples(s) => Evidence::Samples(s),
            EvidenceOwned::Moments(m) => Evidence::Moments(m),
        }
    }
}

/// `h(a, x) = aᵀ g(x)`.
pub fn barrier_poly(basis: &[Vec<u32>], coeffs: &[f64]) -> Polynomial {
    let n = basis.first().map_or(0, |e| e.len());
    let mut h = Polynomial::zero(n);
    for (e, &a) in basis.iter().zip(coeffs) {
        h.add_term(e.clone(), a);
    }
    h
}

/// The RBF conditions for coefficient vector `a`.
pub fn rbf_conditions(
    problem: &CertificationProblem,
    basis: &[Vec<u32>],
    a: &[f64],
    gamma: f64,
) -> Result<Vec<Condition>> {
    let n = problem.state_dim;
    let q = problem.disturbance_dim;
    let h = barrier_poly(basis, a);
    let hf = h.compose(&problem.dynamics)?;
    let inv = &hf - &h.extend_arity(n + q).scale(gamma);
    Ok(vec![
        Condition {
            name: "rbf_outside_nonpositive".into(),
            poly: -&h,
            domain: ConditionDomain::Annulus(Annulus {
                outer: problem.envelope.clone(),
                inner: problem.safe_set.clone(),
            }),
            per_sample: false,
        },
        Condition {
            name: "rbf_invariance_per_sample".into(),
            poly: inv,
            domain: ConditionDomain::Region(problem.safe_set.clone()),
            per_sample: true,
        },
    ])
}

/// The SBF conditions for `(a, λ)` with the drift polynomial built from
/// `mean_polys` (one per basis element).
pub fn sbf_conditions(
    problem: &CertificationProblem,
    basis: &[Vec<u32>],
    a: &[f64],
    lambda: f64,
    tau: f64,
    mean_polys: &[Polynomial],
) -> Vec<Condition> {
    let n = problem.state_dim;
    let h = barrier_poly(basis, a);
    let mut mean = Polynomial::zero(n);
    for (gp, &al) in mean_polys.iter().zip(a) {
        mean = &mean + &gp.scale(al);
    }
    // -(mean - h - λ + τ) >= 0
    let drift = (&h - &mean).add_constant(lambda - tau);
    vec![
        Condition {
            name: "sbf_nonnegative_on_safe_set".into(),
            poly: h.clone(),
            domain: ConditionDomain::Region(problem.safe_set.clone()),
            per_sample: false,
        },
        Condition {
            name: "sbf_at_least_one_outside".into(),
            poly: h.add_constant(-1.0),
            domain: ConditionDomain::Annulus(Annulus {
                outer: problem.envelope.clone(),
                inner: problem.safe_set.clone(),
            }),
            per_sample: false,
        },
        Condition {
            name: "sbf_mean_drift".into(),
            poly: drift,
            domain: ConditionDomain::Region(problem.safe_set.clone()),
            per_sample: false,
        },
    ]
}

/// The conditions a certificate must satisfy, given its evidence.
pub fn certificate_conditions(
    cert: &Certificate,
    problem: &CertificationProblem,
    evidence: &Evidence<'_>,
) -> Result<Vec<Condition>> {
    match (cert.kind, evidence) {
        (CertKind::Rbf, Evidence::Samples(_)) => rbf_conditions(
            problem,
            &cert.basis,
            &cert.coeffs,
            cert.gamma.unwrap_or(0.99),
        ),
        (CertKind::Sbf, Evidence::Moments(m)) => {
            let mp = mean_feature_polys(&cert.basis, &problem.dynamics, problem.state_dim, m)?;
            Ok(sbf_conditions(
                problem,
                &cert.basis,
                &cert.coeffs,
                cert.lambda.unwrap_or(0.0),
                cert.tau.unwrap_or(0.0),
                &mp,
            ))
        }
        _ => Err(Error::input(
            "evidence kind does not match the certificate kind",
        )),
    }
}

fn spot_check(
    conds: &[Condition],
    samples: Option<&SampleSet>,
    count: usize,
    seed: u64,
    tol: f64,
) -> SpotCheck {
    if count == 0 {
        return SpotCheck {
            points: 0,
            violations: 0,
        };
    }
    let per = count.div_ceil(conds.len().max(1));
    let mut violations = 0;
    let mut points = 0;
    for (ci, c) in conds.iter().enumerate() {
        let bx = c.domain.bounding_box();
        let region = Region::from_intervals(&bx);
        let pts = sample_states_in(
            &region,
            per * 2,
            seed.wrapping_add(ci as u64),
            domain::SPOT_CHECK,
        );
        let mut rng = substream(seed, domain::SPOT_CHECK, 1000 + ci as u64);
        let compiled = CompiledPoly::new(&c.poly);
        let mut z = Vec::new();
        for x in pts.iter().filter(|x| c.domain.contains(x)).take(per) {
            points += 1;
            let v = match (c.per_sample, samples) {
                (true, Some(s)) => {
                    let j = rng.random_range(0..s.m);
                    z.clear();
                    z.extend_from_slice(x);
                    z.extend_from_slice(s.sample(j));
                    compiled.eval(&z)
                }
                _ => compiled.eval(x),
            };
            if v < -tol {
                violations += 1;
            }
        }
    }
    SpotCheck { points, violations }
}

/// Verifies a candidate certificate and returns it with an updated status.
pub fn verify_certificate(
    cert: &Certificate,
    problem: &CertificationProblem,
    evidence: &Evidence<'_>,
    settings: &VerifySettings,
) -> Result<(Certificate, VerificationReport)> {
    let start = Instant::now();
    let conds = certificate_conditions(cert, problem, evidence)?;
    let samples = match evidence {
        Evidence::Samples(s) => Some(*s),
        Evidence::Moments(_) => None,
    };
    let budget = Budget::new(settings.budget);
    let (reports, _) = check_conditions(&conds, samples, settings.tol, &budget, 1);
    let status = if reports
        .iter()
        .any(|r| matches!(r.verdict, Verdict::Falsified { .. }))
    {
        CertStatus::Falsified
    } else if reports.iter().all(|r| r.verdict == Verdict::Verified) {
        CertStatus::Verified
    } else {
        CertStatus::Candidate
    };
    let spot = if status == CertStatus::Verified {
        spot_check(
            &conds,
            samples,
            settings.spot_checks,
            settings.seed,
            settings.tol,
        )
    } else {
        SpotCheck {
            points: 0,
            violations: 0,
        }
    };
    let mut out = cert.clone();
    out.status = status;
    let report = VerificationReport {
        status,
        boxes: reports.iter().map(|r| r.boxes).sum(),
        max_depth: reports.iter().map(|r| r.max_depth).max().unwrap_or(0),
        conditions: reports,
        budget: settings.budget,
        wall_time_s: start.elapsed().as_secs_f64(),
        spot_check: spot,
    };
    Ok((out, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyEstimate {
    pub x0: Vec<f64>,
    pub horizon: u32,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub seed: u64,
}

/// Regularized incomplete beta `I_x(a, b)`.
fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    statrs::function::beta::beta_reg(a, b, x)
}

fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_cdf(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Clopper-Pearson interval for `s` successes in `t` trials.
pub fn clopper_pearson(s: u64, t: u64, confidence: f64) -> (f64, f64) {
    assert!(t > 0 && s <= t);
    let alpha = 1.0 - confidence;
    let (sf, tf) = (s as f64, t as f64);
    let lower = if s == 0 {
        0.0
    } else {
        beta_quantile(sf, tf - sf + 1.0, alpha / 2.0)
    };
    let upper = if s == t {
        1.0
    } else {
        beta_quantile(sf + 1.0, tf - sf, 1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// Fraction of `trials` independent `k`-step trajectories from `x0` that
/// stay in the safe set at every step. Trajectory `i` uses substream `i`.
pub fn mc_safety_estimate(
    problem: &CertificationProblem,
    x0: &[f64],
    horizon: u32,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<SafetyEstimate> {
    if trials == 0 {
        return Err(Error::input("trial count must be at least 1"));
    }
    if x0.len() != problem.state_dim || !problem.safe_set.contains(x0) {
        return Err(Error::input("start state must lie in the safe set"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::input("confidence must lie in (0, 1)"));
    }
    let sampler = problem.disturbance.sampler();
    let block = CHUNK as u64 / 16;
    let successes: u64 = (0..trials.div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let mut ok = 0u64;
            let mut d = vec![0.0; problem.disturbance_dim];
            for i in b * block..((b + 1) * block).min(trials) {
                let mut rng = substream(seed, domain::TRAJECTORY, i);
                let mut x = x0.to_vec();
                let mut safe = true;
                for _ in 0..horizon {
                    sampler.draw_into(&mut rng, &mut d);
                    x = problem.step(&x, &d);
                    if !problem.safe_set.contains(&x) {
                        safe = false;
                        break;
                    }
                }
                ok += safe as u64;
            }
            ok
        })
        .sum();
    let (lower, upper) = clopper_pearson(successes, trials, confidence);
    Ok(SafetyEstimate {
        x0: x0.to_vec(),
        horizon,
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        lower,
        upper,
        confidence,
        seed,
    })
}

/// Fraction of `n` uniform samples of `x_region` with `h(a*, x) > 0`.
pub fn estimate_safe_region_volume(
    cert: &Certificate,
    x_region: &Region,
    n: usize,
    seed: u64,
) -> f64 {
    let h = CompiledPoly::new(&cert.barrier());
    let chunks = n.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let k = CHUNK.min(n - c * CHUNK);
            let pts = crate::stochastics::sample_chunk(x_region, k, seed, domain::VOLUME, c as u64);
            pts.iter().filter(|x| h.eval(x) > 0.0).count()
        })
        .sum();
    hits as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> Polynomial {
        Polynomial::var(1, 0)
    }

    #[test]
    fn exact_bound_verifies() {
        let p = &Polynomial::constant(1, 1.0) - &x1().pow(2);
        let r = Region::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let rep = verify_inequality(&p, InequalitySense::Ge, &r, 0.0, 10_000).unwrap();
        assert_eq!(rep.verdict, Verdict::Verified);
    }

    #[test]
    fn sign_change_is_falsified() {
        let r = Region::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let rep = verify_inequality(&x1(), InequalitySense::Ge, &r, 1e-9, 10_000).unwrap();
        match rep.verdict {
            Verdict::Falsified { witness, .. } => assert!(witness[0] < 0.0),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn clopper_pearson_edges() {
        let (l, u) = clopper_pearson(0, 10, 0.95);
        assert_eq!(l, 0.0);
        assert!((u - 0.3084971).abs() < 1e-6);
        let (l, u) = clopper_pearson(10, 10, 0.95);
        assert!((l - 0.6915029).abs() < 1e-6);
        assert_eq!(u, 1.0);
    }
}
