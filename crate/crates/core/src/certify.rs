//! Barrier synthesis by collocation linear programs.
//!
//! Two certificate families share one polynomial template `h(a, x) = aᵀg(x)`:
//!
//! * RBF (robust): `h <= 0` outside `X`, and `h(f(x, d_j)) >= γ h(x)` on `X`
//!   for every stored sample `d_j`. The safe region is `{h > 0}`.
//! * SBF (stochastic): `h >= 0` on `X`, `h >= 1` outside `X`, and the
//!   sampled mean drift `E h(f(x, d)) - h(x) <= λ - τ` on `X`.
//!
//! Conditions on `X` are imposed at collocation points; the candidate is then
//! refined against counterexamples and must still pass [`crate::verify`].
//!
//! The RBF rows carry a margin relative to `s(a) = mean anchor value of h`,
//! which keeps every row homogeneous in `a` (so `a = 0` stays feasible) while
//! leaving room for the exact check between collocation points.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    feature_radius_bound, rademacher_sample_size, scenario_sample_size, vc_sample_size, Route,
    SampleBudget,
};
use crate::error::{Error, Result};
use crate::lp::{DenseSimplex, LinearProgram, LpOutcome, LpProblem, RowSource, Sense};
use crate::poly::{CompiledPoly, Exponent, Polynomial};
use crate::problem::CertificationProblem;
use crate::region::{Annulus, Domain, Region};
use crate::rng::domain;
use crate::stochastics::{
    draw_samples, exact_moments, exponents_up_to, halton_point, sample_states_in,
    streamed_empirical_moments, MomentKind, MomentTable, SampleSet,
};
use crate::verify::{
    barrier_poly, check_conditions, rbf_conditions, sbf_conditions, Budget, Condition,
};

/// All monomials of total degree at most `degree`, constant first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierTemplate {
    pub dim: usize,
    pub degree: u32,
    pub basis: Vec<Exponent>,
}

impl BarrierTemplate {
    pub fn new(dim: usize, degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("template dimension must be at least 1"));
        }
        if degree == 0 {
            return Err(Error::input("template degree must be at least 1"));
        }
        Ok(BarrierTemplate {
            dim,
            degree,
            basis: exponents_up_to(dim, degree),
        })
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn features(&self, x: &[f64], out: &mut [f64]) {
        crate::poly::eval_monomials(&self.basis, x, out);
    }

    pub fn barrier(&self, a: &[f64]) -> Polynomial {
        barrier_poly(&self.basis, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormCap {
    /// `|a_l| <= U/√m`: simple, but excludes `h ≡ U`.
    InscribedBox,
    /// Convex hull of the inscribed box and the ℓ1 ball of radius `U`; still
    /// inside the ℓ2 ball and contains the constant barrier.
    BoxL1Hull,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisConfig {
    /// Anchor states `x'_i` in the objective.
    pub anchors: usize,
    pub collocation_per_axis: usize,
    pub collocation_cap: usize,
    /// Points placed on each of `∂X` and `∂X̂`; 0 picks a size from the grid.
    pub boundary_points: usize,
    pub gamma: f64,
    /// RBF: relative to the mean anchor value. SBF: absolute.
    pub margin: f64,
    /// Margin of the rows outside `X`; same scale as `margin`.
    pub outside_margin: f64,
    pub lp_tol: f64,
    pub seed: u64,
    pub norm_cap: NormCap,
    pub refine_rounds: u32,
    pub refine_probe: usize,
    pub refine_budget: usize,
    /// Counterexamples added per condition and round.
    pub refine_points: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            anchors: 200,
            collocation_per_axis: 40,
            collocation_cap: 4096,
            boundary_points: 0,
            gamma: 0.99,
            margin: 1e-4,
            outside_margin: 1e-2,
            lp_tol: 1e-9,
            seed: 0,
            norm_cap: NormCap::BoxL1Hull,
            refine_rounds: 40,
            refine_probe: 4096,
            refine_budget: 200_000,
            refine_points: 64,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.anchors == 0 || self.collocation_per_axis < 2 || self.collocation_cap == 0 {
            return Err(Error::input(
                "anchor and collocation counts must be positive",
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::input("gamma must lie in (0, 1]"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::input("margin must be finite and non-negative"));
        }
        if !(self.outside_margin >= 0.0 && self.outside_margin.is_finite()) {
            return Err(Error::input(
                "outside_margin must be finite and non-negative",
            ));
        }
        if !(self.lp_tol > 0.0) {
            return Err(Error::input("lp_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbfSettings {
    pub epsilon: f64,
    pub delta: f64,
    pub route: Route,
    /// VC dimension for the VC route; defaults to the basis size.
    pub vc_dim: Option<u64>,
    pub ua: f64,
}

impl Default for RbfSettings {
    fn default() -> Self {
        RbfSettings {
            epsilon: 0.1,
            delta: 1e-3,
            route: Route::Scenario,
            vc_dim: None,
            ua: 1e4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbfSettings {
    pub ua: f64,
    pub tau: f64,
    pub delta: f64,
    /// Sample count; the Rademacher size when absent.
    pub m: Option<u64>,
    /// Feature radius; bounded by branch-and-bound when absent.
    pub radius: Option<f64>,
    /// `Exact` gives the distribution-known baseline (no sampling).
    pub moments: MomentKind,
}

impl Default for SbfSettings {
    fn default() -> Self {
        SbfSettings {
            ua: 2.0,
            tau: 0.1,
            delta: 1e-3,
            m: None,
            radius: None,
            moments: MomentKind::Empirical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertKind {
    Rbf,
    Sbf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    Candidate,
    Verified,
    Falsified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub kind: CertKind,
    pub status: CertStatus,
    pub state_dim: usize,
    pub degree: u32,
    pub basis: Vec<Exponent>,
    pub coeffs: Vec<f64>,
    /// LP optimum `J*`.
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub ua: f64,
    pub margin: f64,
    pub budget: Option<SampleBudget>,
    pub delta: f64,
    /// Disturbance samples the certificate was built from (0 for exact moments).
    pub m: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentKind>,
    /// Whether `{h > 0}` meets `X` (RBF acceptance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xs_nonempty: Option<bool>,
    pub problem_fingerprint: String,
    pub config: SynthesisConfig,
}

impl Certificate {
    pub fn barrier(&self) -> Polynomial {
        barrier_poly(&self.basis, &self.coeffs)
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(self)
    }

    /// Shape checks against the problem the certificate claims to solve.
    pub fn check_against(&self, problem: &CertificationProblem) -> Result<()> {
        if self.state_dim != problem.state_dim {
            return Err(Error::Arity {
                expected: problem.state_dim,
                got: self.state_dim,
            });
        }
        if self.basis.len() != self.coeffs.len()
            || self.basis.iter().any(|e| e.len() != self.state_dim)
        {
            return Err(Error::input("certificate basis and coefficients disagree"));
        }
        if self.problem_fingerprint != problem.fingerprint() {
            return Err(Error::input(
                "certificate was synthesized for a different problem",
            ));
        }
        Ok(())
    }
}

/// Diagnostics from one synthesis run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SynthesisStats {
    pub rounds: u32,
    pub safe_points: usize,
    pub outside_points: usize,
    pub lp_rows: usize,
    pub refined_verified: bool,
    pub wall_time_s: f64,
}

/// Collocation points on `X` and on `closure(X̂ \ X)`.
#[derive(Clone, Debug)]
pub struct Collocation {
    pub safe: Vec<Vec<f64>>,
    pub outside: Vec<Vec<f64>>,
}

fn halton_in(domain: &dyn Domain, count: usize) -> Vec<Vec<f64>> {
    let bx = domain.bounding_box();
    (1..=count)
        .map(|i| {
            halton_point(i, bx.len())
                .iter()
                .zip(&bx)
                .map(|(u, iv)| iv.lo + u * iv.width())
                .collect::<Vec<f64>>()
        })
        .filter(|x| domain.contains(x))
        .collect()
}

pub fn collocation_points(problem: &CertificationProblem, cfg: &SynthesisConfig) -> Collocation {
    let n = problem.state_dim;
    let k = (cfg.collocation_per_axis as f64)
        .powi(n as i32)
        .min(cfg.collocation_cap as f64) as usize;
    let b = if cfg.boundary_points > 0 {
        cfg.boundary_points
    } else {
        ((2 * n) as f64 * (cfg.collocation_per_axis as f64).powi(n as i32 - 1))
            .min((cfg.collocation_cap / 2) as f64) as usize
    };
    let annulus = Annulus {
        outer: problem.envelope.clone(),
        inner: problem.safe_set.clone(),
    };
    let x_boundary = problem.safe_set.boundary_points(b);
    let mut safe = halton_in(&problem.safe_set, k);
    safe.extend(x_boundary.iter().cloned());
    let mut outside = halton_in(&annulus, k);
    outside.extend(x_boundary);
    outside.extend(
        problem
            .envelope
            .boundary_points(b)
            .into_iter()
            .filter(|x| annulus.contains(x)),
    );
    Collocation { safe, outside }
}

fn mean_features(basis: &[Exponent], points: &[Vec<f64>]) -> Vec<f64> {
    let m = basis.len();
    let mut acc = vec![0.0; m];
    let mut g = vec![0.0; m];
    for x in points {
        crate::poly::eval_monomials(basis, x, &mut g);
        for (s, v) in acc.iter_mut().zip(&g) {
            *s += v;
        }
    }
    let k = points.len().max(1) as f64;
    acc.iter().map(|v| v / k).collect()
}

/// Rows of the RBF LP in `<=` form, generated on demand:
/// `(g(z) + μḡ)ᵀa <= 0` per outside point `z`, then
/// `(-(g(f(x, d_j)) - γ g(x)) + μḡ)ᵀa <= 0` for sample `j`, safe point `x`
/// at index `outside + j * safe + k`.
pub struct RbfRows<'a> {
    basis: &'a [Exponent],
    dynamics: Vec<CompiledPoly>,
    samples: &'a SampleSet,
    outside: Vec<f64>,
    safe_points: Vec<Vec<f64>>,
    safe_feats: Vec<f64>,
    shift: Vec<f64>,
    outside_shift: Vec<f64>,
    gamma: f64,
}

impl<'a> RbfRows<'a> {
    pub fn new(
        problem: &CertificationProblem,
        basis: &'a [Exponent],
        samples: &'a SampleSet,
        colloc: &Collocation,
        anchor_mean: &[f64],
        gamma: f64,
        margin: f64,
        outside_margin: f64,
    ) -> Self {
        let m = basis.len();
        let feats = |pts: &[Vec<f64>]| {
            let mut out = vec![0.0; pts.len() * m];
            for (x, o) in pts.iter().zip(out.chunks_mut(m)) {
                crate::poly::eval_monomials(basis, x, o);
            }
            out
        };
        RbfRows {
            basis,
            dynamics: problem.dynamics.iter().map(CompiledPoly::new).collect(),
            samples,
            outside: feats(&colloc.outside),
            safe_feats: feats(&colloc.safe),
            safe_points: colloc.safe.clone(),
            shift: anchor_mean.iter().map(|v| margin * v).collect(),
            outside_shift: anchor_mean.iter().map(|v| outside_margin * v).collect(),
            gamma,
        }
    }

    fn num_outside(&self) -> usize {
        self.outside.len() / self.basis.len()
    }
}

impl RowSource for RbfRows<'_> {
    fn num_vars(&self) -> usize {
        self.basis.len()
    }

    fn num_rows(&self) -> usize {
        self.num_outside() + self.samples.m * self.safe_points.len()
    }

    fn row(&self, i: usize, out: &mut [f64]) -> f64 {
        let m = self.basis.len();
        let no = self.num_outside();
        if i < no {
            for ((o, g), s) in out
                .iter_mut()
                .zip(&self.outside[i * m..(i + 1) * m])
                .zip(&self.outside_shift)
            {
                *o = g + s;
            }
            return 0.0;
        }
        let r = i - no;
        let ns = self.safe_points.len();
        let (j, k) = (r / ns, r % ns);
        let x = &self.safe_points[k];
        let (n, q) = (x.len(), self.samples.dim);
        let mut zbuf = [0.0f64; 32];
        let mut fbuf = [0.0f64; 16];
        let mut zvec;
        let mut fvec;
        let (z, fx) = if n + q <= 32 && n <= 16 {
            (&mut zbuf[..n + q], &mut fbuf[..n])
        } else {
            zvec = vec![0.0; n + q];
            fvec = vec![0.0; n];
            (&mut zvec[..], &mut fvec[..])
        };
        z[..n].copy_from_slice(x);
        z[n..].copy_from_slice(self.samples.sample(j));
        for (o, f) in fx.iter_mut().zip(&self.dynamics) {
            *o = f.eval(z);
        }
        crate::poly::eval_monomials(self.basis, fx, out);
        for ((o, gx), s) in out
            .iter_mut()
            .zip(&self.safe_feats[k * m..(k + 1) * m])
            .zip(&self.shift)
        {
            *o = -(*o - self.gamma * gx) + s;
        }
        0.0
    }
}

/// The RBF LP written out explicitly (for small instances and inspection).
pub fn build_rbf_lp(
    problem: &CertificationProblem,
    template: &BarrierTemplate,
    samples: &SampleSet,
    colloc: &Collocation,
    anchors: &[Vec<f64>],
    cfg: &SynthesisConfig,
    ua: f64,
) -> LinearProgram {
    let anchor_mean = mean_features(&template.basis, anchors);
    let rows = RbfRows::new(
        problem,
        &template.basis,
        samples,
        colloc,
        &anchor_mean,
        cfg.gamma,
        cfg.margin,
        cfg.outside_margin,
    );
    let m = template.size();
    let mut lp = LinearProgram::new(m);
    lp.objective = anchor_mean.iter().map(|v| -v).collect();
    lp.lower = vec![-ua; m];
    lp.upper = vec![ua; m];
    let mut buf = vec![0.0; m];
    for i in 0..rows.num_rows() {
        let rhs = rows.row(i, &mut buf);
        lp.add_row(buf.clone(), Sense::Le, rhs);
    }
    lp
}

/// Highest disturbance-moment degree the SBF drift needs.
pub fn required_moment_degree(basis: &[Exponent], dynamics: &[Polynomial], n: usize) -> u32 {
    let q = dynamics.first().map_or(0, |f| f.arity() - n);
    let per: Vec<u32> = dynamics.iter().map(|f| f.degree_in(n..n + q)).collect();
    basis
        .iter()
        .map(|e| e.iter().zip(&per).map(|(k, d)| k * d).sum::<u32>())
        .max()
        .unwrap_or(0)
}

/// `E_d g_l(f(x, d))` as a polynomial in `x`, one per basis element, with
/// expectations taken from `moments`.
pub fn mean_feature_polys(
    basis: &[Exponent],
    dynamics: &[Polynomial],
    n: usize,
    moments: &MomentTable,
) -> Result<Vec<Polynomial>> {
    let need = required_moment_degree(basis, dynamics, n);
    if moments.max_degree < need {
        return Err(Error::input(format!(
            "moment table has degree {} but the drift needs {need}",
            moments.max_degree
        )));
    }
    basis
        .iter()
        .map(|e| {
            let comp = Polynomial::monomial(e.clone(), 1.0).compose(dynamics)?;
            Ok(comp.contract_tail(n, |tail| moments.get(tail).expect("degree checked above")))
        })
        .collect()
}

fn eval_all(polys: &[CompiledPoly], x: &[f64]) -> Vec<f64> {
    polys.iter().map(|p| p.eval(x)).collect()
}

/// The SBF LP over `[a, λ]` plus norm-cap auxiliaries.
pub fn build_sbf_lp(
    template: &BarrierTemplate,
    mean_polys: &[Polynomial],
    colloc: &Collocation,
    anchors: &[Vec<f64>],
    tau: f64,
    ua: f64,
    margin: f64,
    outside_margin: f64,
    cap: NormCap,
) -> LinearProgram {
    let m = template.size();
    let lam = m;
    let nv = match cap {
        NormCap::InscribedBox => m + 1,
        NormCap::BoxL1Hull => 3 * m + 2,
    };
    let mut lp = LinearProgram::new(nv);
    let anchor_mean = mean_features(&template.basis, anchors);
    lp.objective[..m].copy_from_slice(&anchor_mean);
    lp.objective[lam] = 1.0;
    let inscribed = ua / (m as f64).sqrt();
    match cap {
        NormCap::InscribedBox => {
            lp.lower[..m].fill(-inscribed);
            lp.upper[..m].fill(inscribed);
        }
        NormCap::BoxL1Hull => {
            // a = b + c with b in θ·box and c in (1-θ)·ℓ1-ball; t bounds |a - b|.
            let (b0, t0, th) = (m + 1, 2 * m + 1, 3 * m + 1);
            lp.lower[..m].fill(-ua);
            lp.upper[..m].fill(ua);
            lp.lower[b0..b0 + m].fill(-inscribed);
            lp.upper[b0..b0 + m].fill(inscribed);
            lp.lower[t0..t0 + m].fill(0.0);
            lp.upper[t0..t0 + m].fill(ua);
            lp.lower[th] = 0.0;
            lp.upper[th] = 1.0;
            for l in 0..m {
                for s in [1.0, -1.0] {
                    let mut r = vec![0.0; nv];
                    r[l] = s;
                    r[b0 + l] = -s;
                    r[t0 + l] = -1.0;
                    lp.add_row(r, Sense::Le, 0.0);
                    let mut r = vec![0.0; nv];
                    r[b0 + l] = s;
                    r[th] = -inscribed;
                    lp.add_row(r, Sense::Le, 0.0);
                }
            }
            let mut r = vec![0.0; nv];
            r[t0..t0 + m].fill(1.0);
            r[th] = ua;
            lp.add_row(r, Sense::Le, ua);
        }
    }
    lp.lower[lam] = 0.0;
    lp.upper[lam] = 1.0;
    let mut g = vec![0.0; m];
    let compiled: Vec<CompiledPoly> = mean_polys.iter().map(CompiledPoly::new).collect();
    for x in &colloc.safe {
        template.features(x, &mut g);
        let mut r = vec![0.0; nv];
        for l in 0..m {
            r[l] = -g[l];
        }
        lp.add_row(r, Sense::Le, -margin);
        let gbar = eval_all(&compiled, x);
        let mut r = vec![0.0; nv];
        for l in 0..m {
            r[l] = gbar[l] - g[l];
        }
        r[lam] = -1.0;
        lp.add_row(r, Sense::Le, -tau - margin);
    }
    for z in &colloc.outside {
        template.features(z, &mut g);
        let mut r = vec![0.0; nv];
        for l in 0..m {
            r[l] = -g[l];
        }
        lp.add_row(r, Sense::Le, -1.0 - outside_margin);
    }
    lp
}

fn solve_source(
    rows: &dyn RowSource,
    objective: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    hint: &[usize],
) -> Result<(LpOutcome, Vec<usize>)> {
    let solver = DenseSimplex::default();
    solver.solve_warm(
        &LpProblem {
            objective,
            rows,
            lower,
            upper,
        },
        tol,
        hint,
    )
}

fn optimal(out: LpOutcome, what: &str) -> Result<(Vec<f64>, f64)> {
    match out {
        LpOutcome::Optimal { x, objective } => Ok((x, objective)),
        LpOutcome::Infeasible => Err(Error::Solver(format!("{what} LP is infeasible"))),
        LpOutcome::Unbounded => Err(Error::Solver(format!("{what} LP is unbounded"))),
    }
}

/// Minimizes `p` from `x` by projected gradient descent with backtracking.
fn polish(
    p: &Polynomial,
    grad: &[Polynomial],
    dom: &dyn Domain,
    mut x: Vec<f64>,
) -> (Vec<f64>, f64) {
    let diam = dom
        .bounding_box()
        .iter()
        .map(|i| i.width())
        .fold(0.0f64, f64::max);
    let mut v = p.eval_unchecked(&x);
    let mut step = 0.05 * diam;
    for _ in 0..40 {
        let g: Vec<f64> = grad.iter().map(|d| d.eval_unchecked(&x)).collect();
        let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let mut moved = false;
        while step > 1e-9 * diam {
            let cand: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi - step * gi / norm)
                .collect();
            let cand = if dom.contains(&cand) {
                cand
            } else {
                dom.project(&cand)
            };
            if !dom.contains(&cand) {
                step *= 0.5;
                continue;
            }
            let cv = p.eval_unchecked(&cand);
            if cv < v {
                x = cand;
                v = cv;
                moved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, v)
}

/// Probes a condition at random points of its domain, polishes the worst
/// offenders, and returns up to `limit` points with value below `threshold`.
fn probe(
    cond: &Condition,
    samples: Option<&SampleSet>,
    count: usize,
    seed: u64,
    threshold: f64,
    limit: usize,
) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    let n = cond.domain.dim();
    let region = Region::from_intervals(&cond.domain.bounding_box());
    let pts: Vec<Vec<f64>> = sample_states_in(&region, count, seed, domain::SPOT_CHECK)
        .into_iter()
        .filter(|x| cond.domain.contains(x))
        .collect();
    // Worst value over samples at each point.
    let mut scored: Vec<(f64, usize, Option<usize>)> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| match (cond.per_sample, samples) {
            (true, Some(s)) => {
                let pd = cond.poly.fix_head(x);
                let c = CompiledPoly::new(&pd);
                let (mut best, mut bj) = (f64::INFINITY, 0);
                for j in 0..s.m {
                    let v = c.eval(s.sample(j));
                    if v < best {
                        best = v;
                        bj = j;
                    }
                }
                (best, i, Some(bj))
            }
            _ => (cond.poly.eval_unchecked(x), i, None),
        })
        .filter(|(v, _, _)| *v < threshold)
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(limit);
    scored
        .par_iter()
        .map(|&(_, i, j)| {
            let p = match (j, samples) {
                (Some(j), Some(s)) => cond.poly.fix_tail(s.sample(j)),
                _ => cond.poly.clone(),
            };
            let grad: Vec<Polynomial> = (0..n).map(|k| p.derivative(k)).collect();
            polish(&p, &grad, &cond.domain, pts[i].clone()).0
        })
        .collect()
}

/// Adds points, skipping near-duplicates of existing ones.
fn add_points(dst: &mut Vec<Vec<f64>>, new: Vec<Vec<f64>>, min_dist: f64) -> usize {
    let mut added = 0;
    for x in new {
        let close = dst.iter().rev().take(4096).any(|y| {
            y.iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                < min_dist * min_dist
        });
        if !close {
            dst.push(x);
            added += 1;
        }
    }
    added
}

/// Counterexample-guided refinement shared by both families. `solve` maps
/// collocation points to (coefficients, objective, conditions, threshold);
/// returns the final solution and whether the refinement check verified it.
fn refine<S>(
    mut colloc: Collocation,
    cfg: &SynthesisConfig,
    samples: Option<&SampleSet>,
    diam: f64,
    mut solve: S,
    stats: &mut SynthesisStats,
) -> Result<(Vec<f64>, f64, Collocation)>
where
    S: FnMut(&Collocation) -> Result<(Vec<f64>, f64, Vec<Condition>, f64, usize)>,
{
    let mut round = 0;
    loop {
        let (x, obj, conds, threshold, rows) = solve(&colloc)?;
        stats.rounds = round + 1;
        stats.lp_rows = rows;
        if round >= cfg.refine_rounds || conds.is_empty() {
            return Ok((x, obj, colloc));
        }
        let seed = cfg.seed ^ (0x5eed_0000 + round as u64);
        let mut added = 0;
        let mut new_safe = Vec::new();
        let mut new_out = Vec::new();
        for c in &conds {
            let pts = probe(
                c,
                samples,
                cfg.refine_probe,
                seed,
                threshold,
                cfg.refine_points,
            );
            if is_outside_condition(c) {
                new_out.extend(pts);
            } else {
                new_safe.extend(pts);
            }
        }
        if new_safe.is_empty() && new_out.is_empty() {
            let budget = Budget::new(cfg.refine_budget);
            let (reports, wit) = check_conditions(&conds, samples, 0.0, &budget, cfg.refine_points);
            stats.refined_verified = reports
                .iter()
                .all(|r| r.verdict == crate::verify::Verdict::Verified);
            if wit.is_empty() {
                return Ok((x, obj, colloc));
            }
            for (ci, w, _) in wit {
                if is_outside_condition(&conds[ci]) {
                    new_out.push(w);
                } else {
                    new_safe.push(w);
                }
            }
        }
        added += add_points(&mut colloc.safe, new_safe, 1e-9 * diam);
        added += add_points(&mut colloc.outside, new_out, 1e-9 * diam);
        log::debug!("refinement round {round}: {added} points added");
        if added == 0 {
            return Ok((x, obj, colloc));
        }
        round += 1;
    }
}

fn is_outside_condition(c: &Condition) -> bool {
    matches!(c.domain, crate::verify::ConditionDomain::Annulus(_))
}

fn anchors_for(problem: &CertificationProblem, cfg: &SynthesisConfig) -> Vec<Vec<f64>> {
    sample_states_in(&problem.safe_set, cfg.anchors, cfg.seed, domain::ANCHORS)
}

fn diameter(r: &Region) -> f64 {
    r.bounding_box()
        .iter()
        .map(|i| i.width() * i.width())
        .sum::<f64>()
        .sqrt()
}

/// Sample budget for an RBF run on `template`.
pub fn rbf_budget(template: &BarrierTemplate, settings: &RbfSettings) -> Result<SampleBudget> {
    let m = template.size() as u64;
    match settings.route {
        Route::Vc => vc_sample_size(
            settings.epsilon,
            settings.delta,
            settings.vc_dim.unwrap_or(m),
        ),
        Route::Scenario => scenario_sample_size(settings.epsilon, settings.delta, m),
        Route::Rademacher => Err(Error::input(
            "the Rademacher route applies to SBF synthesis",
        )),
    }
}

/// RBF synthesis with the sample count from `settings`.
pub fn synthesize_rbf(
    problem: &CertificationProblem,
    template: &BarrierTemplate,
    settings: &RbfSettings,
    cfg: &SynthesisConfig,
) -> Result<(Certificate, SynthesisStats)> {
    let budget = rbf_budget(template, settings)?;
    let samples = draw_samples(&problem.disturbance, budget.m as usize, cfg.seed)?;
    synthesize_rbf_with_samples(problem, template, &samples, Some(budget), settings, cfg)
}

/// RBF synthesis on a given sample set.
pub fn synthesize_rbf_with_samples(
    problem: &CertificationProblem,
    template: &BarrierTemplate,
    samples: &SampleSet,
    budget: Option<SampleBudget>,
    settings: &RbfSettings,
    cfg: &SynthesisConfig,
) -> Result<(Certificate, SynthesisStats)> {
    cfg.validate()?;
    check_template(problem, template)?;
    if samples.dim != problem.disturbance_dim {
        return Err(Error::input(
            "sample dimension differs from the disturbance dimension",
        ));
    }
    if !(settings.ua > 0.0 && settings.ua.is_finite()) {
        return Err(Error::input("U_a must be positive and finite"));
    }
    let start = Instant::now();
    let anchors = anchors_for(problem, cfg);
    let anchor_mean = mean_features(&template.basis, &anchors);
    let m = template.size();
    let lower = vec![-settings.ua; m];
    let upper = vec![settings.ua; m];
    let objective: Vec<f64> = anchor_mean.iter().map(|v| -v).collect();
    let colloc = collocation_points(problem, cfg);
    let mut stats = SynthesisStats::default();
    let mut hint: Vec<usize> = Vec::new();
    let mut shape = (colloc.outside.len(), colloc.safe.len().max(1));
    let (a, obj, colloc) = refine(
        colloc,
        cfg,
        Some(samples),
        diameter(&problem.envelope),
        |c| {
            let rows = RbfRows::new(
                problem,
                &template.basis,
                samples,
                c,
                &anchor_mean,
                cfg.gamma,
                cfg.margin,
                cfg.outside_margin,
            );
            // Points are only ever appended, so last round's basis rows
            // keep their (point, sample) identity under this remapping.
            let (old_out, old_safe) = shape;
            let (new_out, new_safe) = (c.outside.len(), c.safe.len());
            let mapped: Vec<usize> = hint
                .iter()
                .map(|&r| {
                    if r < old_out {
                        r
                    } else {
                        let t = r - old_out;
                        new_out + (t / old_safe) * new_safe + t % old_safe
                    }
                })
                .collect();
            let (out, basis_rows) =
                solve_source(&rows, &objective, &lower, &upper, cfg.lp_tol, &mapped)?;
            hint = basis_rows;
            shape = (new_out, new_safe);
            let (a, obj) = optimal(out, "RBF")?;
            let s: f64 = a.iter().zip(&anchor_mean).map(|(x, g)| x * g).sum();
            let nrows = rows.num_rows();
            if s <= 0.0 {
                return Ok((a, obj, Vec::new(), 0.0, nrows));
            }
            let conds = rbf_conditions(problem, &template.basis, &a, cfg.gamma)?;
            Ok((a, obj, conds, 0.25 * cfg.margin * s, nrows))
        },
        &mut stats,
    )?;
    stats.safe_points = colloc.safe.len();
    stats.outside_points = colloc.outside.len();
    stats.wall_time_s = start.elapsed().as_secs_f64();
    let h = CompiledPoly::new(&template.barrier(&a));
    let nonempty = anchors.iter().chain(&colloc.safe).any(|x| h.eval(x) > 0.0);
    let cert = Certificate {
        kind: CertKind::Rbf,
        status: CertStatus::Candidate,
        state_dim: problem.state_dim,
        degree: template.degree,
        basis: template.basis.clone(),
        coeffs: a,
        objective: obj,
        lambda: None,
        gamma: Some(cfg.gamma),
        tau: None,
        ua: settings.ua,
        margin: cfg.margin,
        delta: budget.as_ref().map_or(settings.delta, |b| b.delta),
        budget,
        m: samples.m as u64,
        seed: samples.seed,
        moments: None,
        xs_nonempty: Some(nonempty),
        problem_fingerprint: problem.fingerprint(),
        config: cfg.clone(),
    };
    Ok((cert, stats))
}

fn check_template(problem: &CertificationProblem, template: &BarrierTemplate) -> Result<()> {
    if template.dim != problem.state_dim {
        return Err(Error::Arity {
            expected: problem.state_dim,
            got: template.dim,
        });
    }
    Ok(())
}

/// Sample budget for an SBF run: the Rademacher size, with the feature
/// radius bounded over `X × supp(D)` unless given.
pub fn sbf_budget(
    problem: &CertificationProblem,
    template: &BarrierTemplate,
    settings: &SbfSettings,
    seed: u64,
) -> Result<SampleBudget> {
    let radius = match settings.radius {
        Some(r) => r,
        None => {
            feature_radius_bound(
                &template.basis,
                &problem.dynamics,
                &problem.safe_set,
                &problem.disturbance.support(),
                0.05,
                20_000,
                seed,
            )?
            .upper
        }
    };
    rademacher_sample_size(settings.ua, settings.tau, settings.delta, radius)
}

/// SBF synthesis. With exact moments this is the distribution-known
/// baseline and no samples are drawn.
pub fn synthesize_sbf(
    problem: &CertificationProblem,
    template: &BarrierTemplate,
    settings: &SbfSettings,
    cfg: &SynthesisConfig,
) -> Result<(Certificate, SynthesisStats)> {
    cfg.validate()?;
    check_template(problem, template)?;
    if !(settings.ua > 0.0 && settings.ua.is_finite()) {
        return Err(Error::input("U_a must be positive and finite"));
    }
    if !(settings.tau >= 0.0 && settings.tau.is_finite()) {
        return Err(Error::input("tau must be finite and non-negative"));
    }
    let start = Instant::now();
    let n = problem.state_dim;
    let deg = required_moment_degree(&template.basis, &problem.dynamics, n);
    let (moments, budget, m) = match settings.moments {
        MomentKind::Exact => (exact_moments(&problem.disturbance, deg)?, None, 0u64),
        MomentKind::Empirical => {
            let budget = match settings.m {
                Some(_) if settings.radius.is_none() => None,
                _ => Some(sbf_budget(problem, template, settings, cfg.seed)?),
            };
            let m = settings
                .m
                .or(budget.as_ref().map(|b| b.m))
                .expect("one of m or budget is set");
            if m == 0 {
                return Err(Error::input("sample count M must be at least 1"));
            }
            let table =
                streamed_empirical_moments(&problem.disturbance, m as usize, cfg.seed, deg)?;
            (table, budget, m)
        }
    };
    let mean_polys = mean_feature_polys(&template.basis, &problem.dynamics, n, &moments)?;
    let anchors = anchors_for(problem, cfg);
    let colloc = collocation_points(problem, cfg);
    let mut stats = SynthesisStats::default();
    let msize = template.size();
    let (x, obj, colloc) = refine(
        colloc,
        cfg,
        None,
        diameter(&problem.envelope),
        |c| {
            let lp = build_sbf_lp(
                template,
                &mean_polys,
                c,
                &anchors,
                settings.tau,
                settings.ua,
                cfg.margin,
                cfg.outside_margin,
                cfg.norm_cap,
            );
            let (x, obj) = optimal(crate::lp::solve_lp(&lp, cfg.lp_tol)?, "SBF")?;
            let conds = sbf_conditions(
                problem,
                &template.basis,
                &x[..msize],
                x[msize],
                settings.tau,
                &mean_polys,
            );
            Ok((x, obj, conds, 0.25 * cfg.margin, lp.rows.len()))
        },
        &mut stats,
    )?;
    stats.safe_points = colloc.safe.len();
    stats.outside_points = colloc.outside.len();
    stats.wall_time_s = start.elapsed().as_secs_f64();
    let cert = Certificate {
        kind: CertKind::Sbf,
        status: CertStatus::Candidate,
        state_dim: n,
        degree: template.degree,
        basis: template.basis.clone(),
        coeffs: x[..msize].to_vec(),
        objective: obj,
        lambda: Some(x[msize]),
        gamma: None,
        tau: Some(settings.tau),
        ua: settings.ua,
        margin: cfg.margin,
        budget,
        delta: settings.delta,
        m,
        seed: cfg.seed,
        moments: Some(settings.moments),
        xs_nonempty: None,
        problem_fingerprint: problem.fingerprint(),
        config: cfg.clone(),
    };
    Ok((cert, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::{DistSpec, DisturbanceModel};

    fn toy() -> CertificationProblem {
        // x+ = 0.5 x + 0.05 d on [-1, 1], envelope [-2, 2].
        let f = &Polynomial::var(2, 0).scale(0.5) + &Polynomial::var(2, 1).scale(0.05);
        CertificationProblem::new(
            vec![f],
            Region::boxed(vec![-1.0], vec![1.0]).unwrap(),
            Region::boxed(vec![-2.0], vec![2.0]).unwrap(),
            DisturbanceModel::new(vec![DistSpec::Uniform { lo: -1.0, hi: 1.0 }]).unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn template_sizes() {
        assert_eq!(BarrierTemplate::new(2, 6).unwrap().size(), 28);
        assert_eq!(BarrierTemplate::new(2, 8).unwrap().size(), 45);
        assert_eq!(BarrierTemplate::new(6, 4).unwrap().size(), 210);
        assert!(BarrierTemplate::new(2, 0).is_err());
    }

    #[test]
    fn rbf_row_matches_hand_computation() {
        // With margin 0, f = 0.5x and g = (x²) the invariance row at x = 1
        // is a(0.25 - 0.9) >= 0.
        let p = CertificationProblem::new(
            vec![Polynomial::var(2, 0).scale(0.5)],
            Region::boxed(vec![-1.0], vec![1.0]).unwrap(),
            Region::boxed(vec![-2.0], vec![2.0]).unwrap(),
            DisturbanceModel::new(vec![DistSpec::Uniform { lo: 0.0, hi: 1.0 }]).unwrap(),
            1,
        )
        .unwrap();
        let basis = vec![vec![2u32]];
        let s = SampleSet::from_vectors(1, &[vec![0.3]]).unwrap();
        let c = Collocation {
            safe: vec![vec![1.0]],
            outside: vec![],
        };
        let rows = RbfRows::new(&p, &basis, &s, &c, &[1.0], 0.9, 0.0, 0.0);
        let mut out = [0.0];
        rows.row(0, &mut out);
        assert!((out[0] - 0.65).abs() < 1e-15, "{}", out[0]);
    }

    #[test]
    fn rbf_toy_gives_nonempty_safe_region() {
        let p = toy();
        let t = BarrierTemplate::new(1, 2).unwrap();
        let cfg = SynthesisConfig {
            collocation_per_axis: 50,
            ..Default::default()
        };
        let settings = RbfSettings {
            epsilon: 0.2,
            delta: 0.1,
            ..Default::default()
        };
        let (cert, _) = synthesize_rbf(&p, &t, &settings, &cfg).unwrap();
        assert_eq!(cert.m, 54);
        assert_eq!(cert.xs_nonempty, Some(true));
        assert!(cert.objective < 0.0);
        let h = cert.barrier();
        assert!(h.eval(&[0.0]).unwrap() > 0.0);
        let ev = crate::verify::regenerate_evidence(&cert, &p).unwrap();
        let (v, rep) =
            crate::verify::verify_certificate(&cert, &p, &ev.borrow(), &Default::default())
                .unwrap();
        assert_eq!(v.status, CertStatus::Verified, "{rep:?}");
        assert_eq!(rep.spot_check.violations, 0);
    }

    #[test]
    fn sbf_toy_feasible_with_hull_cap() {
        let p = toy();
        let t = BarrierTemplate::new(1, 2).unwrap();
        let settings = SbfSettings {
            m: Some(1000),
            ..Default::default()
        };
        let (cert, _) = synthesize_sbf(&p, &t, &settings, &SynthesisConfig::default()).unwrap();
        let l2: f64 = cert.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(l2 <= 2.0 + 1e-6);
        let lam = cert.lambda.unwrap();
        assert!((0.0..=1.0).contains(&lam));
        let ev = crate::verify::regenerate_evidence(&cert, &p).unwrap();
        let (v, rep) =
            crate::verify::verify_certificate(&cert, &p, &ev.borrow(), &Default::default())
                .unwrap();
        assert_eq!(v.status, CertStatus::Verified, "{rep:?}");
    }
}
