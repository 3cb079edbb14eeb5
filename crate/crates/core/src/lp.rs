//! Linear programs and a bundled dense revised-simplex solver.
//!
//! The solver works on the dual of `min cᵀx s.t. Gx <= h, l <= x <= u`:
//!
//! ```text
//! min  hᵀy + uᵀy⁺ - lᵀy⁻   s.t.  Gᵀy + y⁺ - y⁻ = -c,  y, y⁺, y⁻ >= 0
//! ```
//!
//! Each primal row is one dual column, and the simplex multipliers of the
//! dual are the primal point `x`. Pricing a dual column is the same as
//! checking a primal row for violation, which lets rows stay implicit: the
//! solver works on an active subset and repeatedly scans the full
//! [`RowSource`] for violated rows. Dual unboundedness proves primal
//! infeasibility; dual infeasibility is split into primal infeasible versus
//! unbounded by a second, objective-free solve.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coefs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Rows in `g·x <= h` form, possibly generated on demand.
pub trait RowSource: Sync {
    fn num_vars(&self) -> usize;
    fn num_rows(&self) -> usize;
    /// Writes row `i` into `out` and returns its right-hand side.
    fn row(&self, i: usize, out: &mut [f64]) -> f64;
}

/// An explicit LP: `min cᵀx` subject to rows and variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn add_row(&mut self, coefs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coefs, sense, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err(Error::input(
                "objective and bound vectors must have one entry per variable",
            ));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("objective coefficients must be finite"));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coefs.len() != self.num_vars {
                return Err(Error::input(format!(
                    "row {i} has {} coefficients",
                    r.coefs.len()
                )));
            }
            if !r.rhs.is_finite() || r.coefs.iter().any(|c| !c.is_finite()) {
                return Err(Error::input(format!("row {i} has non-finite data")));
            }
        }
        for i in 0..self.num_vars {
            if self.lower[i].is_nan() || self.upper[i].is_nan() || self.lower[i] > self.upper[i] {
                return Err(Error::input(format!("variable {i} has invalid bounds")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for r in &self.rows {
            let s: f64 = r.coefs.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = match r.sense {
                Sense::Le => s - r.rhs,
                Sense::Ge => r.rhs - s,
                Sense::Eq => (s - r.rhs).abs(),
            };
            v = v.max(e);
        }
        for i in 0..self.num_vars {
            v = v.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        v
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `LinearProgram` rows in `<=` form (equalities become two rows).
struct CanonicalRows<'a> {
    lp: &'a LinearProgram,
    map: Vec<(usize, f64)>,
}

impl<'a> CanonicalRows<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let mut map = Vec::with_capacity(lp.rows.len());
        for (i, r) in lp.rows.iter().enumerate() {
            match r.sense {
                Sense::Le => map.push((i, 1.0)),
                Sense::Ge => map.push((i, -1.0)),
                Sense::Eq => {
                    map.push((i, 1.0));
                    map.push((i, -1.0));
                }
            }
        }
        CanonicalRows { lp, map }
    }
}

impl RowSource for CanonicalRows<'_> {
    fn num_vars(&self) -> usize {
        self.lp.num_vars
    }

    fn num_rows(&self) -> usize {
        self.map.len()
    }

    fn row(&self, i: usize, out: &mut [f64]) -> f64 {
        let (k, s) = self.map[i];
        let r = &self.lp.rows[k];
        for (o, c) in out.iter_mut().zip(&r.coefs) {
            *o = s * c;
        }
        s * r.rhs
    }
}

/// A problem handed to an [`LpSolver`].
pub struct LpProblem<'a> {
    pub objective: &'a [f64],
    pub rows: &'a dyn RowSource,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// Solver contract: `Optimal` points satisfy every row and bound to within
/// `tol` (rows measured after dividing by their largest coefficient).
pub trait LpSolver: Sync {
    fn solve(&self, lp: &LpProblem<'_>, tol: f64) -> Result<LpOutcome>;
}

#[derive(Clone, Debug)]
pub struct DenseSimplex {
    pub max_iterations: usize,
    /// Rows added per generation round (at least the variable count).
    pub rows_per_round: usize,
    /// Sources with at most this many rows start fully active.
    pub eager_rows: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex {
            max_iterations: 200_000,
            rows_per_round: 200,
            eager_rows: 4000,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    solve_lp_with(&DenseSimplex::default(), lp, tol)
}

pub fn solve_lp_with(solver: &dyn LpSolver, lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    lp.validate()?;
    let rows = CanonicalRows::new(lp);
    let out = solver.solve(
        &LpProblem {
            objective: &lp.objective,
            rows: &rows,
            lower: &lp.lower,
            upper: &lp.upper,
        },
        tol,
    )?;
    if let LpOutcome::Optimal { x, .. } = &out {
        let v = lp.max_violation(x);
        let scale = lp
            .rows
            .iter()
            .flat_map(|r| r.coefs.iter())
            .fold(1.0f64, |m, c| m.max(c.abs()));
        if v > tol * scale.max(1.0) * 10.0 {
            return Err(Error::Solver(format!(
                "optimal point violates the LP by {v:e}"
            )));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Upper(usize),
    Lower(usize),
    Art,
    Row(usize),
}

struct Col {
    kind: Kind,
    coef: Vec<f64>,
    cost: f64,
}

enum Phase {
    One,
    Two,
}

enum Stop {
    Optimal,
    Unbounded,
}

struct Tableau<'a> {
    n: usize,
    target: Vec<f64>,
    cols: Vec<Col>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    yb: Vec<f64>,
    row_active: Vec<bool>,
    source: &'a dyn RowSource,
    iterations: usize,
    scans: usize,
    max_iterations: usize,
    opt_tol: f64,
}

const PIV_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> Tableau<'a> {
    fn cost(&self, j: usize, phase: &Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.cols[j].kind == Kind::Art {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if self.cols[j].kind == Kind::Art {
                    0.0
                } else {
                    self.cols[j].cost
                }
            }
        }
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination and recomputes `y_B`.
    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..n {
                a[i * n + k] = self.cols[j].coef[i];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for c in 0..n {
            let p = (c..n)
                .max_by(|&r1, &r2| a[r1 * n + c].abs().total_cmp(&a[r2 * n + c].abs()))
                .expect("nonempty");
            let pv = a[p * n + c];
            if pv.abs() < 1e-13 {
                return Err(Error::Solver(
                    "singular basis during refactorization".into(),
                ));
            }
            if p != c {
                for k in 0..n {
                    a.swap(p * n + k, c * n + k);
                    inv.swap(p * n + k, c * n + k);
                }
            }
            let s = 1.0 / pv;
            for k in 0..n {
                a[c * n + k] *= s;
                inv[c * n + k] *= s;
            }
            for r in 0..n {
                if r != c {
                    let f = a[r * n + c];
                    if f != 0.0 {
                        for k in 0..n {
                            a[r * n + k] -= f * a[c * n + k];
                            inv[r * n + k] -= f * inv[c * n + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.recompute_yb();
        Ok(())
    }

    fn recompute_yb(&mut self) {
        let n = self.n;
        for i in 0..n {
            let mut v = dot(&self.binv[i * n..(i + 1) * n], &self.target);
            if v < 0.0 && v > -1e-7 * (1.0 + self.target.iter().fold(0.0f64, |m, t| m.max(t.abs())))
            {
                v = 0.0;
            }
            self.yb[i] = v;
        }
    }

    fn multipliers(&self, phase: &Phase) -> Vec<f64> {
        let n = self.n;
        let mut pi = vec![0.0; n];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = self.cost(j, phase);
            if cb != 0.0 {
                let row = &self.binv[i * n..(i + 1) * n];
                for (p, b) in pi.iter_mut().zip(row) {
                    *p += cb * b;
                }
            }
        }
        pi
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64], theta: f64) {
        let n = self.n;
        let wr = w[r];
        for i in 0..n {
            if i != r {
                self.yb[i] -= theta * w[i];
                if self.yb[i] < 0.0 && self.yb[i] > -FEAS_TOL {
                    self.yb[i] = 0.0;
                }
            }
        }
        self.yb[r] = theta;
        let (before, rest) = self.binv.split_at_mut(r * n);
        let (pivot_row, after) = rest.split_at_mut(n);
        for v in pivot_row.iter_mut() {
            *v /= wr;
        }
        for (i, row) in before.chunks_mut(n).chain(after.chunks_mut(n)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = w[i];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = q;
    }

    /// Simplex iterations over the active columns.
    fn run(&mut self, phase: &Phase) -> Result<Stop> {
        let n = self.n;
        let mut in_basis = vec![false; self.cols.len()];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        let mut best_obj = f64::INFINITY;
        let mut stall = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Solver(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            let obj: f64 = self
                .basis
                .iter()
                .zip(&self.yb)
                .map(|(&j, y)| self.cost(j, phase) * y)
                .sum();
            if obj < best_obj - 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
            } else {
                stall += 1;
            }
            let bland = stall > 50;

            let pi = self.multipliers(phase);
            let mut enter: Option<(usize, f64)> = None;
            for (j, c) in self.cols.iter().enumerate() {
                if in_basis[j] || (matches!(phase, Phase::Two) && c.kind == Kind::Art) {
                    continue;
                }
                let rc = self.cost(j, phase) - dot(&pi, &c.coef);
                if rc < -self.opt_tol {
                    if bland {
                        enter = Some((j, rc));
                        break;
                    }
                    if enter.is_none_or(|(_, b)| rc < b) {
                        enter = Some((j, rc));
                    }
                }
            }
            let Some((q, _)) = enter else {
                return Ok(Stop::Optimal);
            };

            let mut w = vec![0.0; n];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = dot(&self.binv[i * n..(i + 1) * n], &self.cols[q].coef);
            }

            // Basic artificials must stay at zero once phase one is over.
            let mut leave: Option<usize> = None;
            if matches!(phase, Phase::Two) {
                leave = (0..n)
                    .find(|&i| self.cols[self.basis[i]].kind == Kind::Art && w[i].abs() > PIV_TOL);
            }
            if leave.is_none() {
                if bland {
                    let mut best: Option<(usize, f64)> = None;
                    for i in 0..n {
                        if w[i] > PIV_TOL {
                            let t = self.yb[i].max(0.0) / w[i];
                            let better = match best {
                                None => true,
                                Some((bi, bt)) => {
                                    t < bt - 1e-15
                                        || (t <= bt + 1e-15 && self.basis[i] < self.basis[bi])
                                }
                            };
                            if better {
                                best = Some((i, t));
                            }
                        }
                    }
                    leave = best.map(|b| b.0);
                } else {
                    // Harris two-pass ratio test.
                    let mut bound = f64::INFINITY;
                    for i in 0..n {
                        if w[i] > PIV_TOL {
                            bound = bound.min((self.yb[i].max(0.0) + FEAS_TOL) / w[i]);
                        }
                    }
                    if bound.is_finite() {
                        let mut best: Option<usize> = None;
                        for i in 0..n {
                            if w[i] > PIV_TOL
                                && self.yb[i].max(0.0) / w[i] <= bound
                                && best.is_none_or(|b| w[i] > w[b])
                            {
                                best = Some(i);
                            }
                        }
                        leave = best;
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(Stop::Unbounded);
            };
            let theta = (self.yb[r].max(0.0) / w[r]).max(0.0);
            let theta = if self.cols[self.basis[r]].kind == Kind::Art && matches!(phase, Phase::Two)
            {
                0.0
            } else {
                theta
            };
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.pivot(r, q, &w, theta);
            self.iterations += 1;
            since_refactor += 1;
        }
    }

    /// Scans inactive source rows; returns the most negative reduced costs.
    fn scan(&self, pi: &[f64], phase: &Phase, limit: usize) -> Vec<(usize, f64)> {
        let n = self.n;
        let total = self.source.num_rows();
        let block = 4096;
        let opt_tol = self.opt_tol;
        let mut found: Vec<(usize, f64)> = (0..total.div_ceil(block))
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut buf = vec![0.0; n];
                let mut local = Vec::new();
                for i in b * block..((b + 1) * block).min(total) {
                    if self.row_active[i] {
                        continue;
                    }
                    let h = self.source.row(i, &mut buf);
                    let s = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if s == 0.0 {
                        continue;
                    }
                    let cost = match phase {
                        Phase::One => 0.0,
                        Phase::Two => h / s,
                    };
                    let rc = cost - dot(pi, &buf) / s;
                    if rc < -opt_tol {
                        local.push((i, rc));
                    }
                }
                local
            })
            .collect();
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        found.truncate(limit);
        found
    }

    fn source_row_nonzero(&self, i: usize) -> bool {
        let mut buf = vec![0.0; self.n];
        self.source.row(i, &mut buf);
        buf.iter().any(|v| *v != 0.0)
    }

    fn basis_rows(&self) -> Vec<usize> {
        self.basis
            .iter()
            .filter_map(|&j| match self.cols[j].kind {
                Kind::Row(i) => Some(i),
                _ => None,
            })
            .collect()
    }

    fn activate(&mut self, i: usize) {
        let mut buf = vec![0.0; self.n];
        let h = self.source.row(i, &mut buf);
        let s = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in buf.iter_mut() {
            *v /= s;
        }
        self.row_active[i] = true;
        self.cols.push(Col {
            kind: Kind::Row(i),
            coef: buf,
            cost: h / s,
        });
    }

    /// Simplex plus row generation until no inactive row prices out.
    fn solve_phase(&mut self, phase: &Phase, per_round: usize) -> Result<Stop> {
        loop {
            if let Stop::Unbounded = self.run(phase)? {
                return Ok(Stop::Unbounded);
            }
            self.refactor()?;
            let pi = self.multipliers(phase);
            let found = self.scan(&pi, phase, per_round);
            self.scans += 1;
            if found.is_empty() {
                // Confirm optimality against the freshly factored basis.
                let before = self.iterations;
                if let Stop::Unbounded = self.run(phase)? {
                    return Ok(Stop::Unbounded);
                }
                if self.iterations == before {
                    return Ok(Stop::Optimal);
                }
                continue;
            }
            for (i, _) in found {
                self.activate(i);
            }
        }
    }
}

impl DenseSimplex {
    fn build<'a>(
        &self,
        lp: &LpProblem<'a>,
        objective: &[f64],
        tol: f64,
        hint: &[usize],
    ) -> Result<Tableau<'a>> {
        let n = lp.objective.len();
        if lp.rows.num_vars() != n || lp.lower.len() != n || lp.upper.len() != n {
            return Err(Error::input("LP dimensions disagree"));
        }
        let target: Vec<f64> = objective.iter().map(|c| -c).collect();
        let mut cols = Vec::new();
        let mut basis = vec![usize::MAX; n];
        let mut yb = vec![0.0; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let up = lp.upper[i].is_finite().then(|| {
                cols.push(Col {
                    kind: Kind::Upper(i),
                    coef: e.clone(),
                    cost: lp.upper[i],
                });
                cols.len() - 1
            });
            let lo = lp.lower[i].is_finite().then(|| {
                cols.push(Col {
                    kind: Kind::Lower(i),
                    coef: e.iter().map(|v| -v).collect(),
                    cost: -lp.lower[i],
                });
                cols.len() - 1
            });
            let t = target[i];
            let pick = if t > 0.0 {
                up
            } else if t < 0.0 {
                lo
            } else {
                up.or(lo)
            };
            basis[i] = match pick {
                Some(j) => j,
                None => {
                    let sign = if t < 0.0 { -1.0 } else { 1.0 };
                    let mut a = vec![0.0; n];
                    a[i] = sign;
                    cols.push(Col {
                        kind: Kind::Art,
                        coef: a,
                        cost: 0.0,
                    });
                    cols.len() - 1
                }
            };
            yb[i] = t.abs();
        }
        let mut binv = vec![0.0; n * n];
        for i in 0..n {
            binv[i * n + i] = cols[basis[i]].coef[i];
        }
        let total = lp.rows.num_rows();
        let mut tab = Tableau {
            n,
            target,
            cols,
            basis,
            binv,
            yb,
            row_active: vec![false; total],
            source: lp.rows,
            iterations: 0,
            scans: 0,
            max_iterations: self.max_iterations,
            opt_tol: (0.1 * tol).max(1e-12),
        };
        if total <= self.eager_rows {
            let mut buf = vec![0.0; n];
            for i in 0..total {
                let h = lp.rows.row(i, &mut buf);
                let s = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if s == 0.0 {
                    if h < -tol {
                        return Err(Error::input(format!("row {i} reads 0 <= {h}")));
                    }
                    continue;
                }
                tab.activate(i);
            }
        } else {
            for &i in hint {
                if i < total && !tab.row_active[i] && tab.source_row_nonzero(i) {
                    tab.activate(i);
                }
            }
        }
        Ok(tab)
    }

    fn needs_phase_one(tab: &Tableau<'_>) -> bool {
        tab.basis
            .iter()
            .zip(&tab.yb)
            .any(|(&j, &y)| tab.cols[j].kind == Kind::Art && y > FEAS_TOL)
    }

    fn artificial_mass(tab: &Tableau<'_>) -> f64 {
        tab.basis
            .iter()
            .zip(&tab.yb)
            .filter(|(&j, _)| tab.cols[j].kind == Kind::Art)
            .map(|(_, &y)| y)
            .sum()
    }

    fn finish(tab: &Tableau<'_>, lp: &LpProblem<'_>, tol: f64) -> Result<LpOutcome> {
        let x = tab.multipliers(&Phase::Two);
        let objective = dot(lp.objective, &x);
        // Dual feasibility and the duality gap guard against a wrong Optimal.
        let n = tab.n;
        let mut resid: f64 = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for (k, &j) in tab.basis.iter().enumerate() {
                s += tab.cols[j].coef[i] * tab.yb[k];
            }
            resid = resid.max((s - tab.target[i]).abs());
        }
        let cscale = 1.0 + lp.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if resid > 1e-6 * cscale || tab.yb.iter().any(|&y| y < -1e-7 * cscale) {
            return Err(Error::Solver(format!(
                "dual residual {resid:e} after factorization"
            )));
        }
        let dual_obj: f64 = tab
            .basis
            .iter()
            .zip(&tab.yb)
            .map(|(&j, &y)| {
                if tab.cols[j].kind == Kind::Art {
                    0.0
                } else {
                    tab.cols[j].cost * y
                }
            })
            .sum();
        let gap = (objective + dual_obj).abs();
        let scale = 1.0 + objective.abs() + dual_obj.abs();
        if gap > 1e-6 * scale.max(cscale) {
            return Err(Error::Solver(format!("duality gap {gap:e} at termination")));
        }
        for i in 0..n {
            if x[i] > lp.upper[i] + tol * (1.0 + lp.upper[i].abs())
                || x[i] < lp.lower[i] - tol * (1.0 + lp.lower[i].abs())
            {
                return Err(Error::Solver(format!("variable {i} outside its bounds")));
            }
        }
        Ok(LpOutcome::Optimal { x, objective })
    }
}

impl DenseSimplex {
    /// Solves with the rows in `hint` active from the start, and returns
    /// the source rows in the final basis. Feeding those back as the hint of
    /// a closely related LP saves most row-generation rounds.
    pub fn solve_warm(
        &self,
        lp: &LpProblem<'_>,
        tol: f64,
        hint: &[usize],
    ) -> Result<(LpOutcome, Vec<usize>)> {
        let per_round = self.rows_per_round.max(lp.objective.len());
        let mut tab = self.build(lp, lp.objective, tol, hint)?;
        if Self::needs_phase_one(&tab) {
            tab.solve_phase(&Phase::One, per_round)?;
            if Self::artificial_mass(&tab)
                > 1e-9 * (1.0 + tab.target.iter().map(|t| t.abs()).sum::<f64>())
            {
                // No dual solution: the primal is infeasible or unbounded.
                let zero = vec![0.0; lp.objective.len()];
                let mut feas = self.build(lp, &zero, tol, hint)?;
                let out = match feas.solve_phase(&Phase::Two, per_round)? {
                    Stop::Unbounded => LpOutcome::Infeasible,
                    Stop::Optimal => LpOutcome::Unbounded,
                };
                return Ok((out, Vec::new()));
            }
        }
        let out = match tab.solve_phase(&Phase::Two, per_round)? {
            Stop::Unbounded => LpOutcome::Infeasible,
            Stop::Optimal => Self::finish(&tab, lp, tol)?,
        };
        log::debug!(
            "simplex: {} iterations, {} scans, {} active rows",
            tab.iterations,
            tab.scans,
            tab.cols
                .iter()
                .filter(|c| matches!(c.kind, Kind::Row(_)))
                .count()
        );
        Ok((out, tab.basis_rows()))
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LpProblem<'_>, tol: f64) -> Result<LpOutcome> {
        Ok(self.solve_warm(lp, tol, &[])?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(out: LpOutcome) -> (Vec<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn one_row_maximization() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        lp.add_row(vec![1.0], Sense::Le, 1.0);
        let (x, obj) = optimal(solve_lp(&lp, 1e-9).unwrap());
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((obj + 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![1.0], Sense::Le, -1.0);
        lp.add_row(vec![1.0], Sense::Ge, 1.0);
        assert_eq!(solve_lp(&lp, 1e-9).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_ray_is_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        assert_eq!(solve_lp(&lp, 1e-9).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_with_nonzero_objective() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, -2.0];
        lp.add_row(vec![1.0, 1.0], Sense::Le, 1.0);
        lp.add_row(vec![1.0, 1.0], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&lp, 1e-9).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn textbook_two_variable_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0, -5.0];
        lp.lower = vec![0.0, 0.0];
        lp.add_row(vec![1.0, 0.0], Sense::Le, 4.0);
        lp.add_row(vec![0.0, 2.0], Sense::Le, 12.0);
        lp.add_row(vec![3.0, 2.0], Sense::Le, 18.0);
        let (x, obj) = optimal(solve_lp(&lp, 1e-9).unwrap());
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        assert!((obj + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows() {
        // min x + y s.t. x + 2y = 4, x - y = 1
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add_row(vec![1.0, 2.0], Sense::Eq, 4.0);
        lp.add_row(vec![1.0, -1.0], Sense::Eq, 1.0);
        let (x, _) = optimal(solve_lp(&lp, 1e-9).unwrap());
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    struct Halfplanes {
        k: usize,
    }

    impl RowSource for Halfplanes {
        fn num_vars(&self) -> usize {
            2
        }
        fn num_rows(&self) -> usize {
            self.k
        }
        fn row(&self, i: usize, out: &mut [f64]) -> f64 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / self.k as f64;
            out[0] = t.cos();
            out[1] = t.sin();
            1.0
        }
    }

    #[test]
    fn lazy_rows_polygon() {
        // Maximize x over a regular 20000-gon circumscribing the unit disk.
        let src = Halfplanes { k: 20_000 };
        let lp = LpProblem {
            objective: &[-1.0, 0.0],
            rows: &src,
            lower: &[f64::NEG_INFINITY; 2],
            upper: &[f64::INFINITY; 2],
        };
        let out = DenseSimplex::default().solve(&lp, 1e-9).unwrap();
        let (x, _) = optimal(out);
        assert!((x[0] - 1.0).abs() < 1e-6, "{x:?}");
    }
}
