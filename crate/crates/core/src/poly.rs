//! Sparse multivariate polynomials over `f64`.
//!
//! Terms live in a `BTreeMap` keyed by exponent vector, so iteration (and
//! therefore summation during evaluation) always runs in lexicographic
//! exponent order. Zero coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Exponent = Vec<u32>;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Exponent, f64>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    arity: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for Polynomial {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        Polynomial::from_terms(j.arity, j.terms.into_iter().map(|t| (t.exp, t.coef)))
    }
}

impl From<Polynomial> for PolyJson {
    fn from(p: Polynomial) -> Self {
        PolyJson {
            arity: p.arity,
            terms: p
                .terms
                .into_iter()
                .map(|(exp, coef)| TermJson { exp, coef })
                .collect(),
        }
    }
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Polynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(arity);
        p.add_term(vec![0; arity], c);
        p
    }

    /// The coordinate polynomial `x_i`.
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(
            i < arity,
            "variable index {i} out of range for arity {arity}"
        );
        let mut e = vec![0; arity];
        e[i] = 1;
        Polynomial::monomial(e, 1.0)
    }

    pub fn monomial(exp: Exponent, coef: f64) -> Self {
        let mut p = Polynomial::zero(exp.len());
        p.add_term(exp, coef);
        p
    }

    /// Builds a polynomial, summing repeated exponents. Rejects wrong-length
    /// exponents and non-finite coefficients.
    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Exponent, f64)>,
    ) -> Result<Self> {
        let mut p = Polynomial::zero(arity);
        for (i, (exp, coef)) in terms.into_iter().enumerate() {
            if exp.len() != arity {
                return Err(Error::input(format!(
                    "term {i}: exponent length {} does not match arity {arity}",
                    exp.len()
                )));
            }
            if !coef.is_finite() {
                return Err(Error::input(format!("term {i}: coefficient is not finite")));
            }
            p.add_term(exp, coef);
        }
        Ok(p)
    }

    /// Adds `coef * x^exp`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, exp: Exponent, coef: f64) {
        debug_assert_eq!(exp.len(), self.arity);
        if coef == 0.0 {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + coef;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &[u32]) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Largest total degree in the variables `vars`.
    pub fn degree_in(&self, vars: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|e| e[vars.clone()].iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.arity];
        for e in self.terms.keys() {
            for (mi, &ei) in m.iter_mut().zip(e) {
                *mi = (*mi).max(ei);
            }
        }
        m
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Term-sum evaluation in lexicographic exponent order.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, &c) in &self.terms {
            let mut t = c;
            for (&x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= x.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Polynomial::zero(self.arity);
        }
        Polynomial {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c * s))
                .collect(),
        }
    }

    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut p = self.clone();
        p.add_term(vec![0; self.arity], c);
        p
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut result = Polynomial::constant(self.arity, 1.0);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share one
    /// arity, which becomes the arity of the result.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial> {
        if subs.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: subs.len(),
            });
        }
        let out_arity = subs.first().map_or(0, |s| s.arity);
        if let Some(bad) = subs.iter().position(|s| s.arity != out_arity) {
            return Err(Error::input(format!(
                "substitute {bad} has arity {} but substitute 0 has arity {out_arity}",
                subs[bad].arity
            )));
        }
        // Powers are cached per variable since basis monomials share them.
        let max_e = self.max_exponents();
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.arity);
        for (s, &me) in subs.iter().zip(&max_e) {
            let mut v = vec![Polynomial::constant(out_arity, 1.0)];
            for k in 1..=me as usize {
                let next = &v[k - 1] * s;
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = Polynomial::zero(out_arity);
        for (e, &c) in &self.terms {
            let mut t = Polynomial::constant(out_arity, c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[i][k as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.arity);
        for (e, &c) in &self.terms {
            let k = e[var];
            if k > 0 {
                let mut e2 = e.clone();
                e2[var] = k - 1;
                p.add_term(e2, c * k as f64);
            }
        }
        p
    }

    /// Keeps the first `keep` variables and replaces every monomial in the
    /// remaining ones by `weight(tail_exponent)`.
    pub fn contract_tail(&self, keep: usize, mut weight: impl FnMut(&[u32]) -> f64) -> Polynomial {
        assert!(keep <= self.arity);
        let mut p = Polynomial::zero(keep);
        for (e, &c) in &self.terms {
            let w = weight(&e[keep..]);
            p.add_term(e[..keep].to_vec(), c * w);
        }
        p
    }

    /// Fixes the trailing variables to `values`.
    pub fn fix_tail(&self, values: &[f64]) -> Polynomial {
        let keep = self.arity - values.len();
        self.contract_tail(keep, |tail| {
            tail.iter()
                .zip(values)
                .map(|(&k, &v)| v.powi(k as i32))
                .product()
        })
    }

    /// Fixes the leading variables to `values`.
    pub fn fix_head(&self, values: &[f64]) -> Polynomial {
        let k = values.len();
        assert!(k <= self.arity);
        let mut p = Polynomial::zero(self.arity - k);
        for (e, &c) in &self.terms {
            let w: f64 = e[..k]
                .iter()
                .zip(values)
                .map(|(&j, &v)| v.powi(j as i32))
                .product();
            p.add_term(e[k..].to_vec(), c * w);
        }
        p
    }

    /// Embeds into a larger variable space by appending unused variables.
    pub fn extend_arity(&self, new_arity: usize) -> Polynomial {
        assert!(new_arity >= self.arity);
        Polynomial {
            arity: new_arity,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| {
                    let mut e2 = e.clone();
                    e2.resize(new_arity, 0);
                    (e2, c)
                })
                .collect(),
        }
    }

    /// Drops terms whose coefficient magnitude is at most `eps`.
    pub fn prune(&self, eps: f64) -> Polynomial {
        Polynomial {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > eps)
                .map(|(e, &c)| (e.clone(), c))
                .collect(),
        }
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}](", self.arity)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let mag = c.abs();
            let is_const = e.iter().all(|&k| k == 0);
            if mag != 1.0 || is_const {
                write!(f, "{mag}")?;
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "x{i}")?,
                    _ => write!(f, "x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial add");
        let mut p = self.clone();
        for (e, &c) in &rhs.terms {
            p.add_term(e.clone(), c);
        }
        p
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial sub");
        let mut p = self.clone();
        for (e, &c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial mul");
        let mut p = Polynomial::zero(self.arity);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Flattened polynomial for repeated evaluation. Powers are built by
/// repeated multiplication into a per-variable table, so results can differ
/// from [`Polynomial::eval`] in the last bits.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    arity: usize,
    coefs: Vec<f64>,
    exps: Vec<u32>,
    max_exp: Vec<u32>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let mut coefs = Vec::with_capacity(p.num_terms());
        let mut exps = Vec::with_capacity(p.num_terms() * p.arity);
        for (e, c) in p.terms() {
            coefs.push(c);
            exps.extend_from_slice(e);
        }
        CompiledPoly {
            arity: p.arity,
            coefs,
            exps,
            max_exp: p.max_exponents(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn max_exponents(&self) -> &[u32] {
        &self.max_exp
    }

    pub fn num_terms(&self) -> usize {
        self.coefs.len()
    }

    pub fn term(&self, t: usize) -> (f64, &[u32]) {
        (
            self.coefs[t],
            &self.exps[t * self.arity..(t + 1) * self.arity],
        )
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        let table = PowerTable::new(point, &self.max_exp);
        self.eval_with(&table)
    }

    pub fn eval_with(&self, table: &PowerTable) -> f64 {
        let mut acc = 0.0;
        for (t, &c) in self.coefs.iter().enumerate() {
            let e = &self.exps[t * self.arity..(t + 1) * self.arity];
            let mut v = c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    v *= table.get(i, k);
                }
            }
            acc += v;
        }
        acc
    }
}

/// `x_i^k` for every variable up to a per-variable maximum exponent.
#[derive(Clone, Debug)]
pub struct PowerTable {
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl PowerTable {
    pub fn new(point: &[f64], max_exp: &[u32]) -> Self {
        let mut offsets = Vec::with_capacity(point.len());
        let mut values = Vec::new();
        for (&x, &m) in point.iter().zip(max_exp) {
            offsets.push(values.len());
            let mut v = 1.0;
            values.push(v);
            for _ in 0..m {
                v *= x;
                values.push(v);
            }
        }
        PowerTable { offsets, values }
    }

    #[inline]
    pub fn get(&self, var: usize, k: u32) -> f64 {
        self.values[self.offsets[var] + k as usize]
    }
}

/// Evaluates a list of monomials sharing one power table.
pub fn eval_monomials(exps: &[Exponent], point: &[f64], out: &mut [f64]) {
    let arity = point.len();
    let mut max_exp = vec![0; arity];
    for e in exps {
        for (m, &k) in max_exp.iter_mut().zip(e) {
            *m = (*m).max(k);
        }
    }
    let table = PowerTable::new(point, &max_exp);
    for (o, e) in out.iter_mut().zip(exps) {
        let mut v = 1.0;
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                v *= table.get(i, k);
            }
        }
        *o = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(arity: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_terms(arity, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn eval_small_examples() {
        let q = p(2, &[(&[2, 0], 1.0), (&[0, 1], 2.0)]);
        assert_eq!(q.eval(&[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(Polynomial::zero(3).eval(&[0.3, -2.0, 9.0]).unwrap(), 0.0);
    }

    #[test]
    fn vanderpol_x_update_at_reference_point() {
        // x + 0.1 y + 0.1 x d over (x, y, d)
        let f = p(
            3,
            &[(&[1, 0, 0], 1.0), (&[0, 1, 0], 0.1), (&[1, 0, 1], 0.1)],
        );
        let v = f.eval(&[0.45, 0.75, 0.0]).unwrap();
        assert!((v - 0.525).abs() < 1e-15);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let q = Polynomial::var(2, 0);
        assert!(matches!(q.eval(&[1.0]), Err(Error::Arity { .. })));
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Polynomial::var(1, 0);
        assert!((&x - &x).is_zero());
        let q = p(1, &[(&[1], 1.0), (&[1], -1.0)]);
        assert_eq!(q.num_terms(), 0);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let q = p(2, &[(&[1, 0], 1.0), (&[0, 1], -2.0), (&[0, 0], 0.5)]);
        let mut r = Polynomial::constant(2, 1.0);
        for _ in 0..5 {
            r = &r * &q;
        }
        assert_eq!(q.pow(5), r);
    }

    #[test]
    fn compose_agrees_with_pointwise_evaluation() {
        let g = p(2, &[(&[2, 1], 1.5), (&[0, 3], -1.0), (&[0, 0], 2.0)]);
        let s0 = p(3, &[(&[1, 0, 0], 1.0), (&[0, 1, 1], 0.1)]);
        let s1 = p(
            3,
            &[(&[0, 1, 0], 0.9), (&[1, 0, 0], -0.2), (&[0, 0, 2], 1.0)],
        );
        let c = g.compose(&[s0.clone(), s1.clone()]).unwrap();
        for pt in [[0.3, -0.7, 0.2], [1.1, 0.4, -0.5], [0.0, 0.0, 0.0]] {
            let inner = [s0.eval(&pt).unwrap(), s1.eval(&pt).unwrap()];
            let direct = g.eval(&inner).unwrap();
            assert!((c.eval(&pt).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_monomial() {
        let q = p(2, &[(&[3, 2], 2.0)]);
        assert_eq!(q.derivative(0), p(2, &[(&[2, 2], 6.0)]));
        assert_eq!(q.derivative(1), p(2, &[(&[3, 1], 4.0)]));
    }

    #[test]
    fn fix_tail_substitutes_trailing_variables() {
        let q = p(3, &[(&[1, 0, 2], 1.0), (&[0, 1, 1], 3.0)]);
        let r = q.fix_tail(&[2.0]);
        assert_eq!(r, p(2, &[(&[1, 0], 4.0), (&[0, 1], 6.0)]));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let q = p(2, &[(&[2, 0], 1.0), (&[0, 1], 2.0)]);
        let s = serde_json::to_string(&q).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(q, back);
        let bad = r#"{"arity":2,"terms":[{"exp":[1],"coef":1.0}]}"#;
        assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    }

    #[test]
    fn compiled_matches_reference_eval() {
        let q = p(
            3,
            &[
                (&[4, 1, 0], 0.7),
                (&[0, 2, 3], -1.3),
                (&[1, 1, 1], 2.0),
                (&[0, 0, 0], 0.1),
            ],
        );
        let c = CompiledPoly::new(&q);
        let pt = [0.9, -1.2, 0.4];
        assert!((c.eval(&pt) - q.eval(&pt).unwrap()).abs() < 1e-13);
    }
}
