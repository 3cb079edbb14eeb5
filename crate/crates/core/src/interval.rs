//! Closed intervals with outward-rounded arithmetic.
//!
//! Rounding direction is decided from the exact rounding error (FMA for
//! products, two-sum for sums), so exactly representable results such as
//! `[-1, 1]^2 = [0, 1]` are not widened.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, Polynomial};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::NEG_INFINITY } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::INFINITY } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

// Below this magnitude the FMA residual is no longer exact.
const TINY: f64 = 1e-290;

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() { f64::NEG_INFINITY } else { p };
    }
    if p.abs() < TINY {
        return if a == 0.0 || b == 0.0 {
            0.0
        } else {
            p.next_down()
        };
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() { f64::INFINITY } else { p };
    }
    if p.abs() < TINY {
        return if a == 0.0 || b == 0.0 {
            0.0
        } else {
            p.next_up()
        };
    }
    let err = a.mul_add(b, -p);
    if err > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Bounds on `x^k` for `x >= 0`.
#[inline]
fn pow_nonneg(x: f64, k: u32) -> (f64, f64) {
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..k {
        lo = mul_down(lo, x);
        hi = mul_up(hi, x);
    }
    (lo, hi)
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::input(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Unchecked constructor; callers guarantee `lo <= hi`.
    #[inline]
    pub const fn of(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    #[inline]
    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::of(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval::of(lo, hi))
    }

    /// Largest absolute value.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn scale(&self, s: f64) -> Interval {
        if s >= 0.0 {
            Interval::of(mul_down(self.lo, s), mul_up(self.hi, s))
        } else {
            Interval::of(mul_down(self.hi, s), mul_up(self.lo, s))
        }
    }

    /// Integer power with the even/odd rules: even powers never go negative,
    /// odd powers are monotone.
    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k % 2 == 0 {
            if self.lo >= 0.0 {
                Interval::of(pow_nonneg(self.lo, k).0, pow_nonneg(self.hi, k).1)
            } else if self.hi <= 0.0 {
                Interval::of(pow_nonneg(-self.hi, k).0, pow_nonneg(-self.lo, k).1)
            } else {
                Interval::of(0.0, pow_nonneg(self.mag(), k).1)
            }
        } else {
            let lo = if self.lo >= 0.0 {
                pow_nonneg(self.lo, k).0
            } else {
                -pow_nonneg(-self.lo, k).1
            };
            let hi = if self.hi >= 0.0 {
                pow_nonneg(self.hi, k).1
            } else {
                -pow_nonneg(-self.hi, k).0
            };
            Interval::of(lo, hi)
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::of(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;

    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::of(add_down(self.lo, -rhs.hi), add_up(self.hi, -rhs.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;

    #[inline]
    fn neg(self) -> Interval {
        Interval::of(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;

    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval::of(lo, hi)
    }
}

/// `X_i^k` enclosures for every variable up to a per-variable maximum.
#[derive(Clone, Debug)]
pub struct IntervalPowerTable {
    offsets: Vec<usize>,
    values: Vec<Interval>,
}

impl IntervalPowerTable {
    pub fn new(bx: &[Interval], max_exp: &[u32]) -> Self {
        let mut offsets = Vec::with_capacity(bx.len());
        let mut values = Vec::new();
        for (x, &m) in bx.iter().zip(max_exp) {
            offsets.push(values.len());
            for k in 0..=m {
                values.push(x.powi(k));
            }
        }
        IntervalPowerTable { offsets, values }
    }

    #[inline]
    pub fn get(&self, var: usize, k: u32) -> Interval {
        self.values[self.offsets[var] + k as usize]
    }
}

/// Natural interval extension of a compiled polynomial.
pub fn eval_compiled(p: &CompiledPoly, table: &IntervalPowerTable) -> Interval {
    let mut acc = Interval::point(0.0);
    for t in 0..p.num_terms() {
        let (c, e) = p.term(t);
        let mut v = Interval::point(c);
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                v = v * table.get(i, k);
            }
        }
        acc = acc + v;
    }
    acc
}

/// Natural interval extension: an enclosure of `{p(x) : x in bx}`.
pub fn eval_interval(p: &Polynomial, bx: &[Interval]) -> Result<Interval> {
    if bx.len() != p.arity() {
        return Err(Error::Arity {
            expected: p.arity(),
            got: bx.len(),
        });
    }
    let c = CompiledPoly::new(p);
    let table = IntervalPowerTable::new(bx, c.max_exponents());
    Ok(eval_compiled(&c, &table))
}
