//! Sample-size requirements for the three PAC routes, and the feature-radius
//! bound `R >= sup ||g(f(x, d))||_2` the Rademacher route needs.
//!
//! Every calculator evaluates its real-valued bound once and takes a single
//! ceiling, so the returned `M` is the smallest integer meeting the bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalPowerTable};
use crate::poly::{eval_monomials, CompiledPoly, Exponent, Polynomial};
use crate::region::{Domain, Overlap, Region};
use crate::rng::domain;
use crate::stochastics::sample_states_in;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Vc,
    Scenario,
    Rademacher,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vc" => Ok(Route::Vc),
            "scenario" => Ok(Route::Scenario),
            "rademacher" => Ok(Route::Rademacher),
            _ => Err(Error::input(format!(
                "unknown route {s:?}; expected vc, scenario or rademacher"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub route: Route,
    pub m: u64,
    /// The bound before the ceiling.
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vc_dim: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_params: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ua: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::input(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

fn ceil_count(bound: f64) -> Result<u64> {
    if !bound.is_finite() || bound > 9.0e15 {
        return Err(Error::input(format!(
            "sample bound {bound} is not representable"
        )));
    }
    Ok((bound.ceil() as u64).max(1))
}

pub fn vc_bound(epsilon: f64, delta: f64, vc_dim: u64) -> f64 {
    (5.0 / epsilon) * ((4.0 / delta).ln() + vc_dim as f64 * (40.0 / epsilon).ln())
}

pub fn scenario_bound(epsilon: f64, delta: f64, num_params: u64) -> f64 {
    (2.0 / epsilon) * ((1.0 / delta).ln() + num_params as f64)
}

pub fn rademacher_bound(ua: f64, tau: f64, delta: f64, radius: f64) -> f64 {
    let s = 2.0 * radius + (2.0 * (1.0 / delta).ln()).sqrt();
    (ua * ua) / (tau * tau) * s * s
}

/// `M = ceil((5/ε)(ln(4/δ) + N ln(40/ε)))`.
pub fn vc_sample_size(epsilon: f64, delta: f64, vc_dim: u64) -> Result<SampleBudget> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("delta", delta)?;
    if vc_dim == 0 {
        return Err(Error::input("VC dimension must be at least 1"));
    }
    let bound = vc_bound(epsilon, delta, vc_dim);
    Ok(SampleBudget {
        route: Route::Vc,
        m: ceil_count(bound)?,
        bound,
        epsilon: Some(epsilon),
        delta,
        vc_dim: Some(vc_dim),
        num_params: None,
        ua: None,
        tau: None,
        radius: None,
    })
}

/// `M = ceil((2/ε)(ln(1/δ) + m))`.
pub fn scenario_sample_size(epsilon: f64, delta: f64, num_params: u64) -> Result<SampleBudget> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("delta", delta)?;
    if num_params == 0 {
        return Err(Error::input("parameter count must be at least 1"));
    }
    let bound = scenario_bound(epsilon, delta, num_params);
    Ok(SampleBudget {
        route: Route::Scenario,
        m: ceil_count(bound)?,
        bound,
        epsilon: Some(epsilon),
        delta,
        vc_dim: None,
        num_params: Some(num_params),
        ua: None,
        tau: None,
        radius: None,
    })
}

/// `M = ceil((U_a²/τ²)(2R + sqrt(2 ln(1/δ)))²)`.
pub fn rademacher_sample_size(ua: f64, tau: f64, delta: f64, radius: f64) -> Result<SampleBudget> {
    check_open_unit("delta", delta)?;
    if !(ua >= 1.0 && ua.is_finite()) {
        return Err(Error::input(format!("U_a must be at least 1, got {ua}")));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::input(format!("tau must lie in (0, 1], got {tau}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::input(format!(
            "feature radius must be positive, got {radius}"
        )));
    }
    let bound = rademacher_bound(ua, tau, delta, radius);
    Ok(SampleBudget {
        route: Route::Rademacher,
        m: ceil_count(bound)?,
        bound,
        epsilon: None,
        delta,
        vc_dim: None,
        num_params: None,
        ua: Some(ua),
        tau: Some(tau),
        radius: Some(radius),
    })
}

impl SampleBudget {
    /// Whether `m` samples satisfy this budget's inequality.
    pub fn satisfied_by(&self, m: u64) -> bool {
        m as f64 >= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRadius {
    /// Sound upper bound on the feature norm.
    pub upper: f64,
    /// Largest norm seen at sampled points; diagnostic only.
    pub lower: f64,
    pub boxes: usize,
}

struct Node {
    upper: f64,
    bx: Vec<Interval>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.upper == o.upper
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        self.upper.total_cmp(&o.upper)
    }
}

/// Upper bound on `sup ||g(f(x,d))||_2` over `X × D` by best-first
/// branch-and-bound, stopping at relative gap `rel_gap` or after
/// `max_boxes` boxes.
pub fn feature_radius_bound(
    basis: &[Exponent],
    dynamics: &[Polynomial],
    x: &Region,
    d: &Region,
    rel_gap: f64,
    max_boxes: usize,
    seed: u64,
) -> Result<FeatureRadius> {
    let n = x.dim();
    let q = d.dim();
    if dynamics.len() != n || dynamics.iter().any(|f| f.arity() != n + q) {
        return Err(Error::input(
            "dynamics do not match the state and disturbance dimensions",
        ));
    }
    if basis.iter().any(|e| e.len() != n) {
        return Err(Error::input(
            "basis exponent length differs from the state dimension",
        ));
    }
    let fs: Vec<CompiledPoly> = dynamics.iter().map(CompiledPoly::new).collect();
    let mut basis_max = vec![0u32; n];
    for e in basis {
        for (m, &k) in basis_max.iter_mut().zip(e) {
            *m = (*m).max(k);
        }
    }
    let norm_at = |z: &[f64]| -> f64 {
        let fx: Vec<f64> = fs.iter().map(|f| f.eval(z)).collect();
        let mut g = vec![0.0; basis.len()];
        eval_monomials(basis, &fx, &mut g);
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let upper_on = |bx: &[Interval]| -> f64 {
        let fx: Vec<Interval> = fs
            .iter()
            .map(|f| {
                let t = IntervalPowerTable::new(bx, f.max_exponents());
                crate::interval::eval_compiled(f, &t)
            })
            .collect();
        let t = IntervalPowerTable::new(&fx, &basis_max);
        let mut s = Interval::point(0.0);
        for e in basis {
            let mut v = Interval::point(1.0);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    v = v * t.get(i, k);
                }
            }
            s = s + v.powi(2);
        }
        s.hi.sqrt().next_up()
    };

    let mut lower: f64 = 0.0;
    let xs = sample_states_in(x, 4096, seed, domain::FEATURE_RADIUS);
    let ds = sample_states_in(d, 4096, seed, domain::FEATURE_RADIUS + 100);
    for (xi, di) in xs.iter().zip(&ds) {
        let z: Vec<f64> = xi.iter().chain(di).copied().collect();
        lower = lower.max(norm_at(&z));
    }

    let mut root = x.bounding_box();
    root.extend(d.bounding_box());
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        upper: upper_on(&root),
        bx: root,
    });
    let mut boxes = 1usize;
    loop {
        let top = heap.peek().expect("heap never empties").upper;
        if top <= lower * (1.0 + rel_gap) || boxes >= max_boxes {
            return Ok(FeatureRadius {
                upper: top,
                lower,
                boxes,
            });
        }
        let node = heap.pop().expect("peeked");
        let axis = (0..node.bx.len())
            .max_by(|&a, &b| node.bx[a].width().total_cmp(&node.bx[b].width()))
            .unwrap_or(0);
        let mid = node.bx[axis].mid();
        for half in [
            Interval::of(node.bx[axis].lo, mid),
            Interval::of(mid, node.bx[axis].hi),
        ] {
            let mut child = node.bx.clone();
            child[axis] = half;
            if x.classify(&child[..n]) == Overlap::Disjoint {
                continue;
            }
            let c: Vec<f64> = child.iter().map(|i| i.mid()).collect();
            if x.contains(&c[..n]) {
                lower = lower.max(norm_at(&c));
            }
            boxes += 1;
            heap.push(Node {
                upper: upper_on(&child),
                bx: child,
            });
        }
        if heap.is_empty() {
            return Ok(FeatureRadius {
                upper: lower,
                lower,
                boxes,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sample_sizes() {
        assert_eq!(vc_sample_size(0.1, 0.001, 15).unwrap().m, 4909);
        assert_eq!(vc_sample_size(0.5, 0.5, 1).unwrap().m, 65);
        assert_eq!(scenario_sample_size(0.1, 0.001, 15).unwrap().m, 439);
        assert_eq!(scenario_sample_size(0.5, 0.999, 1).unwrap().m, 5);
        assert_eq!(
            rademacher_sample_size(2.0, 0.1, 0.001, 1.0).unwrap().m,
            13074
        );
        let big = rademacher_sample_size(8.0, 0.01, 0.001, 1.0).unwrap().m;
        assert!((big as f64 - 2.09e7).abs() < 0.01e7, "{big}");
    }

    #[test]
    fn out_of_range_inputs_rejected() {
        assert!(vc_sample_size(0.0, 0.1, 1).is_err());
        assert!(vc_sample_size(0.1, 1.0, 1).is_err());
        assert!(scenario_sample_size(0.1, 0.1, 0).is_err());
        assert!(rademacher_sample_size(2.0, 0.0, 0.1, 1.0).is_err());
        assert!(rademacher_sample_size(0.5, 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn identity_feature_radius() {
        let x = Region::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let d = Region::Box {
            lo: vec![0.0],
            hi: vec![0.1],
        };
        let f = vec![Polynomial::var(2, 0)];
        let r = feature_radius_bound(&[vec![1]], &f, &x, &d, 0.01, 10_000, 1).unwrap();
        assert!(r.upper >= 1.0 && r.upper <= 1.01, "{r:?}");
        let r = feature_radius_bound(&[vec![1], vec![2]], &f, &x, &d, 0.01, 10_000, 1).unwrap();
        assert!(
            r.upper >= 2f64.sqrt() && r.upper <= 1.01 * 2f64.sqrt(),
            "{r:?}"
        );
    }
}
