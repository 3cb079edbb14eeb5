//! Boxes, balls, and the closed annulus `closure(outer \ inner)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// How a box relates to a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overlap {
    Disjoint,
    Inside,
    Straddles,
}

/// A set the verifier can branch over.
pub trait Domain: Sync {
    fn dim(&self) -> usize;
    fn bounding_box(&self) -> Vec<Interval>;
    fn classify(&self, bx: &[Interval]) -> Overlap;
    fn contains(&self, x: &[f64]) -> bool;
    /// A nearby point of the set; used to turn box centers into witnesses.
    fn project(&self, x: &[f64]) -> Vec<f64>;
}

fn sq_dist(bx: &[Interval], center: &[f64]) -> Interval {
    let mut acc = Interval::point(0.0);
    for (x, &c) in bx.iter().zip(center) {
        acc = acc + (*x - Interval::point(c)).powi(2);
    }
    acc
}

impl Region {
    pub fn unit_ball(dim: usize) -> Region {
        Region::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Region> {
        let r = Region::Ball { center, radius };
        r.validate()?;
        Ok(r)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Region> {
        let r = Region::Box { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn from_intervals(bx: &[Interval]) -> Region {
        Region::Box {
            lo: bx.iter().map(|i| i.lo).collect(),
            hi: bx.iter().map(|i| i.hi).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::input(
                        "box bounds must be nonempty and of equal length",
                    ));
                }
                for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
                    if !(l.is_finite() && h.is_finite() && l <= h) {
                        return Err(Error::input(format!(
                            "box axis {i}: invalid bounds [{l}, {h}]"
                        )));
                    }
                }
            }
            Region::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::input("ball center must be nonempty and finite"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::input(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether `x` lies in the interior (strict inequalities).
    pub fn interior_contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| l < v && v < h),
            Region::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                d2 < radius * radius
            }
        }
    }

    /// Relation of `bx` to the open interior. `Inside` means the box lies in
    /// the interior, `Disjoint` means it misses the interior.
    pub fn classify_interior(&self, bx: &[Interval]) -> Overlap {
        match self {
            Region::Box { lo, hi } => {
                let mut inside = true;
                for (x, (l, h)) in bx.iter().zip(lo.iter().zip(hi)) {
                    if x.hi <= *l || x.lo >= *h {
                        return Overlap::Disjoint;
                    }
                    if !(x.lo > *l && x.hi < *h) {
                        inside = false;
                    }
                }
                if inside {
                    Overlap::Inside
                } else {
                    Overlap::Straddles
                }
            }
            Region::Ball { center, radius } => {
                let d2 = sq_dist(bx, center);
                let r2 = Interval::point(*radius).powi(2);
                if d2.lo >= r2.hi {
                    Overlap::Disjoint
                } else if d2.hi < r2.lo {
                    Overlap::Inside
                } else {
                    Overlap::Straddles
                }
            }
        }
    }

    /// Points on the topological boundary, `count` of them spread evenly
    /// (ball: golden-angle spiral or circle; box: face grids).
    pub fn boundary_points(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        match self {
            Region::Ball { center, radius } => {
                for i in 0..count {
                    let dir = sphere_direction(n, i, count);
                    out.push(
                        dir.iter()
                            .zip(center)
                            .map(|(d, c)| c + radius * d)
                            .collect(),
                    );
                }
            }
            Region::Box { lo, hi } => {
                let faces = 2 * n;
                let per_face = count.div_ceil(faces).max(1);
                for f in 0..faces {
                    let axis = f / 2;
                    for i in 0..per_face {
                        if out.len() == count {
                            break;
                        }
                        let u = crate::stochastics::halton_point(i + 1, n.saturating_sub(1));
                        let mut p = Vec::with_capacity(n);
                        let mut k = 0;
                        for a in 0..n {
                            if a == axis {
                                p.push(if f % 2 == 0 { lo[a] } else { hi[a] });
                            } else {
                                p.push(lo[a] + (hi[a] - lo[a]) * u[k]);
                                k += 1;
                            }
                        }
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

/// Deterministic, roughly even unit directions.
fn sphere_direction(n: usize, i: usize, count: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    match n {
        1 => vec![if i % 2 == 0 { 1.0 } else { -1.0 }],
        2 => {
            let t = 2.0 * PI * (i as f64 + 0.5) / count as f64;
            vec![t.cos(), t.sin()]
        }
        _ => {
            // Halton point mapped through the inverse normal CDF, normalized.
            let u = crate::stochastics::halton_point(i + 1, n);
            let g: Vec<f64> = u
                .iter()
                .map(|&v| crate::stochastics::std_normal_quantile(v))
                .collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            g.iter().map(|v| v / norm).collect()
        }
    }
}

impl Domain for Region {
    fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    fn bounding_box(&self) -> Vec<Interval> {
        match self {
            Region::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| Interval::of(l, h))
                .collect(),
            Region::Ball { center, radius } => center
                .iter()
                .map(|&c| Interval::of((c - radius).next_down(), (c + radius).next_up()))
                .collect(),
        }
    }

    fn classify(&self, bx: &[Interval]) -> Overlap {
        match self {
            Region::Box { lo, hi } => {
                let mut inside = true;
                for (x, (l, h)) in bx.iter().zip(lo.iter().zip(hi)) {
                    if x.hi < *l || x.lo > *h {
                        return Overlap::Disjoint;
                    }
                    if !(x.lo >= *l && x.hi <= *h) {
                        inside = false;
                    }
                }
                if inside {
                    Overlap::Inside
                } else {
                    Overlap::Straddles
                }
            }
            Region::Ball { center, radius } => {
                let d2 = sq_dist(bx, center);
                let r2 = Interval::point(*radius).powi(2);
                if d2.lo > r2.hi {
                    Overlap::Disjoint
                } else if d2.hi <= r2.lo {
                    Overlap::Inside
                } else {
                    Overlap::Straddles
                }
            }
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| l <= v && v <= h),
            Region::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                d2 <= radius * radius
            }
        }
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            Region::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm <= *radius {
                    return x.to_vec();
                }
                // Shrink slightly so rounding keeps the point inside.
                let s = radius / norm * (1.0 - 1e-12);
                d.iter().zip(center).map(|(v, c)| c + v * s).collect()
            }
        }
    }
}

/// The closed set `closure(outer \ inner)`.
#[derive(Clone, Debug)]
pub struct Annulus {
    pub outer: Region,
    pub inner: Region,
}

impl Domain for Annulus {
    fn dim(&self) -> usize {
        self.outer.dim()
    }

    fn bounding_box(&self) -> Vec<Interval> {
        self.outer.bounding_box()
    }

    fn classify(&self, bx: &[Interval]) -> Overlap {
        match (self.outer.classify(bx), self.inner.classify_interior(bx)) {
            (Overlap::Disjoint, _) | (_, Overlap::Inside) => Overlap::Disjoint,
            (Overlap::Inside, Overlap::Disjoint) => Overlap::Inside,
            _ => Overlap::Straddles,
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.outer.contains(x) && !self.inner.interior_contains(x)
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        if self.inner.interior_contains(&p) {
            p = match &self.inner {
                Region::Ball { center, radius } => {
                    let d: Vec<f64> = p.iter().zip(center).map(|(a, c)| a - c).collect();
                    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        let mut q = center.clone();
                        q[0] += radius;
                        q
                    } else {
                        let s = radius / norm * (1.0 + 1e-12);
                        d.iter().zip(center).map(|(v, c)| c + v * s).collect()
                    }
                }
                Region::Box { lo, hi } => {
                    let mut best = (f64::INFINITY, 0, 0.0);
                    for (a, (l, h)) in lo.iter().zip(hi).enumerate() {
                        if p[a] - l < best.0 {
                            best = (p[a] - l, a, *l);
                        }
                        if h - p[a] < best.0 {
                            best = (h - p[a], a, *h);
                        }
                    }
                    let mut q = p.clone();
                    q[best.1] = best.2;
                    q
                }
            };
        }
        self.outer.project(&p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_classification() {
        let b = Region::unit_ball(2);
        let inside = [Interval::of(-0.5, 0.5), Interval::of(-0.5, 0.5)];
        let outside = [Interval::of(0.8, 1.0), Interval::of(0.8, 1.0)];
        let straddle = [Interval::of(0.5, 1.5), Interval::of(-0.1, 0.1)];
        assert_eq!(b.classify(&inside), Overlap::Inside);
        assert_eq!(b.classify(&outside), Overlap::Disjoint);
        assert_eq!(b.classify(&straddle), Overlap::Straddles);
    }

    #[test]
    fn annulus_keeps_inner_boundary() {
        let a = Annulus {
            outer: Region::Box {
                lo: vec![-2.0, -2.0],
                hi: vec![2.0, 2.0],
            },
            inner: Region::unit_ball(2),
        };
        assert!(a.contains(&[1.0, 0.0]));
        assert!(!a.contains(&[0.5, 0.0]));
        assert!(a.contains(&[2.0, 2.0]));
        assert_eq!(
            a.classify(&[Interval::of(-0.2, 0.2), Interval::of(-0.2, 0.2)]),
            Overlap::Disjoint
        );
        let p = a.project(&[0.1, 0.0]);
        assert!(a.contains(&p));
    }

    #[test]
    fn region_validation() {
        assert!(Region::ball(vec![0.0], 0.0).is_err());
        assert!(Region::boxed(vec![1.0], vec![0.0]).is_err());
        let j = r#"{"kind":"ball","center":[0,0],"radius":1}"#;
        let r: Region = serde_json::from_str(j).unwrap();
        assert_eq!(r, Region::unit_ball(2));
    }

    #[test]
    fn boundary_points_lie_on_boundary() {
        let b = Region::unit_ball(3);
        for p in b.boundary_points(50) {
            let r: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
        let bx = Region::Box {
            lo: vec![-1.0, 0.0],
            hi: vec![1.0, 2.0],
        };
        for p in bx.boundary_points(40) {
            assert!(bx.contains(&p) && !bx.interior_contains(&p));
        }
    }
}
