//! Certification problems: polynomial dynamics `x+ = f(x, d)`, the safe set
//! `X`, the one-step envelope `X̂ ⊇ X`, and the disturbance model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::eval_interval;
use crate::poly::Polynomial;
use crate::region::{Domain, Overlap, Region};
use crate::stochastics::DisturbanceModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificationProblem {
    pub state_dim: usize,
    pub disturbance_dim: usize,
    /// One polynomial per state coordinate over `(x_1..x_n, d_1..d_q)`.
    pub dynamics: Vec<Polynomial>,
    pub safe_set: Region,
    pub envelope: Region,
    pub disturbance: DisturbanceModel,
    pub horizon: u32,
}

/// Problem description whose envelope may be omitted.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub state_dim: usize,
    pub disturbance_dim: usize,
    pub dynamics: Vec<Polynomial>,
    pub safe_set: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Region>,
    pub disturbance: DisturbanceModel,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
}

fn default_horizon() -> u32 {
    1
}

impl From<CertificationProblem> for ProblemSpec {
    fn from(p: CertificationProblem) -> Self {
        ProblemSpec {
            state_dim: p.state_dim,
            disturbance_dim: p.disturbance_dim,
            dynamics: p.dynamics,
            safe_set: p.safe_set,
            envelope: Some(p.envelope),
            disturbance: p.disturbance,
            horizon: p.horizon,
        }
    }
}

/// Whether `inner ⊆ outer`, decided by interval inclusion.
pub fn region_contains(outer: &Region, inner: &Region) -> bool {
    match (outer, inner) {
        (
            Region::Ball {
                center: c2,
                radius: r2,
            },
            Region::Ball {
                center: c1,
                radius: r1,
            },
        ) => {
            let d: f64 = c1
                .iter()
                .zip(c2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d + r1 <= *r2
        }
        _ => outer.classify(&inner.bounding_box()) == Overlap::Inside,
    }
}

impl ProblemSpec {
    fn check_shapes(&self) -> Result<()> {
        let n = self.state_dim;
        let q = self.disturbance_dim;
        if n == 0 {
            return Err(Error::input("state_dim must be at least 1"));
        }
        if self.dynamics.len() != n {
            return Err(Error::input(format!(
                "expected {n} dynamics polynomials, found {}",
                self.dynamics.len()
            )));
        }
        for (i, f) in self.dynamics.iter().enumerate() {
            if f.arity() != n + q {
                return Err(Error::input(format!(
                    "dynamics[{i}] has arity {}, expected state_dim + disturbance_dim = {}",
                    f.arity(),
                    n + q
                )));
            }
        }
        if self.disturbance.dim() != q {
            return Err(Error::input(format!(
                "disturbance model has {} coordinates, expected {q}",
                self.disturbance.dim()
            )));
        }
        self.disturbance.validate()?;
        self.safe_set.validate()?;
        if self.safe_set.dim() != n {
            return Err(Error::input("safe_set dimension differs from state_dim"));
        }
        if self.horizon == 0 {
            return Err(Error::input("horizon must be at least 1"));
        }
        Ok(())
    }

    /// Validates and fills a missing envelope from the interval image.
    pub fn into_problem(self) -> Result<CertificationProblem> {
        self.check_shapes()?;
        let envelope = match self.envelope {
            Some(e) => e,
            None => {
                let e = compute_reach_envelope(&self.dynamics, &self.safe_set, &self.disturbance)?;
                log::info!("envelope not given; using interval reach envelope {e:?}");
                e
            }
        };
        CertificationProblem::new(
            self.dynamics,
            self.safe_set,
            envelope,
            self.disturbance,
            self.horizon,
        )
    }
}

impl CertificationProblem {
    pub fn new(
        dynamics: Vec<Polynomial>,
        safe_set: Region,
        envelope: Region,
        disturbance: DisturbanceModel,
        horizon: u32,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            state_dim: dynamics.len(),
            disturbance_dim: disturbance.dim(),
            dynamics,
            safe_set,
            envelope: Some(envelope.clone()),
            disturbance,
            horizon,
        };
        spec.check_shapes()?;
        envelope.validate()?;
        if envelope.dim() != spec.state_dim {
            return Err(Error::input("envelope dimension differs from state_dim"));
        }
        if !region_contains(&envelope, &spec.safe_set) {
            return Err(Error::input("safe set is not contained in the envelope"));
        }
        Ok(CertificationProblem {
            state_dim: spec.state_dim,
            disturbance_dim: spec.disturbance_dim,
            dynamics: spec.dynamics,
            safe_set: spec.safe_set,
            envelope,
            disturbance: spec.disturbance,
            horizon: spec.horizon,
        })
    }

    /// Like [`CertificationProblem::new`] with the envelope computed.
    pub fn with_reach_envelope(
        dynamics: Vec<Polynomial>,
        safe_set: Region,
        disturbance: DisturbanceModel,
        horizon: u32,
    ) -> Result<Self> {
        let envelope = compute_reach_envelope(&dynamics, &safe_set, &disturbance)?;
        CertificationProblem::new(dynamics, safe_set, envelope, disturbance, horizon)
    }

    /// One step of the dynamics.
    pub fn step(&self, x: &[f64], d: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(x.len() + d.len());
        z.extend_from_slice(x);
        z.extend_from_slice(d);
        self.dynamics.iter().map(|f| f.eval_unchecked(&z)).collect()
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(self)
    }
}

/// Box enclosing the interval image of `f` over (bounding box of X) × supp(D),
/// unioned with the bounding box of `X`.
pub fn compute_reach_envelope(
    dynamics: &[Polynomial],
    safe_set: &Region,
    disturbance: &DisturbanceModel,
) -> Result<Region> {
    safe_set.validate()?;
    disturbance.validate()?;
    let mut bx = safe_set.bounding_box();
    let xb = bx.clone();
    bx.extend(disturbance.support().bounding_box());
    let mut lo = Vec::with_capacity(dynamics.len());
    let mut hi = Vec::with_capacity(dynamics.len());
    for (i, f) in dynamics.iter().enumerate() {
        let img = eval_interval(f, &bx)?;
        if !(img.lo.is_finite() && img.hi.is_finite()) {
            return Err(Error::input(format!(
                "dynamics[{i}] has an unbounded image"
            )));
        }
        let u = img.hull(&xb[i]);
        lo.push(u.lo);
        hi.push(u.hi);
    }
    Ok(Region::Box { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::DistSpec;

    fn no_noise() -> DisturbanceModel {
        DisturbanceModel::new(vec![DistSpec::Uniform { lo: 0.0, hi: 1e-9 }]).unwrap()
    }

    fn unit_box() -> Region {
        Region::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        }
    }

    #[test]
    fn identity_and_contraction_envelopes() {
        let id = vec![Polynomial::var(2, 0)];
        let e = compute_reach_envelope(&id, &unit_box(), &no_noise()).unwrap();
        assert_eq!(e, unit_box());
        let half = vec![Polynomial::var(2, 0).scale(0.5)];
        let e = compute_reach_envelope(&half, &unit_box(), &no_noise()).unwrap();
        assert_eq!(e, unit_box());
    }

    #[test]
    fn arity_mismatch_names_polynomial() {
        let spec = ProblemSpec {
            state_dim: 1,
            disturbance_dim: 1,
            dynamics: vec![Polynomial::var(1, 0)],
            safe_set: unit_box(),
            envelope: None,
            disturbance: no_noise(),
            horizon: 1,
        };
        let err = spec.into_problem().unwrap_err().to_string();
        assert!(err.contains("dynamics[0]"), "{err}");
    }

    #[test]
    fn envelope_must_contain_safe_set() {
        let small = Region::Box {
            lo: vec![-0.5],
            hi: vec![0.5],
        };
        let r = CertificationProblem::new(
            vec![Polynomial::var(2, 0)],
            unit_box(),
            small,
            no_noise(),
            1,
        );
        assert!(r.is_err());
    }
}
