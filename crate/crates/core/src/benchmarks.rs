//! Registry of the ten benchmark systems with recommended settings and
//! published reference values.
//!
//! Reference values come from a different synthesis backend (SOS
//! programming). They are carried as annotations for reports and are never
//! pass/fail targets.

use serde::{Deserialize, Serialize};

use crate::certify::CertKind;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::problem::CertificationProblem;
use crate::region::Region;
use crate::stochastics::{DistSpec, DisturbanceModel};

pub const NAMES: [&str; 10] = [
    "ex1-vanderpol",
    "ex2-lotka",
    "ex3-jet",
    "c1-arch4",
    "c2-vinc",
    "c3-bc4",
    "c4-stable3d",
    "c5-vdp3d",
    "c6-sank4d",
    "c7-lorenz6d",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Presets {
    pub rbf_degree: u32,
    pub rbf_epsilon: f64,
    pub sbf_degree: u32,
    pub sbf_tau: f64,
    pub sbf_ua: f64,
}

/// A published number together with the setting it was reported for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// Certificate family the number belongs to.
    pub family: CertKind,
    pub quantity: String,
    pub value: f64,
    pub setting: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub name: String,
    pub description: String,
    pub problem: CertificationProblem,
    pub presets: Presets,
    pub references: Vec<Reference>,
}

/// Builds a polynomial from `(exponent, coefficient)` pairs.
fn poly(terms: &[(&[u32], f64)]) -> Polynomial {
    let arity = terms[0].0.len();
    Polynomial::from_terms(arity, terms.iter().map(|(e, c)| (e.to_vec(), *c)))
        .expect("static benchmark terms")
}

fn disk(n: usize, radius: f64) -> Region {
    Region::ball(vec![0.0; n], radius).expect("static radius")
}

fn reference(quantity: &str, value: f64, setting: &str) -> Reference {
    // Volumes of {h > 0} are RBF numbers; J* and lambda* are SBF numbers.
    let family = if quantity == "V_Xs" {
        CertKind::Rbf
    } else {
        CertKind::Sbf
    };
    Reference {
        family,
        quantity: quantity.into(),
        value,
        setting: setting.into(),
    }
}

fn entry(
    name: &str,
    description: &str,
    dynamics: Vec<Polynomial>,
    safe_set: Region,
    disturbance: Vec<DistSpec>,
    presets: Presets,
    references: Vec<Reference>,
) -> BenchmarkEntry {
    let model = DisturbanceModel::new(disturbance).expect("static disturbance");
    let problem = CertificationProblem::with_reach_envelope(dynamics, safe_set, model, 1)
        .expect("static benchmark");
    BenchmarkEntry {
        name: name.into(),
        description: description.into(),
        problem,
        presets,
        references,
    }
}

fn presets(rbf_degree: u32, sbf_degree: u32, sbf_tau: f64, sbf_ua: f64) -> Presets {
    Presets {
        rbf_degree,
        rbf_epsilon: 0.1,
        sbf_degree,
        sbf_tau,
        sbf_ua,
    }
}

const TN_015: DistSpec = DistSpec::TruncatedNormal {
    mu: 0.0,
    sigma: 0.15,
    lo: -1.0,
    hi: 1.0,
};

fn half_uniform() -> DistSpec {
    DistSpec::Uniform { lo: -0.5, hi: 0.5 }
}

/// The 6-state cyclic Lorenz-96 step with step size 0.01; `d` enters `x1`.
fn lorenz6() -> Vec<Polynomial> {
    let n = 6;
    (0..n)
        .map(|i| {
            let e = |vars: &[usize]| {
                let mut v = vec![0u32; n + 1];
                for &k in vars {
                    v[k] += 1;
                }
                v
            };
            let (next, prev, prev2) = ((i + 1) % n, (i + n - 1) % n, (i + n - 2) % n);
            let mut p = Polynomial::zero(n + 1);
            p.add_term(e(&[i]), 0.99);
            p.add_term(e(&[next, prev]), 0.01);
            p.add_term(e(&[prev2, prev]), -0.01);
            if i == 0 {
                p.add_term(e(&[n]), 0.01);
            }
            p
        })
        .collect()
}

pub fn load_benchmark(name: &str) -> Result<BenchmarkEntry> {
    let e = match name {
        "ex1-vanderpol" => entry(
            name,
            "Van der Pol oscillator, step 0.1, multiplicative Beta noise",
            vec![
                poly(&[(&[1, 0, 0], 1.0), (&[0, 1, 0], 0.1), (&[1, 0, 1], 0.1)]),
                poly(&[
                    (&[0, 1, 0], 0.9),
                    (&[1, 0, 0], -0.1),
                    (&[3, 0, 0], 0.1 / 3.0),
                ]),
            ],
            disk(2, 1.0),
            vec![DistSpec::ScaledBeta {
                alpha: 20.0,
                beta: 20.0,
                lo: -0.6,
                hi: 0.6,
            }],
            Presets {
                rbf_degree: 4,
                rbf_epsilon: 0.2,
                sbf_degree: 8,
                sbf_tau: 0.01,
                sbf_ua: 8.0,
            },
            vec![
                reference("V_Xs", 0.7388, "RBF, degree 4, epsilon 0.2"),
                reference("V_Xs", 0.7283, "RBF, degree 6, epsilon 0.2"),
                reference("V_Xs", 0.7030, "RBF, degree 8, epsilon 0.2"),
                reference("V_Xs", 0.6911, "RBF, degree 4, epsilon 0.1"),
                reference("V_Xs", 0.4542, "robust-set baseline, degree 8"),
                reference("J*", 0.1651, "SBF, degree 8, U_a 8, tau 0.01"),
                reference("lambda*", 0.0107, "SBF, degree 8, U_a 8, tau 0.01"),
                reference("J*", 0.1552, "distribution-known baseline, degree 8"),
                reference("lambda*", 0.0007, "distribution-known baseline, degree 8"),
            ],
        ),
        "ex2-lotka" => entry(
            name,
            "Lotka-Volterra map with r = 0.5, a = 1, s = -0.5 + d (c = 1)",
            vec![
                poly(&[(&[1, 0, 0], 0.5), (&[1, 1, 0], -1.0)]),
                poly(&[(&[0, 1, 0], -0.5), (&[0, 1, 1], 1.0), (&[1, 1, 0], 1.0)]),
            ],
            disk(2, 1.0),
            vec![TN_015],
            Presets {
                rbf_degree: 6,
                rbf_epsilon: 0.1,
                sbf_degree: 6,
                sbf_tau: 0.02,
                sbf_ua: 8.0,
            },
            vec![
                reference("V_Xs", 0.0, "RBF, degree 4, epsilon 0.1"),
                reference("V_Xs", 0.7270, "RBF, degree 6, epsilon 0.1"),
                reference("V_Xs", 0.7430, "RBF, degree 8, epsilon 0.1"),
                reference("J*", 0.5277, "SBF, degree 6, U_a 8, tau 0.02"),
                reference("J*", 0.5077, "distribution-known baseline, degree 6"),
            ],
        ),
        "ex3-jet" => entry(
            name,
            "Moore-Greitzer jet engine, step 0.1, additive uniform noise",
            vec![
                poly(&[
                    (&[1, 0, 0], 1.0),
                    (&[0, 1, 0], -0.1),
                    (&[2, 0, 0], -0.15),
                    (&[3, 0, 0], -0.05),
                    (&[0, 0, 1], 0.1),
                ]),
                poly(&[(&[0, 1, 0], 0.9), (&[1, 0, 0], 0.3), (&[0, 0, 1], 0.1)]),
            ],
            disk(2, 0.8),
            vec![DistSpec::Uniform { lo: -1.5, hi: 1.5 }],
            Presets {
                rbf_degree: 4,
                rbf_epsilon: 0.1,
                sbf_degree: 10,
                sbf_tau: 0.01,
                sbf_ua: 30.0,
            },
            vec![
                reference("J*", 0.4819, "SBF, degree 10, U_a 30, tau 0.01"),
                reference("lambda*", 0.0479, "SBF, degree 10, U_a 30, tau 0.01"),
                reference("J*", 0.4719, "distribution-known baseline, degree 10"),
                reference("lambda*", 0.0379, "distribution-known baseline, degree 10"),
            ],
        ),
        "c1-arch4" => entry(
            name,
            "planar quadratic system, step 0.01, truncated normal noise",
            vec![
                poly(&[(&[1, 0, 0], 0.98), (&[2, 0, 0], 0.01), (&[0, 1, 0], 0.01)]),
                poly(&[
                    (&[0, 1, 0], 0.98),
                    (&[1, 0, 0], 0.01),
                    (&[0, 2, 0], 0.01),
                    (&[0, 0, 1], 0.01),
                ]),
            ],
            disk(2, 1.0),
            vec![TN_015],
            presets(4, 10, 0.01, 10.0),
            vec![
                reference("V_Xs", 0.8571, "RBF, degree 4, epsilon 0.1"),
                reference("J*", 0.2144, "SBF, degree 10, U_a 10, tau 0.01"),
                reference("J*", 0.2044, "distribution-known baseline, degree 10"),
            ],
        ),
        "c2-vinc" => entry(
            name,
            "planar cubic system, step 0.01, concentrated Beta(250, 250) noise",
            vec![
                poly(&[(&[1, 0, 0], 1.0), (&[0, 1, 0], 0.01), (&[1, 0, 1], -0.01)]),
                poly(&[(&[0, 1, 0], 0.99), (&[1, 0, 0], -0.01), (&[3, 0, 0], 0.01)]),
            ],
            disk(2, 0.8),
            vec![DistSpec::ScaledBeta {
                alpha: 250.0,
                beta: 250.0,
                lo: -2.0,
                hi: 2.0,
            }],
            presets(4, 10, 0.01, 10.0),
            vec![
                reference("V_Xs", 0.5286, "RBF, degree 4, epsilon 0.1"),
                reference("J*", 0.3798, "SBF, degree 10, U_a 10, tau 0.01"),
                reference("J*", 0.3698, "distribution-known baseline, degree 10"),
            ],
        ),
        "c3-bc4" => entry(
            name,
            "planar system with two multiplicative uniform noises, step 0.01",
            vec![
                poly(&[
                    (&[1, 0, 0, 0], 0.99),
                    (&[2, 1, 0, 0], 0.02),
                    (&[1, 0, 1, 0], 0.01),
                ]),
                poly(&[(&[0, 1, 0, 0], 0.99), (&[0, 1, 0, 1], 0.01)]),
            ],
            disk(2, 1.0),
            vec![half_uniform(), half_uniform()],
            presets(4, 10, 0.01, 10.0),
            vec![
                reference("V_Xs", 0.8521, "RBF, degree 4, epsilon 0.1"),
                reference("V_Xs", 0.8312, "robust-set baseline, degree 4"),
                reference("J*", 0.2351, "SBF, degree 10, U_a 10, tau 0.01"),
                reference("J*", 0.2251, "distribution-known baseline, degree 10"),
            ],
        ),
        "c4-stable3d" => entry(
            name,
            "3-state system, step 0.01, three additive uniform noises",
            vec![
                poly(&[
                    (&[1, 0, 0, 0, 0, 0], 0.99),
                    (&[0, 1, 0, 0, 0, 0], 0.01),
                    (&[0, 0, 1, 0, 0, 0], -0.01),
                    (&[0, 0, 0, 1, 0, 0], -0.01),
                ]),
                poly(&[
                    (&[0, 1, 0, 0, 0, 0], 0.99),
                    (&[1, 0, 1, 0, 0, 0], -0.01),
                    (&[1, 0, 0, 0, 0, 0], -0.01),
                    (&[0, 0, 0, 0, 1, 0], -0.01),
                ]),
                poly(&[
                    (&[0, 0, 1, 0, 0, 0], 1.0 - 0.01 * 4.7037),
                    (&[1, 0, 0, 0, 0, 0], 0.01 * 0.76524),
                    (&[0, 0, 0, 0, 0, 1], -0.01),
                ]),
            ],
            disk(3, 1.0),
            vec![half_uniform(), half_uniform(), half_uniform()],
            presets(4, 6, 0.01, 10.0),
            vec![
                reference("V_Xs", 0.8633, "RBF, degree 4, epsilon 0.1"),
                reference("V_Xs", 0.7856, "robust-set baseline, degree 4"),
                reference("J*", 0.3565, "SBF, degree 6, U_a 10, tau 0.01"),
                reference("J*", 0.3465, "distribution-known baseline, degree 6"),
            ],
        ),
        "c5-vdp3d" => entry(
            name,
            "3-state Van der Pol variant, step 0.01, additive uniform noise",
            vec![
                poly(&[(&[1, 0, 0, 0], 1.0), (&[0, 1, 0, 0], -0.02)]),
                poly(&[
                    (&[0, 1, 0, 0], 0.979),
                    (&[1, 0, 0, 0], 0.008),
                    (&[0, 0, 1, 0], 0.01),
                    (&[2, 1, 0, 0], 0.1),
                ]),
                poly(&[
                    (&[0, 0, 1, 0], 0.99),
                    (&[0, 0, 3, 0], 0.01),
                    (&[0, 0, 0, 1], 0.01),
                ]),
            ],
            disk(3, 1.0),
            vec![half_uniform()],
            presets(4, 6, 0.01, 10.0),
            vec![
                reference("V_Xs", 0.0, "RBF, degree 4, epsilon 0.1"),
                reference("J*", 0.1542, "SBF, degree 6, U_a 10, tau 0.01"),
                reference("J*", 0.1442, "distribution-known baseline, degree 6"),
            ],
        ),
        "c6-sank4d" => entry(
            name,
            "4-state polynomial system, step 0.01, additive uniform noise",
            vec![
                poly(&[
                    (&[1, 0, 0, 0, 0], 0.99),
                    (&[0, 3, 0, 0, 0], 0.01),
                    (&[0, 0, 1, 1, 0], -0.03),
                    (&[0, 0, 0, 0, 1], 0.01),
                ]),
                poly(&[
                    (&[0, 1, 0, 0, 0], 1.0),
                    (&[1, 0, 0, 0, 0], -0.01),
                    (&[0, 3, 0, 0, 0], -0.01),
                ]),
                poly(&[(&[0, 0, 1, 0, 0], 0.99), (&[1, 0, 0, 1, 0], 0.01)]),
                poly(&[
                    (&[0, 0, 0, 1, 0], 1.0),
                    (&[1, 0, 1, 0, 0], 0.01),
                    (&[0, 0, 0, 3, 0], -0.01),
                ]),
            ],
            disk(4, 1.0),
            vec![DistSpec::Uniform { lo: -1.0, hi: 1.0 }],
            presets(2, 4, 0.01, 15.0),
            vec![
                reference("V_Xs", 0.0, "RBF, degree 2, epsilon 0.1"),
                reference("J*", 0.3826, "SBF, degree 4, U_a 15, tau 0.01"),
                reference("J*", 0.3726, "distribution-known baseline, degree 4"),
            ],
        ),
        "c7-lorenz6d" => entry(
            name,
            "6-state Lorenz-96 model, step 0.01, truncated normal noise",
            lorenz6(),
            disk(6, 1.0),
            vec![DistSpec::TruncatedNormal {
                mu: 0.0,
                sigma: 0.5,
                lo: -3.0,
                hi: 3.0,
            }],
            presets(2, 4, 0.01, 5.0),
            vec![
                reference("V_Xs", 0.9692, "RBF, degree 2, epsilon 0.1"),
                reference("J*", 0.1374, "SBF, degree 4, U_a 5, tau 0.01"),
                reference("J*", 0.1274, "distribution-known baseline, degree 4"),
            ],
        ),
        _ => {
            return Err(Error::input(format!(
                "unknown benchmark '{name}'; valid names: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(e)
}
