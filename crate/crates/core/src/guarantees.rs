//! Probabilistic safety statements issued from verified certificates.
//!
//! Only a [`VerifiedCertificate`] can produce a [`PacGuarantee`]; the newtype
//! is the single gate, so candidate or falsified certificates never reach
//! this module's outputs.

use serde::{Deserialize, Serialize};

use crate::bounds::Route;
use crate::certify::{CertKind, CertStatus, Certificate};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::region::{Domain, Region};

/// A certificate whose barrier conditions passed interval verification.
#[derive(Clone, Debug)]
pub struct VerifiedCertificate(Certificate);

impl TryFrom<Certificate> for VerifiedCertificate {
    type Error = Error;

    fn try_from(cert: Certificate) -> Result<Self> {
        match cert.status {
            CertStatus::Verified => Ok(VerifiedCertificate(cert)),
            other => Err(Error::Refused(format!(
                "certificate status is {other:?}; guarantees need a verified certificate"
            ))),
        }
    }
}

impl VerifiedCertificate {
    pub fn certificate(&self) -> &Certificate {
        &self.0
    }

    pub fn into_inner(self) -> Certificate {
        self.0
    }
}

impl std::ops::Deref for VerifiedCertificate {
    type Target = Certificate;

    fn deref(&self) -> &Certificate {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "VC-pointwise-1step")]
    VcPointwise1Step,
    #[serde(rename = "Scenario-uniform-1step")]
    ScenarioUniform1Step,
    #[serde(rename = "Scenario-uniform-kstep")]
    ScenarioUniformKStep,
    #[serde(rename = "SBF-pointwise-1step")]
    SbfPointwise1Step,
}

/// Shape of the lower bound on the safety probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PacBound {
    /// `value` for every state with `h > 0`.
    Uniform { value: f64 },
    /// SBF: `max(0, 1 - k lambda - h(x))`. RBF/VC: `1 - epsilon` where
    /// `h(x) > 0` and 0 elsewhere.
    Pointwise {
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        coeffs: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacGuarantee {
    pub theorem: Theorem,
    /// Probability over the disturbance sample draw that the bound holds.
    pub confidence: f64,
    pub horizon: u32,
    pub bound: PacBound,
    pub certificate_id: String,
}

impl PacGuarantee {
    /// Certified lower bound on the `horizon`-step safety probability at
    /// `x`, given the certificate's barrier polynomial. Always in `[0, 1]`.
    pub fn lower_bound_at(&self, barrier: &Polynomial, x: &[f64]) -> f64 {
        let h = barrier.eval_unchecked(x);
        match &self.bound {
            PacBound::Uniform { value } => {
                if h > 0.0 {
                    *value
                } else {
                    0.0
                }
            }
            PacBound::Pointwise {
                lambda: Some(l), ..
            } => kushner_bound(*l, h, self.horizon),
            PacBound::Pointwise { epsilon, .. } => {
                let eps = if h > 0.0 { epsilon.unwrap_or(1.0) } else { 1.0 };
                1.0 - eps
            }
        }
    }

    /// Whether the bound is 0 at `x`.
    pub fn is_vacuous_at(&self, barrier: &Polynomial, x: &[f64]) -> bool {
        self.lower_bound_at(barrier, x) <= 0.0
    }
}

/// One-step violation level at `x` for an RBF certificate: `epsilon` inside
/// `X_s = {h > 0}` and 1 elsewhere in `X`.
pub fn pointwise_epsilon(
    cert: &VerifiedCertificate,
    safe_set: &Region,
    x: &[f64],
    epsilon: f64,
) -> Result<f64> {
    if cert.kind != CertKind::Rbf {
        return Err(Error::input(
            "pointwise epsilon is defined for RBF certificates",
        ));
    }
    if x.len() != cert.state_dim {
        return Err(Error::Arity {
            expected: cert.state_dim,
            got: x.len(),
        });
    }
    if !safe_set.contains(x) {
        return Err(Error::input(format!(
            "state {x:?} lies outside the safe set"
        )));
    }
    Ok(epsilon_at(cert.barrier().eval_unchecked(x), epsilon))
}

fn epsilon_at(h: f64, epsilon: f64) -> f64 {
    if h > 0.0 {
        epsilon
    } else {
        1.0
    }
}

/// `(1 - epsilon)^k`.
pub fn multistep_bound(epsilon: f64, k: u32) -> f64 {
    (1.0 - epsilon.clamp(0.0, 1.0)).powi(k as i32)
}

/// Finite-horizon safety lower bound `1 - k lambda - h`, clamped to `[0, 1]`.
pub fn kushner_bound(lambda: f64, h_at_x: f64, k: u32) -> f64 {
    (1.0 - k as f64 * lambda - h_at_x).clamp(0.0, 1.0)
}

/// Builds the statement the certificate's route licenses for horizon `k`.
///
/// Multi-step composition is only granted on the scenario route; VC and SBF
/// certificates are refused for `k > 1` rather than weakened.
pub fn assemble_pac_statement(cert: &VerifiedCertificate, k: u32) -> Result<PacGuarantee> {
    if k == 0 {
        return Err(Error::input("horizon must be at least 1"));
    }
    let route = cert.budget.as_ref().map(|b| b.route);
    let certificate_id = cert.fingerprint();
    match cert.kind {
        CertKind::Rbf => {
            if cert.xs_nonempty != Some(true) {
                return Err(Error::Refused(
                    "the certified set {h > 0} is empty; the certificate is rejected".into(),
                ));
            }
            let budget = cert
                .budget
                .as_ref()
                .ok_or_else(|| Error::input("RBF certificate carries no sample budget"))?;
            let epsilon = budget
                .epsilon
                .ok_or_else(|| Error::input("RBF sample budget carries no epsilon"))?;
            let confidence = 1.0 - cert.delta;
            match route {
                Some(Route::Scenario) => Ok(PacGuarantee {
                    theorem: if k == 1 {
                        Theorem::ScenarioUniform1Step
                    } else {
                        Theorem::ScenarioUniformKStep
                    },
                    confidence,
                    horizon: k,
                    bound: PacBound::Uniform {
                        value: multistep_bound(epsilon, k),
                    },
                    certificate_id,
                }),
                Some(Route::Vc) if k == 1 => Ok(PacGuarantee {
                    theorem: Theorem::VcPointwise1Step,
                    confidence,
                    horizon: 1,
                    bound: PacBound::Pointwise {
                        lambda: None,
                        epsilon: Some(epsilon),
                        coeffs: cert.coeffs.clone(),
                    },
                    certificate_id,
                }),
                Some(Route::Vc) => Err(Error::Refused(format!(
                    "the VC route certifies one step only; horizon {k} is not licensed"
                ))),
                _ => Err(Error::input(
                    "RBF certificates use the vc or scenario route",
                )),
            }
        }
        CertKind::Sbf => {
            if k > 1 {
                return Err(Error::Refused(format!(
                    "SBF certificates are certified for one step only; horizon {k} is not licensed"
                )));
            }
            let lambda = cert
                .lambda
                .ok_or_else(|| Error::input("SBF certificate carries no lambda"))?;
            // Exact moments leave nothing to chance in the draw.
            let confidence = if cert.m == 0 { 1.0 } else { 1.0 - cert.delta };
            Ok(PacGuarantee {
                theorem: Theorem::SbfPointwise1Step,
                confidence,
                horizon: 1,
                bound: PacBound::Pointwise {
                    lambda: Some(lambda),
                    epsilon: None,
                    coeffs: cert.coeffs.clone(),
                },
                certificate_id,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multistep_examples() {
        assert!((multistep_bound(0.01, 5) - 0.9509).abs() < 1e-4);
        assert!((multistep_bound(0.05, 3) - 0.857).abs() < 1e-3);
        assert_eq!(multistep_bound(0.0, 17), 1.0);
    }

    #[test]
    fn kushner_examples() {
        assert_eq!(kushner_bound(0.0, 0.0, 9), 1.0);
        assert!((kushner_bound(0.0479, 0.4, 1) - 0.5521).abs() < 1e-12);
        assert_eq!(kushner_bound(0.5, 0.8, 2), 0.0);
    }

    #[test]
    fn epsilon_branches() {
        assert_eq!(epsilon_at(0.3, 0.1), 0.1);
        assert_eq!(epsilon_at(-0.2, 0.1), 1.0);
        assert_eq!(epsilon_at(0.0, 0.1), 1.0);
    }
}
