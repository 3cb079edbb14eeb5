// Stochastic barrier synthesis from sample moments and the resulting
// one-step bound `1 - lambda - h(x)`.
//
// `cargo run --example sbf_scalar`

use pac_barrier::certify::{synthesize_sbf, BarrierTemplate, SbfSettings, SynthesisConfig};
use pac_barrier::guarantees::{assemble_pac_statement, VerifiedCertificate};
use pac_barrier::poly::Polynomial;
use pac_barrier::problem::CertificationProblem;
use pac_barrier::region::Region;
use pac_barrier::stochastics::{DistSpec, DisturbanceModel};
use pac_barrier::verify::{regenerate_evidence, verify_certificate, VerifySettings};

/// Returns `(lambda*, bound at x = 0)`.
pub fn run_example() -> pac_barrier::Result<(f64, f64)> {
    let f = &Polynomial::var(2, 0).scale(0.5) + &Polynomial::var(2, 1).scale(0.2);
    let problem = CertificationProblem::with_reach_envelope(
        vec![f],
        Region::boxed(vec![-1.0], vec![1.0])?,
        DisturbanceModel::new(vec![DistSpec::Uniform { lo: -1.0, hi: 1.0 }])?,
        1,
    )?;
    let template = BarrierTemplate::new(1, 4)?;
    let settings = SbfSettings {
        ua: 2.0,
        tau: 0.1,
        ..SbfSettings::default()
    };
    let (cert, _) = synthesize_sbf(&problem, &template, &settings, &SynthesisConfig::default())?;
    let evidence = regenerate_evidence(&cert, &problem)?;
    let (cert, report) = verify_certificate(
        &cert,
        &problem,
        &evidence.borrow(),
        &VerifySettings::default(),
    )?;
    println!(
        "M = {}, lambda* = {:.4}, {:?}",
        cert.m,
        cert.lambda.unwrap_or(f64::NAN),
        report.status
    );
    let h = cert.barrier();
    let pac = assemble_pac_statement(&VerifiedCertificate::try_from(cert.clone())?, 1)?;
    let at0 = pac.lower_bound_at(&h, &[0.0]);
    println!(
        "one-step safety at x = 0 is at least {at0:.4} with confidence {}",
        pac.confidence
    );
    Ok((cert.lambda.unwrap_or(f64::NAN), at0))
}

fn main() {
    run_example().expect("SBF example");
}
