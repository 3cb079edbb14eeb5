// Robust barrier synthesis on a scalar contraction with additive noise,
// followed by verification and the scenario guarantee.
//
// `cargo run --example rbf_scalar`

use pac_barrier::certify::{synthesize_rbf, BarrierTemplate, RbfSettings, SynthesisConfig};
use pac_barrier::guarantees::{assemble_pac_statement, PacGuarantee, VerifiedCertificate};
use pac_barrier::poly::Polynomial;
use pac_barrier::problem::CertificationProblem;
use pac_barrier::region::Region;
use pac_barrier::stochastics::{DistSpec, DisturbanceModel};
use pac_barrier::verify::{regenerate_evidence, verify_certificate, VerifySettings};

pub fn run_example() -> pac_barrier::Result<PacGuarantee> {
    // x+ = 0.5 x + 0.05 d, d ~ U(-1, 1), safe set [-1, 1].
    let f = &Polynomial::var(2, 0).scale(0.5) + &Polynomial::var(2, 1).scale(0.05);
    let problem = CertificationProblem::with_reach_envelope(
        vec![f],
        Region::boxed(vec![-1.0], vec![1.0])?,
        DisturbanceModel::new(vec![DistSpec::Uniform { lo: -1.0, hi: 1.0 }])?,
        1,
    )?;
    let template = BarrierTemplate::new(1, 2)?;
    let settings = RbfSettings {
        epsilon: 0.1,
        delta: 1e-3,
        ..RbfSettings::default()
    };
    let cfg = SynthesisConfig {
        seed: 1,
        ..SynthesisConfig::default()
    };
    let (cert, stats) = synthesize_rbf(&problem, &template, &settings, &cfg)?;
    println!(
        "M = {}, {} LP rows, X_s nonempty: {:?}",
        cert.m, stats.lp_rows, cert.xs_nonempty
    );
    let evidence = regenerate_evidence(&cert, &problem)?;
    let (cert, report) = verify_certificate(
        &cert,
        &problem,
        &evidence.borrow(),
        &VerifySettings::default(),
    )?;
    println!(
        "verification: {:?} after {} boxes",
        report.status, report.boxes
    );
    let pac = assemble_pac_statement(&VerifiedCertificate::try_from(cert)?, 3)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&pac).expect("serializes")
    );
    Ok(pac)
}

fn main() {
    run_example().expect("RBF example");
}
