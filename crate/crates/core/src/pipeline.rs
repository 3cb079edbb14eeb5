//! Run orchestration and artifact I/O.
//!
//! A run directory holds `problem.json`, `cert.json`, `report.json`,
//! `pac.json` (when a guarantee is issued), `validation.csv`, `contour.csv`
//! (2-D slices) and `summary.md`. Artifacts are written as soon as their
//! stage completes, so a failing stage leaves the earlier ones in place.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{load_benchmark, BenchmarkEntry};
use crate::bounds::{Route, SampleBudget};
use crate::certify::{
    rbf_budget, sbf_budget, synthesize_rbf, synthesize_sbf, BarrierTemplate, CertKind, CertStatus,
    Certificate, RbfSettings, SbfSettings, SynthesisConfig, SynthesisStats,
};
use crate::error::{Error, Result};
use crate::guarantees::{assemble_pac_statement, PacGuarantee, VerifiedCertificate};
use crate::interval::Interval;
use crate::problem::{CertificationProblem, ProblemSpec};
use crate::region::Domain;
use crate::rng::domain;
use crate::stochastics::{sample_chunk, MomentKind};
use crate::verify::{
    mc_safety_estimate, regenerate_evidence, verify_certificate, Verdict, VerificationReport,
    VerifySettings,
};

/// Reads JSON, reporting schema errors with a JSON pointer.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text)
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Error::Json {
            pointer,
            message: e.into_inner().to_string(),
        }
    })
}

/// RFC 6901 pointer for a deserializer path.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and validates a problem file. A missing envelope is computed.
pub fn load_problem(path: &Path) -> Result<CertificationProblem> {
    read_json::<ProblemSpec>(path)?.into_problem()
}

/// Problem from a file or the benchmark registry; exactly one must be given.
pub fn resolve_problem(
    problem: Option<&Path>,
    benchmark: Option<&str>,
) -> Result<(CertificationProblem, Option<BenchmarkEntry>)> {
    match (problem, benchmark) {
        (Some(p), None) => Ok((load_problem(p)?, None)),
        (None, Some(b)) => {
            let e = load_benchmark(b)?;
            Ok((e.problem.clone(), Some(e)))
        }
        (Some(_), Some(_)) => Err(Error::input(
            "give either a problem file or a benchmark, not both",
        )),
        (None, None) => Err(Error::input(
            "a problem file or a benchmark name is required",
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    /// Start states; drawn uniformly from the certified region.
    pub states: usize,
    pub trials: u64,
    pub confidence: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            states: 100,
            trials: 10_000,
            confidence: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: Option<PathBuf>,
    #[serde(default)]
    pub benchmark: Option<String>,
    /// `vc` or `scenario` give an RBF run, `rademacher` an SBF run.
    pub route: Route,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub ua: Option<f64>,
    #[serde(default)]
    pub degree: Option<u32>,
    /// Guarantee horizon `k`.
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    pub seed: u64,
    /// SBF only: empirical sample moments or the exact distribution.
    #[serde(default = "default_moments")]
    pub moments: MomentKind,
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    #[serde(default = "default_verify_budget")]
    pub verify_budget: usize,
    #[serde(default = "default_spot_checks")]
    pub spot_checks: usize,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default = "default_contour")]
    pub contour_resolution: usize,
    pub out_dir: PathBuf,
}

fn default_delta() -> f64 {
    1e-3
}
fn default_horizon() -> u32 {
    1
}
fn default_moments() -> MomentKind {
    MomentKind::Empirical
}
fn default_verify_budget() -> usize {
    VerifySettings::default().budget
}
fn default_spot_checks() -> usize {
    VerifySettings::default().spot_checks
}
fn default_contour() -> usize {
    101
}

impl RunConfig {
    pub fn new(route: Route, seed: u64, out_dir: PathBuf) -> Self {
        RunConfig {
            problem: None,
            benchmark: None,
            route,
            epsilon: None,
            delta: default_delta(),
            tau: None,
            gamma: None,
            ua: None,
            degree: None,
            horizon: default_horizon(),
            seed,
            moments: default_moments(),
            synthesis: SynthesisConfig::default(),
            verify_budget: default_verify_budget(),
            spot_checks: default_spot_checks(),
            mc: McSettings::default(),
            contour_resolution: default_contour(),
            out_dir,
        }
    }

    pub fn family(&self) -> CertKind {
        match self.route {
            Route::Rademacher => CertKind::Sbf,
            Route::Vc | Route::Scenario => CertKind::Rbf,
        }
    }

    /// Fills unset parameters from benchmark presets and checks that the
    /// route and its parameters agree. Runs before any computation.
    pub fn resolve(&self, entry: Option<&BenchmarkEntry>) -> Result<ResolvedParams> {
        let bad = |m: &str| Err(Error::input(m.to_string()));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.mc.confidence > 0.0 && self.mc.confidence < 1.0) {
            return bad("MC confidence must lie in (0, 1)");
        }
        let presets = entry.map(|e| &e.presets);
        let mut cfg = self.synthesis.clone();
        cfg.seed = self.seed;
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        cfg.validate()?;
        match self.family() {
            CertKind::Rbf => {
                if self.tau.is_some() {
                    return bad("tau applies to the rademacher route only");
                }
                if self.moments != MomentKind::Empirical {
                    return bad("exact moments apply to the rademacher route only");
                }
                let epsilon = match (self.epsilon, presets) {
                    (Some(e), _) => e,
                    (None, Some(p)) => p.rbf_epsilon,
                    (None, None) => return bad("the vc and scenario routes need --epsilon"),
                };
                if self.horizon > 1 && self.route == Route::Vc {
                    return bad(
                        "the vc route certifies one step only; use the scenario route for k > 1",
                    );
                }
                let degree = self
                    .degree
                    .or(presets.map(|p| p.rbf_degree))
                    .ok_or_else(|| Error::input("--degree is required"))?;
                Ok(ResolvedParams {
                    degree,
                    cfg,
                    rbf: Some(RbfSettings {
                        epsilon,
                        delta: self.delta,
                        route: self.route,
                        vc_dim: None,
                        ua: self.ua.unwrap_or(RbfSettings::default().ua),
                    }),
                    sbf: None,
                })
            }
            CertKind::Sbf => {
                if self.epsilon.is_some() {
                    return bad("epsilon applies to the vc and scenario routes");
                }
                if self.horizon > 1 {
                    return bad("SBF certificates are certified for one step only");
                }
                let tau = self
                    .tau
                    .or(presets.map(|p| p.sbf_tau))
                    .ok_or_else(|| Error::input("the rademacher route needs --tau"))?;
                let ua = self
                    .ua
                    .or(presets.map(|p| p.sbf_ua))
                    .ok_or_else(|| Error::input("the rademacher route needs --ua"))?;
                let degree = self
                    .degree
                    .or(presets.map(|p| p.sbf_degree))
                    .ok_or_else(|| Error::input("--degree is required"))?;
                Ok(ResolvedParams {
                    degree,
                    cfg,
                    rbf: None,
                    sbf: Some(SbfSettings {
                        ua,
                        tau,
                        delta: self.delta,
                        m: None,
                        radius: None,
                        moments: self.moments,
                    }),
                })
            }
        }
    }
}

/// Parameters after presets and validation.
#[derive(Clone, Debug)]
pub struct ResolvedParams {
    pub degree: u32,
    pub cfg: SynthesisConfig,
    pub rbf: Option<RbfSettings>,
    pub sbf: Option<SbfSettings>,
}

/// One validation row: Monte Carlo against the certified bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub x: Vec<f64>,
    pub certified_bound: f64,
    pub mc_estimate: f64,
    pub cp_lower: f64,
    pub cp_upper: f64,
    /// The Clopper-Pearson upper limit reaches the certified bound.
    pub pass: bool,
}

/// Uniform start states in `X` where the guarantee is nonvacuous: `h > 0`
/// for RBF statements, bound `> 0` for SBF statements.
pub fn validation_states(
    cert: &Certificate,
    pac: &PacGuarantee,
    problem: &CertificationProblem,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let h = cert.barrier();
    let mut out = Vec::with_capacity(count);
    let chunk = 1024;
    for c in 0..10_000u64 {
        for x in sample_chunk(&problem.safe_set, chunk, seed, domain::VALIDATION_STATES, c) {
            if pac.lower_bound_at(&h, &x) > 0.0 {
                out.push(x);
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
    }
    Err(Error::input(format!(
        "found only {} of {count} states with a nonvacuous bound",
        out.len()
    )))
}

/// Runs `trials` trajectories from each state. State `i` uses seed `seed + i`.
pub fn mc_validate(
    cert: &Certificate,
    pac: &PacGuarantee,
    problem: &CertificationProblem,
    states: &[Vec<f64>],
    trials: u64,
    confidence: f64,
    seed: u64,
) -> Result<Vec<ValidationRow>> {
    let h = cert.barrier();
    states
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let est = mc_safety_estimate(
                problem,
                x,
                pac.horizon,
                trials,
                seed.wrapping_add(i as u64),
                confidence,
            )?;
            let bound = pac.lower_bound_at(&h, x);
            Ok(ValidationRow {
                x: x.clone(),
                certified_bound: bound,
                mc_estimate: est.estimate,
                cp_lower: est.lower,
                cp_upper: est.upper,
                pass: est.upper >= bound,
            })
        })
        .collect()
}

pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let n = rows.first().map_or(0, |r| r.x.len());
    let mut s = String::new();
    for i in 1..=n {
        let _ = write!(s, "x{i},");
    }
    s.push_str("certified_bound,mc_estimate,cp_lower,cp_upper,pass\n");
    for r in rows {
        for v in &r.x {
            let _ = write!(s, "{v},");
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.certified_bound, r.mc_estimate, r.cp_lower, r.cp_upper, r.pass
        );
    }
    s
}

/// Two plotted axes; the other coordinates are held at `fixed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSlice {
    pub axes: [usize; 2],
    /// Full state vector; entries on `axes` are ignored.
    pub fixed: Vec<f64>,
}

/// Grid of barrier values over `bbox` (a box in the plotted axes), with
/// `resolution` nodes per axis. SBF rows carry the one-step bound
/// `max(0, 1 - lambda - h)`, RBF rows the indicator of `h > 0`.
pub fn emit_contour_grid(
    cert: &Certificate,
    bbox: &[Interval; 2],
    resolution: usize,
    slice: Option<&ContourSlice>,
) -> Result<String> {
    let n = cert.state_dim;
    let (axes, base) = match slice {
        Some(s) => {
            if s.fixed.len() != n || s.axes[0] == s.axes[1] || s.axes.iter().any(|&a| a >= n) {
                return Err(Error::input(
                    "contour slice does not match the state dimension",
                ));
            }
            (s.axes, s.fixed.clone())
        }
        None if n == 2 => ([0, 1], vec![0.0; 2]),
        None => {
            return Err(Error::input(
                "contours of a state space above 2-D need a slice",
            ))
        }
    };
    if resolution < 2 {
        return Err(Error::input("contour resolution must be at least 2"));
    }
    let h = cert.barrier();
    let lambda = match cert.kind {
        CertKind::Sbf => Some(
            cert.lambda
                .ok_or_else(|| Error::input("SBF certificate carries no lambda"))?,
        ),
        CertKind::Rbf => None,
    };
    let mut s = String::from(match lambda {
        Some(_) => "x,y,h,certified_bound\n",
        None => "x,y,h,in_xs\n",
    });
    let mut x = base;
    let node =
        |iv: &Interval, i: usize| iv.lo + (iv.hi - iv.lo) * i as f64 / (resolution - 1) as f64;
    for i in 0..resolution {
        for j in 0..resolution {
            x[axes[0]] = node(&bbox[0], i);
            x[axes[1]] = node(&bbox[1], j);
            let hv = h.eval_unchecked(&x);
            let _ = match lambda {
                Some(l) => writeln!(
                    s,
                    "{},{},{hv},{}",
                    x[axes[0]],
                    x[axes[1]],
                    crate::guarantees::kushner_bound(l, hv, 1)
                ),
                None => writeln!(
                    s,
                    "{},{},{hv},{}",
                    x[axes[0]],
                    x[axes[1]],
                    u8::from(hv > 0.0)
                ),
            };
        }
    }
    Ok(s)
}

/// Everything `report.json` records about a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub benchmark: Option<String>,
    pub budget: SampleBudget,
    pub synthesis: SynthesisStats,
    pub verification: VerificationReport,
    pub certificate_id: String,
    /// Fraction of `X` (by uniform sampling) where `h > 0`.
    pub xs_volume_fraction: f64,
    pub guarantee_issued: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSummary>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub states: usize,
    pub passed: usize,
    pub trials: u64,
    pub confidence: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Guaranteed,
    /// Verified, but no statement is licensed (empty `X_s`).
    Rejected,
    Falsified,
    /// The verification budget ran out.
    Unknown,
}

impl RunOutcome {
    pub fn exit_code(self) -> i32 {
        match self {
            RunOutcome::Guaranteed => 0,
            RunOutcome::Rejected | RunOutcome::Falsified => 3,
            RunOutcome::Unknown => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub certificate: Certificate,
    pub guarantee: Option<PacGuarantee>,
    pub report: RunReport,
}

/// Outcome implied by a verification report.
pub fn verification_outcome(report: &VerificationReport) -> RunOutcome {
    if report
        .conditions
        .iter()
        .any(|c| matches!(c.verdict, Verdict::Falsified { .. }))
    {
        RunOutcome::Falsified
    } else if report.status == CertStatus::Verified {
        RunOutcome::Guaranteed
    } else {
        RunOutcome::Unknown
    }
}

/// sample size, synthesis, verification, guarantee, MC validation.
pub fn run_pipeline(config: &RunConfig) -> Result<RunResult> {
    let (problem, entry) = resolve_problem(config.problem.as_deref(), config.benchmark.as_deref())?;
    let params = config.resolve(entry.as_ref())?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write_json(
        &dir.join("problem.json"),
        &ProblemSpec::from(problem.clone()),
    )?;

    let template = BarrierTemplate::new(problem.state_dim, params.degree)?;
    let (cert, stats) = match (&params.rbf, &params.sbf) {
        (Some(rbf), _) => {
            rbf_budget(&template, rbf).map_err(|e| e.in_stage("sample-size"))?;
            synthesize_rbf(&problem, &template, rbf, &params.cfg)
        }
        (_, Some(sbf)) => {
            sbf_budget(&problem, &template, sbf, config.seed)
                .map_err(|e| e.in_stage("sample-size"))?;
            synthesize_sbf(&problem, &template, sbf, &params.cfg)
        }
        _ => unreachable!("resolve picks one family"),
    }
    .map_err(|e| e.in_stage("synthesis"))?;
    write_json(&dir.join("cert.json"), &cert)?;
    let budget = cert
        .budget
        .clone()
        .unwrap_or_else(|| exact_moment_budget(config.delta));

    let evidence = regenerate_evidence(&cert, &problem).map_err(|e| e.in_stage("verification"))?;
    let settings = VerifySettings {
        tol: 0.0,
        budget: config.verify_budget,
        spot_checks: config.spot_checks,
        seed: config.seed,
    };
    let (cert, verification) = verify_certificate(&cert, &problem, &evidence.borrow(), &settings)
        .map_err(|e| e.in_stage("verification"))?;
    write_json(&dir.join("cert.json"), &cert)?;

    let mut outcome = verification_outcome(&verification);
    let mut refusal = None;
    let mut guarantee = None;
    if outcome == RunOutcome::Guaranteed {
        let verified = VerifiedCertificate::try_from(cert.clone())?;
        match assemble_pac_statement(&verified, config.horizon) {
            Ok(g) => {
                write_json(&dir.join("pac.json"), &g)?;
                guarantee = Some(g);
            }
            Err(Error::Refused(msg)) => {
                outcome = RunOutcome::Rejected;
                refusal = Some(msg);
            }
            Err(e) => return Err(e.in_stage("guarantee")),
        }
    }

    let volume =
        crate::verify::estimate_safe_region_volume(&cert, &problem.safe_set, 100_000, config.seed);
    let mut validation = None;
    if let Some(g) = &guarantee {
        let states = validation_states(&cert, g, &problem, config.mc.states, config.seed)
            .map_err(|e| e.in_stage("validation"))?;
        let rows = mc_validate(
            &cert,
            g,
            &problem,
            &states,
            config.mc.trials,
            config.mc.confidence,
            config.seed,
        )
        .map_err(|e| e.in_stage("validation"))?;
        write_text(&dir.join("validation.csv"), &validation_csv(&rows))?;
        validation = Some(ValidationSummary {
            states: rows.len(),
            passed: rows.iter().filter(|r| r.pass).count(),
            trials: config.mc.trials,
            confidence: config.mc.confidence,
        });
    }

    let bb = problem.safe_set.bounding_box();
    let slice = ContourSlice {
        axes: [0, 1],
        fixed: bb.iter().map(|i| 0.5 * (i.lo + i.hi)).collect(),
    };
    let contour = emit_contour_grid(
        &cert,
        &[bb[0], bb[1]],
        config.contour_resolution,
        Some(&slice),
    )?;
    write_text(&dir.join("contour.csv"), &contour)?;

    let report = RunReport {
        benchmark: config.benchmark.clone(),
        budget,
        synthesis: stats,
        verification,
        certificate_id: cert.fingerprint(),
        xs_volume_fraction: volume,
        guarantee_issued: guarantee.is_some(),
        refusal,
        validation,
    };
    write_json(&dir.join("report.json"), &report)?;
    write_text(
        &dir.join("summary.md"),
        &summary_table(entry.as_ref(), &cert, &report, outcome),
    )?;
    Ok(RunResult {
        outcome,
        certificate: cert,
        guarantee,
        report,
    })
}

fn exact_moment_budget(delta: f64) -> SampleBudget {
    SampleBudget {
        route: Route::Rademacher,
        m: 0,
        bound: 0.0,
        epsilon: None,
        delta,
        vc_dim: None,
        num_params: None,
        ua: None,
        tau: None,
        radius: None,
    }
}

/// Markdown summary. Reference values come from a different (SDP) backend
/// and are listed for orientation only.
pub fn summary_table(
    entry: Option<&BenchmarkEntry>,
    cert: &Certificate,
    report: &RunReport,
    outcome: RunOutcome,
) -> String {
    let mut s = String::new();
    let name = entry.map_or("custom problem", |e| e.name.as_str());
    let _ = writeln!(s, "# {name}\n");
    let _ = writeln!(
        s,
        "outcome: {outcome:?}, samples M = {}, degree {}\n",
        report.budget.m, cert.degree
    );
    s.push_str(
        "| quantity | this run (LP backend) | reference (SDP backend) | reference setting |\n",
    );
    s.push_str("|---|---|---|---|\n");
    let ours: Vec<(&str, f64)> = match cert.kind {
        CertKind::Rbf => vec![("V_Xs", report.xs_volume_fraction)],
        CertKind::Sbf => vec![
            ("J*", cert.objective),
            ("lambda*", cert.lambda.unwrap_or(f64::NAN)),
        ],
    };
    for (q, v) in &ours {
        let _ = writeln!(s, "| {q} | {v:.4} | - | - |");
    }
    for r in entry.map(|e| e.references.as_slice()).unwrap_or(&[]) {
        if r.family != cert.kind {
            continue;
        }
        let _ = writeln!(s, "| {} | - | {:.4} | {} |", r.quantity, r.value, r.setting);
    }
    if let Some(v) = &report.validation {
        let _ = writeln!(
            s,
            "\nMonte Carlo: {}/{} states with CP upper limit at or above the certified bound ({} trials, confidence {}).",
            v.passed, v.states, v.trials, v.confidence
        );
    }
    if let Some(r) = &report.refusal {
        let _ = writeln!(s, "\nno guarantee issued: {r}");
    }
    s
}
