use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pac_barrier::benchmarks::{load_benchmark, NAMES};
use pac_barrier::bounds::{rademacher_sample_size, scenario_sample_size, vc_sample_size, Route};
use pac_barrier::certify::{
    synthesize_rbf, synthesize_sbf, BarrierTemplate, CertStatus, Certificate, RbfSettings,
    SbfSettings, SynthesisConfig,
};
use pac_barrier::guarantees::{assemble_pac_statement, PacGuarantee, VerifiedCertificate};
use pac_barrier::pipeline::{
    mc_validate, read_json, resolve_problem, run_pipeline, validation_csv, validation_states,
    verification_outcome, write_json, write_text, RunConfig, RunOutcome,
};
use pac_barrier::stochastics::MomentKind;
use pac_barrier::verify::{regenerate_evidence, verify_certificate, VerifySettings};
use pac_barrier::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pac-barrier",
    version,
    about = "PAC barrier certificates for polynomial stochastic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Registered benchmark name (see bench-list).
    #[arg(long)]
    benchmark: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RbfRoute {
    Vc,
    Scenario,
}

#[derive(Clone, Copy, ValueEnum)]
enum Moments {
    Empirical,
    Exact,
}

impl From<Moments> for MomentKind {
    fn from(m: Moments) -> Self {
        match m {
            Moments::Empirical => MomentKind::Empirical,
            Moments::Exact => MomentKind::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StateSource {
    Sampled,
    File,
}

#[derive(Subcommand)]
enum Command {
    /// Print the sample budget of a PAC route as JSON.
    SampleSize {
        #[arg(long)]
        route: Route,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        vc_dim: Option<u64>,
        #[arg(long)]
        num_params: Option<u64>,
        #[arg(long)]
        ua: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Synthesize a robust barrier candidate from disturbance samples.
    SynthRbf {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value = "scenario")]
        route: RbfRoute,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a stochastic barrier candidate from sample moments.
    SynthSbf {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        ua: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long)]
        degree: u32,
        #[arg(long, value_enum, default_value = "empirical")]
        moments: Moments,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a certificate over the continuous state space.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = VerifySettings::default().budget)]
        budget: usize,
        /// Where to write the certificate with its updated status.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the verification report; stdout otherwise.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare certified bounds with Monte Carlo estimates.
    McValidate {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value = "sampled")]
        states: StateSource,
        /// JSON array of start states, with `--states file`.
        #[arg(long)]
        states_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        horizon: u32,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Issue the PAC statement a verified certificate licenses.
    Guarantee {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 1)]
        horizon: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write a run directory.
    Run {
        /// JSON run configuration; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        route: Option<Route>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        ua: Option<f64>,
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long, value_enum)]
        moments: Option<Moments>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List registered benchmarks.
    BenchList,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(t) = std::env::var("THREADS").ok().filter(|s| !s.is_empty()) {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("thread pool is configured once");
            }
            _ => {
                eprintln!("error: THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.root() {
                Error::Input(_) | Error::Arity { .. } | Error::Json { .. } | Error::Io { .. } => 2,
                Error::Refused(_) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("outputs serialize")
    );
}

fn load_verified(path: &Path) -> Result<VerifiedCertificate> {
    VerifiedCertificate::try_from(read_json::<Certificate>(path)?)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::SampleSize {
            route,
            epsilon,
            delta,
            vc_dim,
            num_params,
            ua,
            tau,
            radius,
        } => {
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| Error::input(format!("route {route:?} needs --{name}")))
            };
            let budget = match route {
                Route::Vc => vc_sample_size(
                    need(epsilon, "epsilon")?,
                    delta,
                    vc_dim.ok_or_else(|| Error::input("the vc route needs --vc-dim"))?,
                )?,
                Route::Scenario => scenario_sample_size(
                    need(epsilon, "epsilon")?,
                    delta,
                    num_params
                        .ok_or_else(|| Error::input("the scenario route needs --num-params"))?,
                )?,
                Route::Rademacher => rademacher_sample_size(
                    need(ua, "ua")?,
                    need(tau, "tau")?,
                    delta,
                    need(radius, "radius")?,
                )?,
            };
            print_json(&budget);
            Ok(0)
        }
        Command::SynthRbf {
            problem,
            route,
            epsilon,
            delta,
            degree,
            gamma,
            seed,
            out,
        } => {
            let (p, _) = resolve_problem(problem.problem.as_deref(), problem.benchmark.as_deref())?;
            let template = BarrierTemplate::new(p.state_dim, degree)?;
            let settings = RbfSettings {
                epsilon,
                delta,
                route: match route {
                    RbfRoute::Vc => Route::Vc,
                    RbfRoute::Scenario => Route::Scenario,
                },
                ..RbfSettings::default()
            };
            let mut cfg = SynthesisConfig {
                seed,
                ..SynthesisConfig::default()
            };
            if let Some(g) = gamma {
                cfg.gamma = g;
            }
            let (cert, stats) = synthesize_rbf(&p, &template, &settings, &cfg)?;
            write_json(&out, &cert)?;
            print_json(&stats);
            Ok(if cert.xs_nonempty == Some(true) { 0 } else { 3 })
        }
        Command::SynthSbf {
            problem,
            tau,
            ua,
            delta,
            degree,
            moments,
            seed,
            out,
        } => {
            let (p, _) = resolve_problem(problem.problem.as_deref(), problem.benchmark.as_deref())?;
            let template = BarrierTemplate::new(p.state_dim, degree)?;
            let settings = SbfSettings {
                ua,
                tau,
                delta,
                moments: moments.into(),
                ..SbfSettings::default()
            };
            let cfg = SynthesisConfig {
                seed,
                ..SynthesisConfig::default()
            };
            let (cert, stats) = synthesize_sbf(&p, &template, &settings, &cfg)?;
            write_json(&out, &cert)?;
            print_json(&stats);
            Ok(0)
        }
        Command::Verify {
            cert,
            problem,
            budget,
            out,
            report,
        } => {
            let (p, _) = resolve_problem(problem.problem.as_deref(), problem.benchmark.as_deref())?;
            let c: Certificate = read_json(&cert)?;
            let evidence = regenerate_evidence(&c, &p)?;
            let settings = VerifySettings {
                budget,
                seed: c.seed,
                ..VerifySettings::default()
            };
            let (c, rep) = verify_certificate(&c, &p, &evidence.borrow(), &settings)?;
            if let Some(path) = out {
                write_json(&path, &c)?;
            }
            match report {
                Some(path) => write_json(&path, &rep)?,
                None => print_json(&rep),
            }
            Ok(verification_outcome(&rep).exit_code())
        }
        Command::McValidate {
            cert,
            problem,
            states,
            states_file,
            count,
            trials,
            horizon,
            confidence,
            seed,
            out,
        } => {
            let (p, _) = resolve_problem(problem.problem.as_deref(), problem.benchmark.as_deref())?;
            let verified = load_verified(&cert)?;
            verified.check_against(&p)?;
            let pac = assemble_pac_statement(&verified, horizon)?;
            let xs = match (states, states_file) {
                (StateSource::Sampled, None) => {
                    validation_states(&verified, &pac, &p, count, seed)?
                }
                (StateSource::File, Some(f)) => read_json::<Vec<Vec<f64>>>(&f)?,
                (StateSource::Sampled, Some(_)) => {
                    return Err(Error::input("--states-file needs --states file"))
                }
                (StateSource::File, None) => {
                    return Err(Error::input("--states file needs --states-file"))
                }
            };
            let rows = mc_validate(&verified, &pac, &p, &xs, trials, confidence, seed)?;
            write_text(&out, &validation_csv(&rows))?;
            let passed = rows.iter().filter(|r| r.pass).count();
            println!("{passed}/{} states passed", rows.len());
            Ok(0)
        }
        Command::Guarantee { cert, horizon, out } => {
            let verified = load_verified(&cert)?;
            let pac: PacGuarantee = assemble_pac_statement(&verified, horizon)?;
            write_json(&out, &pac)?;
            print_json(&pac);
            Ok(0)
        }
        Command::Run {
            config,
            problem,
            route,
            epsilon,
            delta,
            tau,
            gamma,
            ua,
            degree,
            horizon,
            moments,
            seed,
            out_dir,
        } => {
            let mut cfg = match &config {
                Some(path) => read_json::<RunConfig>(path)?,
                None => {
                    let seed = seed.ok_or_else(|| Error::input("--seed is required"))?;
                    let out_dir = out_dir.clone().unwrap_or_else(|| {
                        PathBuf::from(format!(
                            "run-{}",
                            problem.benchmark.as_deref().unwrap_or("problem")
                        ))
                    });
                    RunConfig::new(route.unwrap_or(Route::Scenario), seed, out_dir)
                }
            };
            if problem.problem.is_some() || problem.benchmark.is_some() {
                cfg.problem = problem.problem;
                cfg.benchmark = problem.benchmark;
            }
            if let Some(r) = route {
                cfg.route = r;
            }
            cfg.epsilon = epsilon.or(cfg.epsilon);
            cfg.delta = delta.unwrap_or(cfg.delta);
            cfg.tau = tau.or(cfg.tau);
            cfg.gamma = gamma.or(cfg.gamma);
            cfg.ua = ua.or(cfg.ua);
            cfg.degree = degree.or(cfg.degree);
            cfg.horizon = horizon.unwrap_or(cfg.horizon);
            if let Some(m) = moments {
                cfg.moments = m.into();
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            let result = run_pipeline(&cfg)?;
            println!(
                "{}",
                std::fs::read_to_string(cfg.out_dir.join("summary.md")).unwrap_or_default()
            );
            if result.outcome != RunOutcome::Guaranteed
                && result.certificate.status == CertStatus::Verified
            {
                eprintln!("certificate verified but no guarantee was issued");
            }
            Ok(result.outcome.exit_code())
        }
        Command::BenchList => {
            for name in NAMES {
                let e = load_benchmark(name)?;
                println!(
                    "{name:14} n={} q={}  {}",
                    e.problem.state_dim, e.problem.disturbance_dim, e.description
                );
            }
            Ok(0)
        }
    }
}
