//! certikit command line: certification experiments, verification suites,
//! point estimators, and planner-constant calibration.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures (singular references, size caps, exhausted calibration grids).

use certikit::certify::{
    calibrate_certified, calibrate_mixedness, Backend, CalibrationConfig, CertifyError, Constants,
    HsDenseSampler, PlannerConstant, TesterConfig,
};
use certikit::chisq::{averaged_chi_observable, chi_var_exact, ChiContext};
use certikit::densesim::{exact_distribution, orbit_matrix, state_power, two_block_state};
use certikit::harness::{run_experiment, ExperimentConfig, HarnessError, TestKind};
use certikit::rng::trial_rng;
use certikit::schurweyl::{r_lambda, sw_sample};
use certikit::states::StateSpec;
use certikit::symalg::{var_hs_exact, var_linear_fidelity, var_purity, OrbitElement, OrbitKey};
use certikit::verify::run_suite;
use certikit::{Caps, Spectrum, Tolerances};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "certikit", version, about = "Quantum state certification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a certification experiment and write a report.
    Certify(CertifyArgs),
    /// Run an identity/invariant suite and print worst residuals.
    Verify(VerifyArgs),
    /// Run a point estimator and print estimate +/- theoretical sd.
    Estimate(EstimateArgs),
    /// Calibrate a planner constant and write a constants file.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// One of: mixedness, hs, trace, lowrank, chisq, fidelity, diagonal.
    #[arg(long)]
    test: String,
    /// State: shorthand (`paninski:8:0.2`) or a JSON spec file.
    #[arg(long)]
    state: String,
    /// Reference state for two-state tests.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// rsk | dense | analytic (default: rsk for mixedness, else analytic).
    #[arg(long)]
    backend: Option<String>,
    /// Report path prefix; writes `<out>.json` and `<out>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rank parameter for the lowrank test.
    #[arg(long)]
    rank: Option<usize>,
    /// Measurement batches per trial (mixedness sampling).
    #[arg(long, default_value_t = 1)]
    batches: u64,
    /// Override the planner's copy count.
    #[arg(long)]
    n_override: Option<u64>,
    /// Ground-truth label (close|far) for error-rate accounting.
    #[arg(long)]
    expect: Option<String>,
    /// Constants file (defaults to the built-in table).
    #[arg(long)]
    constants: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// distances | symalg | schurweyl | chisq | all
    #[arg(long)]
    suite: String,
    /// Override every check's tolerance with this value.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// purity | overlap | hs | bures-chisq
    #[arg(long)]
    quantity: String,
    #[arg(long)]
    state: String,
    #[arg(long)]
    sigma: Option<String>,
    /// Total copies consumed (split across the two states where relevant).
    #[arg(long)]
    copies: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct CalibrateArgs {
    /// mixedness | hs | chisq
    #[arg(long)]
    profile: String,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    target_error: f64,
    /// Geometric grid `start:factor:max` for the Monte Carlo sweep.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 400)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated instance dimensions for the sweep (default `2,8`).
    #[arg(long)]
    dims: Option<String>,
    /// Comma-separated squared-distance thresholds (default `0.09,0.49,0.81`).
    #[arg(long)]
    thetas: Option<String>,
    /// Where to write the constants file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| CliError::Config(format!("bad --{what} entry `{x}`"))))
        .collect()
}

/// Errors mapped to exit codes.
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

fn classify_certify(err: CertifyError) -> CliError {
    match &err {
        CertifyError::BadTheta { .. }
        | CertifyError::BadGamma { .. }
        | CertifyError::BadEps { .. }
        | CertifyError::UnknownProfile { .. }
        | CertifyError::UnsupportedBackend { .. }
        | CertifyError::BadRank { .. }
        | CertifyError::Constants(_) => CliError::Config(err.to_string()),
        _ => CliError::Numerical(err.to_string()),
    }
}

fn classify_harness(err: HarnessError) -> CliError {
    match err {
        HarnessError::Config(m) => CliError::Config(m),
        HarnessError::Certify(e) => classify_certify(e),
        HarnessError::State(e) => CliError::Numerical(e.to_string()),
    }
}

fn parse_state(arg: &str) -> Result<StateSpec, CliError> {
    let path = std::path::Path::new(arg);
    if arg.ends_with(".json") || path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read state file `{arg}`: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad state file `{arg}`: {e}")))
    } else {
        StateSpec::parse_shorthand(arg).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn cmd_certify(args: CertifyArgs) -> Result<(), CliError> {
    let test: TestKind = args.test.parse().map_err(CliError::Config)?;
    let backend: Backend = match &args.backend {
        Some(b) => b.parse().map_err(CliError::Config)?,
        None => match test {
            TestKind::Mixedness => Backend::Rsk,
            _ => Backend::Analytic,
        },
    };
    let expect = match args.expect.as_deref() {
        None => None,
        Some("close") => Some(certikit::certify::Verdict::Close),
        Some("far") => Some(certikit::certify::Verdict::Far),
        Some(other) => {
            return Err(CliError::Config(format!("bad --expect `{other}` (close|far)")))
        }
    };
    let config = ExperimentConfig {
        test,
        state: parse_state(&args.state)?,
        sigma: args.sigma.as_deref().map(parse_state).transpose()?,
        eps: args.eps,
        rank: args.rank,
        trials: args.trials,
        seed: args.seed,
        backend,
        batches: args.batches,
        n_override: args.n_override,
        expect,
        constants: args.constants.map(|p| p.display().to_string()),
    };
    let started = Instant::now();
    let report = run_experiment(&config).map_err(classify_harness)?;
    let elapsed = started.elapsed().as_secs_f64();
    eprintln!("wall time: {elapsed:.3}s");
    let s = &report.summary;
    println!(
        "test={:?} trials={} n={} theta={:.6e} mean={:.6e} error_rate={}",
        config.test,
        s.trials,
        s.plan_n,
        s.theta,
        s.mean_statistic,
        s.error_rate.map_or_else(|| "n/a".into(), |e| format!("{e:.4}")),
    );
    match &args.out {
        Some(base) => {
            let json_path = base.with_extension("json");
            let csv_path = base.with_extension("csv");
            std::fs::write(&json_path, report.to_json()).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", json_path.display()))
            })?;
            std::fs::write(&csv_path, report.to_csv()).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", csv_path.display()))
            })?;
            println!("wrote {} and {}", json_path.display(), csv_path.display());
        }
        None => print!("{}", report.to_json()),
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let Some(checks) = run_suite(&args.suite) else {
        return Err(CliError::Config(format!(
            "unknown suite `{}` (distances|symalg|schurweyl|chisq|all)",
            args.suite
        )));
    };
    let mut failures = 0usize;
    for check in &checks {
        let tol = args.tolerance.unwrap_or(check.tolerance);
        let pass = check.worst_residual <= tol;
        println!(
            "{:<64} worst residual {:>12.3e}  (tol {:>8.1e})  {}",
            check.name,
            check.worst_residual,
            tol,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failures += 1;
        }
    }
    println!("{}/{} checks passed", checks.len() - failures, checks.len());
    if failures > 0 {
        return Err(CliError::Numerical(format!("{failures} checks failed")));
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let caps = Caps::default();
    let tol = Tolerances::default();
    let rho =
        parse_state(&args.state)?.build().map_err(|e| CliError::Numerical(e.to_string()))?;
    let sigma = match args.sigma.as_deref() {
        Some(s) => {
            Some(parse_state(s)?.build().map_err(|e| CliError::Numerical(e.to_string()))?)
        }
        None => None,
    };
    let mut rng = trial_rng(args.seed, 0);
    let need_sigma = || {
        sigma.clone().ok_or_else(|| CliError::Config("this quantity needs --sigma".into()))
    };
    match args.quantity.as_str() {
        "purity" => {
            if args.copies < 2 {
                return Err(CliError::Config("purity estimation needs at least 2 copies".into()));
            }
            let alpha = rho.spectrum();
            let n = args.copies as usize;
            let shape = sw_sample(&alpha, n, &mut rng);
            let est = r_lambda(&shape, n).map_err(|e| CliError::Numerical(e.to_string()))?;
            let sd = var_purity(&alpha, args.copies)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .sqrt();
            println!("purity estimate: {est:.6} +/- {sd:.6} (n = {n})");
        }
        "overlap" => {
            let sigma = need_sigma()?;
            let half = (args.copies / 2).max(1) as usize;
            let obs = orbit_matrix(
                &OrbitElement::basis(OrbitKey::rs(), half, half)
                    .map_err(|e| CliError::Numerical(e.to_string()))?,
                rho.dim(),
                &caps,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let state = two_block_state(&rho, half, &sigma, half, &caps)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let law = exact_distribution(&obs, &state, &tol)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let est = law.sample(&mut rng);
            let sd = var_linear_fidelity(&rho, &sigma, half as u64, half as u64)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .sqrt();
            println!("overlap estimate: {est:.6} +/- {sd:.6} (m = n = {half})");
        }
        "hs" => {
            let sigma = need_sigma()?;
            let half = (args.copies / 2).max(2) as usize;
            let sampler = HsDenseSampler::new(&rho, &sigma, half, &TesterConfig::default())
                .map_err(classify_certify)?;
            let est = sampler.sample(&mut rng);
            let sd = var_hs_exact(&rho, &sigma, half as u64)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .sqrt();
            println!("squared-hs estimate: {est:.6} +/- {sd:.6} (n = {half} per state)");
        }
        "bures-chisq" => {
            let sigma = need_sigma()?;
            let (beta_vals, u) = sigma.eigen();
            let beta =
                Spectrum::new(beta_vals).map_err(|e| CliError::Numerical(e.to_string()))?;
            let ctx = ChiContext::new(&beta).map_err(|e| CliError::Numerical(e.to_string()))?;
            let rotated =
                rho.conjugated(&u).map_err(|e| CliError::Numerical(e.to_string()))?;
            let n = args.copies.max(2) as usize;
            let obs = averaged_chi_observable(&ctx, n, &caps)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let state = state_power(&rotated, n, &caps)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let law = exact_distribution(&obs, &state, &tol)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let est = law.sample(&mut rng);
            let sd = chi_var_exact(&rotated, &ctx, n as u64)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .sqrt();
            println!("bures-chisq estimate: {est:.6} +/- {sd:.6} (n = {n})");
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown quantity `{other}` (purity|overlap|hs|bures-chisq)"
            )))
        }
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut constants = Constants::builtin();
    let seed = args.seed.unwrap_or(constants.calibration_seed);
    let entry = match args.profile.as_str() {
        "mixedness" => {
            let mut cfg = CalibrationConfig {
                trials: args.trials,
                seed,
                target: args.target_error,
                ..CalibrationConfig::default()
            };
            if let Some(dims) = &args.dims {
                cfg.dims = parse_list(dims, "dims")?;
            }
            if let Some(thetas) = &args.thetas {
                cfg.theta_grid = parse_list(thetas, "thetas")?;
            }
            if let Some(grid) = &args.grid {
                let parts: Vec<&str> = grid.split(':').collect();
                if parts.len() != 3 {
                    return Err(CliError::Config("--grid wants start:factor:max".into()));
                }
                cfg.grid_start =
                    parts[0].parse().map_err(|_| CliError::Config("bad grid start".into()))?;
                cfg.grid_factor =
                    parts[1].parse().map_err(|_| CliError::Config("bad grid factor".into()))?;
                cfg.grid_max =
                    parts[2].parse().map_err(|_| CliError::Config("bad grid max".into()))?;
            }
            let outcome = calibrate_mixedness(&cfg).map_err(classify_certify)?;
            println!(
                "mixedness: C = {} (worst error {:.4} over {} arms)",
                outcome.c, outcome.worst_error, outcome.arms
            );
            PlannerConstant {
                c: outcome.c,
                gamma: certikit::certify::GAMMA_DISTANCE_SQUARED,
                method: "montecarlo".into(),
                target_error: args.target_error,
            }
        }
        "hs" => {
            let gamma = certikit::certify::GAMMA_DISTANCE_SQUARED;
            let c = calibrate_certified(gamma, args.target_error).map_err(classify_certify)?;
            let c = c.ceil();
            println!("hs: C = {c} (certified at gamma = {gamma})");
            PlannerConstant {
                c,
                gamma,
                method: "certified".into(),
                target_error: args.target_error,
            }
        }
        "chisq" => {
            let gamma = certikit::certify::GAMMA_CHI_SQUARED;
            let c = calibrate_certified(gamma, args.target_error).map_err(classify_certify)?;
            let c = c.ceil();
            println!("chisq: C = {c} (certified at gamma = {gamma})");
            PlannerConstant {
                c,
                gamma,
                method: "certified".into(),
                target_error: args.target_error,
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown profile `{other}` (mixedness|hs|chisq)"
            )))
        }
    };
    constants.profiles.insert(args.profile.clone(), entry);
    constants.calibration_seed = seed;
    std::fs::write(&args.out, constants.to_json())
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", args.out.display())))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify(args) => cmd_certify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
