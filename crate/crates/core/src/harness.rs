//! Experiment runner: repeated, seeded tester trials with deterministic
//! CSV/JSON reports.
//!
//! A config names the test, the input states, the scale `eps`, the trial
//! count, the seed, and the backend. Trials run on a worker pool (capped by
//! `CERTIKIT_THREADS`) with per-trial streams keyed `(seed, trial)`, and
//! the report is assembled in trial order, so the output is byte-identical
//! across schedulings and reruns. Wall time is intentionally not part of
//! the report files; the CLI prints it to stderr instead.

use crate::certify::{
    decide, mixedness_dense_law, prepare_chisq, test_chisq_known_sigma, test_diagonal,
    test_fidelity, test_hs_two_state, test_low_rank, test_maximally_mixed, Backend, CertifyError,
    Constants, EstimatorProfile, HsDenseSampler, TestPlan, TestVerdict, TesterConfig, Verdict,
    FIDELITY_GAMMA, FIDELITY_THETA_COEFF, GAMMA_CHI_SQUARED, GAMMA_DISTANCE_SQUARED,
    PCA_REDUCTION_C,
};
use crate::rng::trial_rng;
use crate::states::{self, DensityMatrix, StateSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    State(#[from] crate::states::StateError),
}

/// Which certification test to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Mixedness,
    Hs,
    Trace,
    Lowrank,
    Chisq,
    Fidelity,
    Diagonal,
}

impl std::str::FromStr for TestKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "mixedness" => TestKind::Mixedness,
            "hs" => TestKind::Hs,
            "trace" => TestKind::Trace,
            "lowrank" => TestKind::Lowrank,
            "chisq" => TestKind::Chisq,
            "fidelity" => TestKind::Fidelity,
            "diagonal" => TestKind::Diagonal,
            other => return Err(format!("unknown test `{other}`")),
        })
    }
}

/// Full experiment description; serializable so runs can be scripted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub test: TestKind,
    pub state: StateSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<StateSpec>,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub backend: Backend,
    #[serde(default = "one")]
    pub batches: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_override: Option<u64>,
    /// Ground-truth label override for error-rate accounting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
    /// Constants file; the built-in table when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<String>,
}

fn one() -> u64 {
    1
}

/// One trial's row in the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub verdict: Verdict,
    pub statistic: f64,
    pub copies: u64,
    pub seed: u64,
}

/// Aggregates over the trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_rate: Option<f64>,
    pub mean_statistic: f64,
    pub empirical_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theoretical_variance: Option<f64>,
    pub total_copies: u64,
    pub plan_n: u64,
    pub theta: f64,
    pub guaranteed_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_error: Option<f64>,
}

/// The report: one row per trial plus the summary, with the config echoed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// Deterministic CSV: `trial,verdict,statistic,copies,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,verdict,statistic,copies,seed\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.trial, row.verdict, row.statistic, row.copies, row.seed
            ));
        }
        out
    }

    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialize");
        s.push('\n');
        s
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CERTIKIT_THREADS") {
        if let Ok(t) = v.parse::<usize>() {
            if t >= 1 {
                builder = builder.num_threads(t);
            }
        }
    }
    builder.build().expect("worker pool")
}

/// Run the experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    if config.trials < 1 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    let constants = match &config.constants {
        Some(path) => Constants::from_file(std::path::Path::new(path))?,
        None => Constants::builtin(),
    };
    let rho = config.state.build()?;
    let sigma = config.sigma.as_ref().map(|s| s.build()).transpose()?;
    let needs_sigma = matches!(
        config.test,
        TestKind::Hs | TestKind::Trace | TestKind::Lowrank | TestKind::Chisq | TestKind::Fidelity
    );
    if needs_sigma && sigma.is_none() {
        return Err(HarnessError::Config(format!("test {:?} needs --sigma", config.test)));
    }
    if config.test == TestKind::Lowrank && config.rank.is_none() {
        return Err(HarnessError::Config("lowrank test needs --rank".into()));
    }
    let tester_cfg = TesterConfig {
        batches: config.batches,
        n_override: config.n_override,
        ..TesterConfig::default()
    };

    // Shared precomputation for the dense sampling backends.
    let shared: Option<SharedLaw> =
        prepare_shared(config, &rho, sigma.as_ref(), &constants, &tester_cfg)?;

    let run_one = |trial: u64| -> Result<TestVerdict, CertifyError> {
        let mut rng = trial_rng(config.seed, trial);
        if let Some(shared) = &shared {
            let stat = shared.law.sample(&mut rng) + shared.offset;
            let mut v = decide(stat, &shared.plan);
            v.copies_used = shared.copies;
            return Ok(v);
        }
        match config.test {
            TestKind::Mixedness => test_maximally_mixed(
                &rho,
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Hs => test_hs_two_state(
                &rho,
                sigma.as_ref().expect("checked"),
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Trace => crate::certify::testers::test_trace_distance(
                &rho,
                sigma.as_ref().expect("checked"),
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Lowrank => test_low_rank(
                &rho,
                sigma.as_ref().expect("checked"),
                config.rank.expect("checked"),
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Chisq => test_chisq_known_sigma(
                &rho,
                sigma.as_ref().expect("checked"),
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Fidelity => test_fidelity(
                &rho,
                sigma.as_ref().expect("checked"),
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
            TestKind::Diagonal => test_diagonal(
                &rho,
                config.eps,
                &constants,
                config.backend,
                &tester_cfg,
                &mut rng,
            ),
        }
    };

    let pool = thread_pool();
    let verdicts: Result<Vec<(u64, TestVerdict)>, CertifyError> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_one(t).map(|v| (t, v)))
            .collect()
    });
    let mut verdicts = verdicts?;
    verdicts.sort_by_key(|(t, _)| *t);

    let ground_truth = match config.expect {
        Some(v) => Some(v),
        None => ground_truth_label(config, &rho, sigma.as_ref())?,
    };
    let rows: Vec<TrialRow> = verdicts
        .iter()
        .map(|(t, v)| TrialRow {
            trial: *t,
            verdict: v.verdict,
            statistic: v.statistic,
            copies: v.copies_used,
            seed: config.seed,
        })
        .collect();
    let tcount = rows.len() as f64;
    let mean = rows.iter().map(|r| r.statistic).sum::<f64>() / tcount;
    let empirical_variance = if rows.len() > 1 {
        rows.iter().map(|r| (r.statistic - mean).powi(2)).sum::<f64>() / (tcount - 1.0)
    } else {
        0.0
    };
    let error_rate = ground_truth.map(|want| {
        rows.iter().filter(|r| r.verdict != want).count() as f64 / tcount
    });
    let plan = &verdicts[0].1.plan;
    let theoretical_variance =
        theoretical_statistic_variance(config, &rho, sigma.as_ref(), plan, &constants)?;
    let summary = Summary {
        trials: config.trials,
        ground_truth,
        error_rate,
        mean_statistic: mean,
        empirical_variance,
        theoretical_variance,
        total_copies: rows.iter().map(|r| r.copies).sum(),
        plan_n: plan.n,
        theta: plan.theta,
        guaranteed_error: plan.guaranteed_error,
        certified_error: verdicts[0].1.certified_error,
    };
    Ok(ExperimentReport { schema: 1, config: config.clone(), rows, summary })
}

struct SharedLaw {
    law: crate::densesim::OutcomeDistribution,
    plan: TestPlan,
    offset: f64,
    copies: u64,
}

/// Build the shared outcome law once for dense sampling backends, so the
/// per-trial work is just one categorical draw.
fn prepare_shared(
    config: &ExperimentConfig,
    rho: &DensityMatrix,
    sigma: Option<&DensityMatrix>,
    constants: &Constants,
    cfg: &TesterConfig,
) -> Result<Option<SharedLaw>, HarnessError> {
    if config.backend != Backend::Dense {
        return Ok(None);
    }
    match config.test {
        TestKind::Mixedness => {
            let d = rho.dim();
            let profile = EstimatorProfile::mixedness(constants);
            let c = constants.profile_c("mixedness")?;
            let theta = config.eps * config.eps;
            let plan = match cfg.n_override {
                Some(n) => {
                    crate::certify::plan_with_n(&profile, theta, GAMMA_DISTANCE_SQUARED, c, n)
                }
                None => crate::certify::plan_samples(&profile, theta, GAMMA_DISTANCE_SQUARED, c)?,
            };
            let law = mixedness_dense_law(rho, plan.n as usize, cfg)?;
            let copies = plan.n;
            Ok(Some(SharedLaw { law, plan, offset: -1.0 / d as f64, copies }))
        }
        TestKind::Hs | TestKind::Trace | TestKind::Lowrank => {
            let sigma = sigma.expect("checked by caller");
            let eps_hs = match config.test {
                TestKind::Hs => config.eps,
                TestKind::Trace => 2.0 * config.eps / (rho.dim() as f64).sqrt(),
                _ => {
                    let k = config.rank.expect("checked") as f64;
                    PCA_REDUCTION_C * config.eps / k.sqrt()
                }
            };
            let profile = EstimatorProfile::hilbert_schmidt(constants);
            let c = constants.profile_c("hs")?;
            let theta = eps_hs * eps_hs;
            let plan = match cfg.n_override {
                Some(n) => {
                    crate::certify::plan_with_n(&profile, theta, GAMMA_DISTANCE_SQUARED, c, n)
                }
                None => crate::certify::plan_samples(&profile, theta, GAMMA_DISTANCE_SQUARED, c)?,
            };
            let sampler = HsDenseSampler::new(rho, sigma, plan.n as usize, cfg)?;
            let outcomes = sampler.outcomes().to_vec();
            let law = crate::densesim::OutcomeDistribution::new(outcomes, &cfg.tolerances)
                .map_err(CertifyError::from)?;
            let copies = 2 * plan.n;
            Ok(Some(SharedLaw { law, plan, offset: 0.0, copies }))
        }
        TestKind::Chisq => {
            let sigma = sigma.expect("checked by caller");
            let prepared = prepare_chisq(
                rho,
                sigma,
                config.eps * config.eps,
                GAMMA_CHI_SQUARED,
                constants,
                cfg,
            )?;
            let law = prepared.dense_law(cfg)?;
            let copies = prepared.plan.n;
            Ok(Some(SharedLaw { law, plan: prepared.plan, offset: 0.0, copies }))
        }
        TestKind::Fidelity => {
            let sigma = sigma.expect("checked by caller");
            let eta = constants.depolarize_c * config.eps;
            let rho_mixed = states::depolarize(rho, eta)?;
            let sigma_mixed = states::depolarize(sigma, eta)?;
            let prepared = prepare_chisq(
                &rho_mixed,
                &sigma_mixed,
                FIDELITY_THETA_COEFF * config.eps,
                FIDELITY_GAMMA,
                constants,
                cfg,
            )?;
            let law = prepared.dense_law(cfg)?;
            let copies = prepared.plan.n;
            Ok(Some(SharedLaw { law, plan: prepared.plan, offset: 0.0, copies }))
        }
        // The diagonal test re-estimates its reference per trial.
        TestKind::Diagonal => Ok(None),
    }
}

/// Exact label of the instance under the test's quoted guarantee, when it
/// is computable; `None` in the indeterminate band.
fn ground_truth_label(
    config: &ExperimentConfig,
    rho: &DensityMatrix,
    sigma: Option<&DensityMatrix>,
) -> Result<Option<Verdict>, HarnessError> {
    let eps = config.eps;
    let label = |mu: f64, gamma: f64, theta: f64| {
        if mu <= gamma * theta {
            Some(Verdict::Close)
        } else if mu > theta {
            Some(Verdict::Far)
        } else {
            None
        }
    };
    Ok(match config.test {
        TestKind::Mixedness => {
            let d = rho.dim() as f64;
            let mu = rho.spectrum().power_sum(2) - 1.0 / d;
            label(mu, GAMMA_DISTANCE_SQUARED, eps * eps)
        }
        TestKind::Hs => {
            let mu = states::hs_distance_sq(rho, sigma.expect("checked"))?;
            label(mu, GAMMA_DISTANCE_SQUARED, eps * eps)
        }
        TestKind::Trace => {
            let dtr = states::trace_distance(rho, sigma.expect("checked"))?;
            if dtr <= 1e-12 {
                Some(Verdict::Close)
            } else if dtr > eps {
                Some(Verdict::Far)
            } else {
                None
            }
        }
        TestKind::Lowrank => {
            let sigma = sigma.expect("checked");
            let k = config.rank.expect("checked");
            let dhs = states::hs_distance(rho, sigma)?;
            let dtr = states::trace_distance(rho, sigma)?;
            let topk: f64 = sigma.spectrum().values().iter().take(k).sum();
            let delta = 1.0 - topk;
            if dhs <= 0.99 * PCA_REDUCTION_C * eps / (k as f64).sqrt() {
                Some(Verdict::Close)
            } else if dtr > delta + eps {
                Some(Verdict::Far)
            } else {
                None
            }
        }
        TestKind::Chisq => {
            let mu = states::bures_chisq(rho, sigma.expect("checked"))?;
            label(mu, GAMMA_CHI_SQUARED, eps * eps)
        }
        TestKind::Fidelity => {
            let sigma = sigma.expect("checked");
            let bures = states::bures_sq(rho, sigma)?;
            if bures > 0.5 * eps {
                Some(Verdict::Far)
            } else {
                match states::bures_chisq(rho, sigma) {
                    Ok(div) if div <= 0.49 * eps => Some(Verdict::Close),
                    _ => None,
                }
            }
        }
        TestKind::Diagonal => {
            if rho.is_diagonal(1e-9) {
                Some(Verdict::Close)
            } else {
                None
            }
        }
    })
}

/// Exact sampling variance of the per-trial statistic, where the backend
/// admits one.
fn theoretical_statistic_variance(
    config: &ExperimentConfig,
    rho: &DensityMatrix,
    sigma: Option<&DensityMatrix>,
    plan: &TestPlan,
    constants: &Constants,
) -> Result<Option<f64>, HarnessError> {
    if config.backend == Backend::Analytic {
        return Ok(None);
    }
    Ok(match config.test {
        TestKind::Mixedness => {
            let batches = config.batches.max(1);
            let per_batch = (plan.n / batches).max(2);
            Some(
                crate::symalg::var_purity(&rho.spectrum(), per_batch)
                    .map_err(CertifyError::from)?
                    / batches as f64,
            )
        }
        TestKind::Hs | TestKind::Trace | TestKind::Lowrank => Some(
            crate::symalg::var_hs_exact(rho, sigma.expect("checked"), plan.n)
                .map_err(CertifyError::from)?,
        ),
        TestKind::Chisq => {
            let prepared = prepare_chisq(
                rho,
                sigma.expect("checked"),
                config.eps * config.eps,
                GAMMA_CHI_SQUARED,
                constants,
                &TesterConfig::default(),
            )?;
            Some(
                crate::chisq::chi_var_exact(&prepared.rotated, &prepared.ctx, plan.n)
                    .map_err(CertifyError::from)?,
            )
        }
        _ => None,
    })
}
