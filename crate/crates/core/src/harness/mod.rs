//! Seeded experiment runner: regret and rate curves for bandit and MDP
//! agents, rate-distortion curves, and marginal action-probability sweeps.
//!
//! Every seed draws its own true environment from the prior (Bayesian regret).
//! Within a seed, agent `i` owns two random streams derived from `(seed, i)`,
//! one for decisions and rewards and one for diagnostics, so adding an agent
//! never changes another agent's draws and diagnostics never perturb behaviour.

pub mod config;
mod output;

use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{regret_distortion, satisficing_arm, AgentConfig, BanditAgent};
use crate::bandit::BanditEnv;
use crate::diagnostics::thompson_frequencies;
use crate::error::{Error, Result};
use crate::info::{entropy, DiscreteDist};
use crate::mdp::solve_optimal;
use crate::mdp_agents::{MdpAgent, MdpAgentConfig};
use crate::rd::{rd_curve, BlahutArimoto, EmpiricalSource};
use crate::rng::{stream, StreamRng, ENVIRONMENT_STREAM};
use crate::stats::pointwise_mean_stderr;

pub use config::{
    parse_config, parse_override, AgentKind, AgentSpec, BanditSpec, EnvironmentSpec, ExperimentConfig,
    ExperimentKind, MdpSpec, Override, PriorSpec, SweepSpec,
};
pub use output::{write_outputs, Manifest, CODE_VERSION};

/// Stream ids for sweeps, which run one solver rather than agents.
const SWEEP_SOURCE_STREAM: u64 = 0;
const SWEEP_TS_STREAM: u64 = 1;

fn decision_stream(seed: u64, agent: usize) -> StreamRng {
    stream(seed, 2 * agent as u64)
}

fn diagnostic_stream(seed: u64, agent: usize) -> StreamRng {
    stream(seed, 2 * agent as u64 + 1)
}

/// One agent's per-step (or per-episode) values for one seed; index `t − 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub seed: u64,
    pub agent: String,
    pub values: Vec<f64>,
}

/// Pointwise mean and standard error across seeds for one agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSeries {
    pub agent: String,
    pub n_seeds: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdRow {
    pub agent: String,
    pub param: f64,
    pub rate_nats: f64,
    pub distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalRow {
    pub lambda: f64,
    pub arm: usize,
    pub prob: f64,
    pub ts_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    /// Cumulative regret per seed and agent.
    pub regret: Vec<MetricSeries>,
    /// Rate diagnostic (nats) per seed and agent.
    pub rate: Vec<MetricSeries>,
    pub rd_curve: Vec<RdRow>,
    pub marginals: Vec<MarginalRow>,
    pub failures: Vec<SeedFailure>,
}

/// Groups series by agent (in first-seen order) and aggregates each group.
pub fn aggregate_seeds(series: &[MetricSeries]) -> Result<Vec<AggregateSeries>> {
    let mut agents: Vec<&str> = Vec::new();
    for s in series {
        if !agents.contains(&s.agent.as_str()) {
            agents.push(&s.agent);
        }
    }
    agents
        .into_iter()
        .map(|agent| {
            let group: Vec<&[f64]> = series
                .iter()
                .filter(|s| s.agent == agent)
                .map(|s| s.values.as_slice())
                .collect();
            let (mean, stderr) = pointwise_mean_stderr(&group)?;
            Ok(AggregateSeries {
                agent: agent.to_string(),
                n_seeds: group.len(),
                mean,
                stderr,
            })
        })
        .collect()
}

/// Runs every seed of `cfg`. Seeds run in parallel; results are in seed order.
/// A failing seed is recorded in `failures` and contributes no series.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.check().map_err(|i| Error::Config {
        field: i.path.to_string(),
        line: None,
        message: i.message,
    })?;
    match cfg.kind {
        ExperimentKind::BanditRegret | ExperimentKind::BanditRate => run_bandit(cfg),
        ExperimentKind::MdpRegret => run_mdp(cfg),
        ExperimentKind::RdCurve => run_rd_curve(cfg),
        ExperimentKind::MarginalSweep => run_marginal_sweep(cfg),
    }
}

type SeedResult = Result<(Vec<MetricSeries>, Vec<MetricSeries>)>;

fn collect_seeds(cfg: &ExperimentConfig, f: impl Fn(u64) -> SeedResult + Sync) -> RunOutput {
    let results: Vec<(u64, SeedResult)> = cfg.seeds.par_iter().map(|&s| (s, f(s))).collect();
    let mut out = RunOutput::default();
    for (seed, r) in results {
        match r {
            Ok((regret, rate)) => {
                out.regret.extend(regret);
                out.rate.extend(rate);
            }
            Err(e) => out.failures.push(SeedFailure {
                seed,
                error: e.to_string(),
            }),
        }
    }
    out
}

fn bandit_spec(cfg: &ExperimentConfig) -> Result<&BanditSpec> {
    match &cfg.environment {
        EnvironmentSpec::Bandit(b) => Ok(b),
        EnvironmentSpec::Mdp(_) => Err(Error::config("environment", "expected a bandit environment")),
    }
}

fn run_bandit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = bandit_spec(cfg)?;
    let prior = spec.prior_belief()?;
    let agents = cfg.bandit_agents()?;
    let record_rate = cfg.kind == ExperimentKind::BanditRate;
    Ok(collect_seeds(cfg, |seed| {
        let env = match &spec.fixed_means {
            Some(m) => BanditEnv::new(spec.reward, m.clone())?,
            None => prior.sample_env(&mut stream(seed, ENVIRONMENT_STREAM))?,
        };
        let mut regret = Vec::with_capacity(agents.len());
        let mut rate = Vec::new();
        for (i, (name, agent_cfg)) in agents.iter().enumerate() {
            let (r, q) = run_bandit_agent(cfg, &env, &prior, agent_cfg, seed, i, record_rate)?;
            regret.push(MetricSeries {
                seed,
                agent: name.clone(),
                values: r,
            });
            if let Some(q) = q {
                rate.push(MetricSeries {
                    seed,
                    agent: name.clone(),
                    values: q,
                });
            }
        }
        Ok((regret, rate))
    }))
}

fn run_bandit_agent(
    cfg: &ExperimentConfig,
    env: &BanditEnv,
    prior: &crate::bandit::BeliefState,
    agent_cfg: &AgentConfig,
    seed: u64,
    index: usize,
    record_rate: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut agent = BanditAgent::new(agent_cfg.clone(), prior.clone())?.with_rate_samples(cfg.rate_samples);
    let mut rng = decision_stream(seed, index);
    let mut drng = diagnostic_stream(seed, index);
    let steps = cfg.horizon as usize;
    let mut regret = Vec::with_capacity(steps);
    let mut rate = record_rate.then(|| Vec::with_capacity(steps));
    let mut cum = 0.0;
    for _ in 0..steps {
        let diag_rng = if record_rate { Some(&mut drng) } else { None };
        let (_, d) = agent.step(env, &mut rng, diag_rng)?;
        cum += d.expected_regret;
        regret.push(cum);
        if let Some(r) = rate.as_mut() {
            r.push(d.rate.ok_or_else(|| Error::Numeric("rate diagnostic missing".into()))?);
        }
    }
    Ok((regret, rate))
}

fn run_mdp(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = match &cfg.environment {
        EnvironmentSpec::Mdp(m) => m,
        EnvironmentSpec::Bandit(_) => return Err(Error::config("environment", "expected an mdp environment")),
    };
    let prior = spec.prior()?;
    let agents = cfg.mdp_agents()?;
    Ok(collect_seeds(cfg, |seed| {
        let truth = match &spec.fixed_mdp {
            Some(m) => m.clone(),
            None => prior.sample(&mut stream(seed, ENVIRONMENT_STREAM))?,
        };
        let (_, v_star) = solve_optimal(&truth);
        let best = truth.start_value(v_star.at(0));
        let mut regret = Vec::with_capacity(agents.len());
        let mut rate = Vec::new();
        for (i, (name, agent_cfg)) in agents.iter().enumerate() {
            let mut agent = MdpAgent::new(*agent_cfg, prior.clone())?;
            let mut rng = decision_stream(seed, i);
            let mut cum = 0.0;
            let mut r = Vec::with_capacity(cfg.episodes);
            let mut q = Vec::with_capacity(cfg.episodes);
            for _ in 0..cfg.episodes {
                let (_, d) = agent.run_episode(&truth, best, &mut rng)?;
                cum += d.regret;
                r.push(cum);
                if let Some(x) = d.rate {
                    q.push(x);
                }
            }
            regret.push(MetricSeries {
                seed,
                agent: name.clone(),
                values: r,
            });
            if matches!(agent_cfg, MdpAgentConfig::Vsrl(_)) {
                rate.push(MetricSeries {
                    seed,
                    agent: name.clone(),
                    values: q,
                });
            }
        }
        Ok((regret, rate))
    }))
}

fn sweep_of(cfg: &ExperimentConfig) -> Result<&SweepSpec> {
    cfg.sweep.as_ref().ok_or_else(|| Error::config("sweep", "required for this kind"))
}

/// BLASTS rate-distortion curve over `sweep.betas` and STS points over
/// `sweep.epsilons`, both on one empirical source drawn from the prior with
/// the first seed. STS's target is a deterministic function of the sample,
/// so its rate is the plug-in entropy of the satisficing arm.
fn run_rd_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = bandit_spec(cfg)?;
    let sweep = sweep_of(cfg)?;
    let prior = spec.prior_belief()?;
    let seed = cfg.seeds[0];
    let z = sweep.z_samples.unwrap_or(config::DEFAULT_CURVE_Z);
    let sampler = prior.sampler()?;
    let arms = sampler.n_arms();
    let means = sampler.sample_many(&mut stream(seed, SWEEP_SOURCE_STREAM), z);
    let dm = regret_distortion(&means, arms, sweep.distortion)?;
    let src = EmpiricalSource::uniform(vec![(); z])?;
    let mut rows: Vec<RdRow> = rd_curve(&src, &dm, &sweep.betas, &sweep.ba)?
        .into_iter()
        .map(|p| RdRow {
            agent: "blasts".into(),
            param: p.beta,
            rate_nats: p.rate,
            distortion: p.distortion,
        })
        .collect();
    for &eps in &sweep.epsilons {
        let mut counts = vec![0.0; arms];
        let mut distortion = 0.0;
        for (i, row) in means.chunks(arms).enumerate() {
            let a = satisficing_arm(row, eps);
            counts[a] += 1.0;
            distortion += dm.get(i, a) / z as f64;
        }
        rows.push(RdRow {
            agent: "sts".into(),
            param: eps,
            rate_nats: entropy(&DiscreteDist::from_counts(&counts)?),
            distortion,
        });
    }
    Ok(RunOutput {
        rd_curve: rows,
        ..Default::default()
    })
}

/// BLASTS marginal action probabilities over `sweep.lambdas` next to Thompson
/// sampling frequencies, for the prior belief and the first seed. The same
/// source samples are reused for every λ.
fn run_marginal_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = bandit_spec(cfg)?;
    let sweep = sweep_of(cfg)?;
    let prior = spec.prior_belief()?;
    let seed = cfg.seeds[0];
    let z = sweep.z_samples.unwrap_or(config::DEFAULT_SWEEP_Z);
    let sampler = prior.sampler()?;
    let arms = sampler.n_arms();
    let means = sampler.sample_many(&mut stream(seed, SWEEP_SOURCE_STREAM), z);
    let dm = regret_distortion(&means, arms, sweep.distortion)?;
    let ts = thompson_frequencies(
        &prior,
        sweep.ts_samples.unwrap_or(config::DEFAULT_TS_SAMPLES),
        &mut stream(seed, SWEEP_TS_STREAM),
    )?;
    let weights = vec![1.0 / z as f64; z];
    let marginals: Vec<Vec<f64>> = sweep
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let beta = crate::agents::RateParam::Lambda(lambda).beta();
            let sol = BlahutArimoto::with_weights(&weights, &dm, beta)?.run(&sweep.ba)?;
            let mut q = vec![0.0; arms];
            for r in 0..z {
                for (acc, p) in q.iter_mut().zip(sol.channel.row(r)) {
                    *acc += p / z as f64;
                }
            }
            Ok(q)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(sweep.lambdas.len() * arms);
    for (&lambda, q) in sweep.lambdas.iter().zip(&marginals) {
        for arm in 0..arms {
            rows.push(MarginalRow {
                lambda,
                arm,
                prob: q[arm],
                ts_prob: ts[arm],
            });
        }
    }
    Ok(RunOutput {
        marginals: rows,
        ..Default::default()
    })
}
