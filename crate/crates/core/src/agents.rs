//! Bandit action selection: Thompson sampling, satisficing Thompson sampling
//! and Blahut-Arimoto satisficing Thompson sampling (BLASTS).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{BanditEnv, BeliefSampler, BeliefState, StepRecord};
use crate::diagnostics::argmax_entropy_from_means;
use crate::error::{Error, Result};
use crate::info::DiscreteDist;
use crate::rd::{BaConfig, BaSolution, BlahutArimoto, DistortionMatrix};

/// How a sampled environment scores a candidate arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistortionKind {
    /// `max_b θ(b) − θ(a)`
    #[default]
    LinearRegret,
    /// `(max_b θ(b) − θ(a))²`
    SquaredRegret,
}

/// BLASTS trade-off parameter, given either as an information cost `lambda`
/// (reward per nat) or directly as the multiplier `beta = 1 / lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateParam {
    Lambda(f64),
    Beta(f64),
}

impl RateParam {
    /// Multiplier passed to the solver. `lambda = 0` maps to `beta = ∞`.
    pub fn beta(self) -> f64 {
        match self {
            RateParam::Lambda(l) if l == 0.0 => f64::INFINITY,
            RateParam::Lambda(l) => 1.0 / l,
            RateParam::Beta(b) => b,
        }
    }

    /// The value as configured, for labelling outputs.
    pub fn value(self) -> f64 {
        match self {
            RateParam::Lambda(v) | RateParam::Beta(v) => v,
        }
    }

    fn validate(self) -> Result<()> {
        let v = self.value();
        if v.is_nan() || v < 0.0 {
            return Err(Error::validation(format!("rate parameter must be non-negative, got {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlastsConfig {
    pub rate: RateParam,
    pub z_samples: usize,
    pub ba: BaConfig,
    pub distortion: DistortionKind,
}

impl BlastsConfig {
    pub fn new(rate: RateParam, z_samples: usize) -> Self {
        Self {
            rate,
            z_samples,
            ba: BaConfig::default(),
            distortion: DistortionKind::default(),
        }
    }

    pub fn with_distortion(mut self, distortion: DistortionKind) -> Self {
        self.distortion = distortion;
        self
    }

    pub fn with_ba(mut self, ba: BaConfig) -> Self {
        self.ba = ba;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rate.validate()?;
        self.ba.validate()?;
        if self.z_samples == 0 {
            return Err(Error::validation("z_samples must be at least 1"));
        }
        Ok(())
    }
}

/// Action-selection policy of a bandit agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AgentConfig {
    Thompson,
    Satisficing { epsilon: f64 },
    Blasts(BlastsConfig),
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            AgentConfig::Thompson => Ok(()),
            AgentConfig::Satisficing { epsilon } => {
                if epsilon.is_nan() || *epsilon < 0.0 {
                    Err(Error::validation(format!("epsilon must be non-negative, got {epsilon}")))
                } else {
                    Ok(())
                }
            }
            AgentConfig::Blasts(cfg) => cfg.validate(),
        }
    }
}

/// Index of a uniformly random maximiser of `values`. Ties use exact equality.
pub fn argmax_uniform<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == best).count();
    if ties <= 1 {
        return values.iter().position(|&v| v == best).unwrap_or(0);
    }
    let pick = rng.random_range(0..ties);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Lowest index whose shortfall against the best entry is at most `epsilon`.
pub fn satisficing_arm(values: &[f64], epsilon: f64) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .position(|&v| best - v <= epsilon)
        .unwrap_or(0)
}

/// Samples `θ ~ η` and returns a uniformly random maximiser of the sampled means.
pub fn ts_select<R: Rng + ?Sized>(b: &BeliefState, rng: &mut R) -> Result<usize> {
    let theta = b.sample_env(rng)?;
    Ok(argmax_uniform(theta.means(), rng))
}

/// Samples `θ ~ η` and returns the first arm within `epsilon` of the sampled best.
pub fn sts_select<R: Rng + ?Sized>(b: &BeliefState, epsilon: f64, rng: &mut R) -> Result<usize> {
    AgentConfig::Satisficing { epsilon }.validate()?;
    let theta = b.sample_env(rng)?;
    Ok(satisficing_arm(theta.means(), epsilon))
}

/// Distortions `d[z][a]` from row-major sampled means (`rows × arms`).
pub fn regret_distortion(means: &[f64], arms: usize, kind: DistortionKind) -> Result<DistortionMatrix> {
    if arms == 0 || means.len() % arms != 0 {
        return Err(Error::Dimension {
            context: "sampled means",
            expected: arms,
            actual: means.len(),
        });
    }
    let rows = means.len() / arms;
    let mut data = Vec::with_capacity(means.len());
    for row in means.chunks(arms) {
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        data.extend(row.iter().map(|&m| {
            let gap = best - m;
            match kind {
                DistortionKind::LinearRegret => gap,
                DistortionKind::SquaredRegret => gap * gap,
            }
        }));
    }
    DistortionMatrix::new(rows, arms, data)
}

/// The target-action channel computed from `Z` posterior samples.
#[derive(Debug, Clone)]
pub struct BlastsChannel {
    /// Sampled means, row-major `Z × arms`.
    pub means: Vec<f64>,
    pub arms: usize,
    pub distortion: DistortionMatrix,
    pub solution: BaSolution,
}

impl BlastsChannel {
    /// Draws the empirical source from `sampler` and solves for the channel.
    pub fn compute<R: Rng + ?Sized>(sampler: &BeliefSampler, cfg: &BlastsConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let means = sampler.sample_many(rng, cfg.z_samples);
        Self::from_means(means, sampler.n_arms(), cfg)
    }

    pub fn from_means(means: Vec<f64>, arms: usize, cfg: &BlastsConfig) -> Result<Self> {
        cfg.validate()?;
        let distortion = regret_distortion(&means, arms, cfg.distortion)?;
        let z = distortion.rows();
        let weights = vec![1.0 / z as f64; z];
        let solution = BlahutArimoto::with_weights(&weights, &distortion, cfg.rate.beta())?.run(&cfg.ba)?;
        Ok(Self {
            means,
            arms,
            distortion,
            solution,
        })
    }

    pub fn z_samples(&self) -> usize {
        self.distortion.rows()
    }

    /// `π(a) = (1/Z) Σ_z δ(a | e_z)`.
    pub fn marginal(&self) -> Result<DiscreteDist> {
        let ch = &self.solution.channel;
        let z = ch.rows() as f64;
        let mut q = vec![0.0; ch.cols()];
        for r in 0..ch.rows() {
            for (acc, p) in q.iter_mut().zip(ch.row(r)) {
                *acc += p / z;
            }
        }
        DiscreteDist::new(q)
    }

    /// Draws `z' ~ Uniform([Z])` and then `a ~ δ(· | e_z')`.
    pub fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let z = rng.random_range(0..self.z_samples());
        let u: f64 = rng.random();
        self.solution.channel.sample_row(z, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlastsDecision {
    pub arm: usize,
    pub rate: f64,
    pub distortion: f64,
    pub iters: usize,
}

/// Full BLASTS step: sample `Z` environments, solve for the channel, probability-match.
pub fn blasts_decide<R: Rng + ?Sized>(b: &BeliefState, cfg: &BlastsConfig, rng: &mut R) -> Result<BlastsDecision> {
    let sampler = b.sampler()?;
    let ch = BlastsChannel::compute(&sampler, cfg, rng)?;
    let arm = ch.sample_action(rng);
    Ok(BlastsDecision {
        arm,
        rate: ch.solution.rate,
        distortion: ch.solution.distortion,
        iters: ch.solution.iters,
    })
}

pub fn blasts_select<R: Rng + ?Sized>(b: &BeliefState, cfg: &BlastsConfig, rng: &mut R) -> Result<usize> {
    blasts_decide(b, cfg, rng).map(|d| d.arm)
}

/// Per-step quantities recorded for plotting. Computed from the true
/// environment, so they never feed back into the agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Channel rate for BLASTS; estimated `H(target action)` for TS/STS when requested.
    pub rate: Option<f64>,
    /// `max_a ρ̄(a) − ρ̄(A_t)` under the true environment.
    pub expected_regret: f64,
}

/// A policy paired with its evolving belief.
#[derive(Debug, Clone)]
pub struct BanditAgent {
    config: AgentConfig,
    belief: BeliefState,
    t: u64,
    rate_samples: usize,
}

impl BanditAgent {
    pub fn new(config: AgentConfig, prior: BeliefState) -> Result<Self> {
        config.validate()?;
        prior.validate()?;
        Ok(Self {
            config,
            belief: prior,
            t: 0,
            rate_samples: 1000,
        })
    }

    /// Posterior draws used to estimate the TS/STS rate diagnostic.
    pub fn with_rate_samples(mut self, n: usize) -> Self {
        self.rate_samples = n.max(1);
        self
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Selects an arm, observes its reward from `env` and updates the belief.
    ///
    /// `rng` drives action selection and the reward draw. When `diag_rng` is
    /// given, TS and STS also estimate their rate diagnostic from it; BLASTS
    /// reports its channel rate regardless.
    pub fn step<R: Rng + ?Sized, D: Rng + ?Sized>(
        &mut self,
        env: &BanditEnv,
        rng: &mut R,
        diag_rng: Option<&mut D>,
    ) -> Result<(StepRecord, StepDiagnostics)> {
        if env.n_arms() != self.belief.n_arms() {
            return Err(Error::Dimension {
                context: "environment arms vs belief arms",
                expected: self.belief.n_arms(),
                actual: env.n_arms(),
            });
        }
        let (action, mut rate) = match &self.config {
            AgentConfig::Thompson => (ts_select(&self.belief, rng)?, None),
            AgentConfig::Satisficing { epsilon } => (sts_select(&self.belief, *epsilon, rng)?, None),
            AgentConfig::Blasts(cfg) => {
                let d = blasts_decide(&self.belief, cfg, rng)?;
                (d.arm, Some(d.rate))
            }
        };
        if let (None, Some(drng)) = (rate, diag_rng) {
            let sampler = self.belief.sampler()?;
            let means = sampler.sample_many(drng, self.rate_samples);
            let arms = sampler.n_arms();
            rate = Some(match self.config {
                AgentConfig::Satisficing { epsilon } => {
                    let mut counts = vec![0.0; arms];
                    for row in means.chunks(arms) {
                        counts[satisficing_arm(row, epsilon)] += 1.0;
                    }
                    crate::info::entropy(&DiscreteDist::from_counts(&counts)?)
                }
                _ => argmax_entropy_from_means(&means, arms)?,
            });
        }
        let reward = env.sample_reward(action, rng)?;
        let record = StepRecord {
            t: self.t,
            action,
            reward,
        };
        self.belief = self.belief.update(&record)?;
        self.t += 1;
        let diag = StepDiagnostics {
            rate,
            expected_regret: env.regret(action)?,
        };
        Ok((record, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::RewardKind;
    use crate::rng::stream;

    #[test]
    fn degenerate_posterior_always_picks_best() {
        let b = BeliefState::from_gaussian(&[0.0, 0.5, 1.0, 0.2], &[1e-30; 4]).unwrap();
        let mut rng = stream(1, 0);
        for _ in 0..100 {
            assert_eq!(ts_select(&b, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn identical_arms_split_evenly() {
        let b = BeliefState::gaussian_prior(2, 0.0, 1.0).unwrap();
        let mut rng = stream(2, 0);
        let n = 100_000;
        let zeros = (0..n).filter(|_| ts_select(&b, &mut rng).unwrap() == 0).count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn exact_ties_are_uniform() {
        let mut rng = stream(3, 0);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[argmax_uniform(&[1.0, 0.0, 1.0], &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 30_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn satisficing_examples() {
        assert_eq!(satisficing_arm(&[0.9, 0.85, 0.2], 0.1), 0);
        assert_eq!(satisficing_arm(&[0.2, 0.85, 0.9], 0.1), 1);
        assert_eq!(satisficing_arm(&[0.2, 0.85, 0.9], 0.0), 2);
        assert_eq!(satisficing_arm(&[0.2, 0.85, 0.9], 0.7), 0);
        let b = BeliefState::gaussian_prior(3, 0.0, 1.0).unwrap();
        let mut rng = stream(4, 0);
        for _ in 0..100 {
            assert_eq!(sts_select(&b, 1e6, &mut rng).unwrap(), 0);
        }
        assert!(sts_select(&b, -0.1, &mut rng).is_err());
    }

    #[test]
    fn regret_distortion_shapes() {
        let dm = regret_distortion(&[0.1, 0.4, 0.3, 0.0, 0.5, 0.2], 3, DistortionKind::LinearRegret).unwrap();
        assert_eq!(dm.rows(), 2);
        assert!((dm.get(0, 0) - 0.3).abs() < 1e-15);
        assert_eq!(dm.get(0, 1), 0.0);
        assert_eq!(dm.get(1, 1), 0.0);
        let sq = regret_distortion(&[0.1, 0.4, 0.3, 0.0, 0.5, 0.2], 3, DistortionKind::SquaredRegret).unwrap();
        assert!((sq.get(1, 0) - 0.25).abs() < 1e-15);
        assert!(regret_distortion(&[0.1, 0.2], 3, DistortionKind::LinearRegret).is_err());
    }

    #[test]
    fn lambda_zero_is_infinite_beta() {
        assert!(RateParam::Lambda(0.0).beta().is_infinite());
        assert_eq!(RateParam::Lambda(4.0).beta(), 0.25);
        assert_eq!(RateParam::Beta(4.0).beta(), 4.0);
        assert!(BlastsConfig::new(RateParam::Lambda(-1.0), 10).validate().is_err());
        assert!(BlastsConfig::new(RateParam::Beta(1.0), 0).validate().is_err());
    }

    #[test]
    fn single_arm_has_zero_rate_and_regret() {
        let env = BanditEnv::new(RewardKind::Bernoulli, vec![0.3]).unwrap();
        let prior = BeliefState::default_prior(RewardKind::Bernoulli, 1).unwrap();
        for cfg in [
            AgentConfig::Thompson,
            AgentConfig::Satisficing { epsilon: 0.1 },
            AgentConfig::Blasts(BlastsConfig::new(RateParam::Beta(10.0), 50)),
        ] {
            let mut agent = BanditAgent::new(cfg, prior.clone()).unwrap().with_rate_samples(100);
            let mut rng = stream(5, 0);
            let mut drng = stream(5, 1);
            for _ in 0..20 {
                let (rec, diag) = agent.step(&env, &mut rng, Some(&mut drng)).unwrap();
                assert_eq!(rec.action, 0);
                assert_eq!(diag.expected_regret, 0.0);
                assert!(diag.rate.unwrap().abs() < 1e-12);
            }
            assert_eq!(agent.t(), 20);
        }
    }

    #[test]
    fn huge_lambda_plays_uniformly() {
        let env = BanditEnv::new(RewardKind::Bernoulli, vec![0.1, 0.5, 0.9]).unwrap();
        let prior = BeliefState::default_prior(RewardKind::Bernoulli, 3).unwrap();
        let cfg = AgentConfig::Blasts(BlastsConfig::new(RateParam::Lambda(1e4), 200));
        let mut agent = BanditAgent::new(cfg, prior).unwrap();
        let mut rng = stream(6, 0);
        let steps = 3000;
        let mut regret = 0.0;
        for _ in 0..steps {
            let (_, d) = agent.step(&env, &mut rng, None::<&mut rand_chacha::ChaCha8Rng>).unwrap();
            regret += d.expected_regret;
        }
        // uniform play averages (0.8 + 0.4 + 0) / 3
        let avg = regret / steps as f64;
        assert!((avg - 0.4).abs() < 0.03, "{avg}");
    }

    #[test]
    fn mismatched_env_rejected() {
        let env = BanditEnv::new(RewardKind::Bernoulli, vec![0.3, 0.4]).unwrap();
        let prior = BeliefState::default_prior(RewardKind::Bernoulli, 3).unwrap();
        let mut agent = BanditAgent::new(AgentConfig::Thompson, prior).unwrap();
        assert!(agent
            .step(&env, &mut stream(0, 0), None::<&mut rand_chacha::ChaCha8Rng>)
            .is_err());
    }
}
