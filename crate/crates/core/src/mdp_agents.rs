//! Posterior sampling (PSRL) and value-equivalent sampling (VSRL) over a
//! conjugate posterior on tabular MDPs.
//!
//! The posterior keeps an independent Dirichlet over next states and a Beta
//! over the Bernoulli mean reward for every `(s, a)`. Initial-state
//! distribution and horizon are known.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::BetaArm;
use crate::error::{Error, Result};
use crate::mdp::{solve_optimal, DistortionSets, NonStationaryPolicy, StationaryPolicy, TabularMdp};
use crate::rd::{BaConfig, BaSolution, BlahutArimoto, DistortionMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum RewardBelief {
    /// Beta posterior on each `(s, a)` mean reward, row-major `S × A`.
    Beta(Vec<BetaArm>),
    /// Mean rewards known exactly; observed rewards are ignored.
    Known(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpPosterior {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    init_dist: Vec<f64>,
    /// Dirichlet concentrations, row-major `S × A × S`.
    transition_conc: Vec<f64>,
    rewards: RewardBelief,
}

impl MdpPosterior {
    /// Dirichlet(`concentration`) rows and Beta(1, 1) mean rewards.
    pub fn uniform_prior(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        init_dist: Vec<f64>,
        concentration: f64,
    ) -> Result<Self> {
        let sa = n_states * n_actions;
        Self::new(
            n_states,
            n_actions,
            horizon,
            init_dist,
            vec![concentration; sa * n_states],
            RewardBelief::Beta(vec![BetaArm { alpha: 1.0, beta: 1.0 }; sa]),
        )
    }

    pub fn new(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        init_dist: Vec<f64>,
        transition_conc: Vec<f64>,
        rewards: RewardBelief,
    ) -> Result<Self> {
        let post = Self {
            n_states,
            n_actions,
            horizon,
            init_dist,
            transition_conc,
            rewards,
        };
        post.validate()?;
        Ok(post)
    }

    pub fn validate(&self) -> Result<()> {
        let sa = self.n_states * self.n_actions;
        if self.transition_conc.len() != sa * self.n_states {
            return Err(Error::Dimension {
                context: "Dirichlet concentrations",
                expected: sa * self.n_states,
                actual: self.transition_conc.len(),
            });
        }
        if self.transition_conc.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::validation("Dirichlet concentrations must be positive and finite"));
        }
        match &self.rewards {
            RewardBelief::Beta(arms) => {
                if arms.len() != sa {
                    return Err(Error::Dimension {
                        context: "reward Beta parameters",
                        expected: sa,
                        actual: arms.len(),
                    });
                }
                if arms
                    .iter()
                    .any(|b| !(b.alpha.is_finite() && b.alpha > 0.0 && b.beta.is_finite() && b.beta > 0.0))
                {
                    return Err(Error::validation("Beta parameters must be positive and finite"));
                }
            }
            RewardBelief::Known(r) => {
                if r.len() != sa {
                    return Err(Error::Dimension {
                        context: "known rewards",
                        expected: sa,
                        actual: r.len(),
                    });
                }
            }
        }
        // Builds a throwaway model to reuse the MDP shape and simplex checks.
        self.mean_mdp().map(|_| ())
    }

    /// Replaces the reward belief with known mean rewards.
    pub fn with_known_rewards(mut self, rewards: Vec<f64>) -> Result<Self> {
        self.rewards = RewardBelief::Known(rewards);
        self.validate()?;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn init_dist(&self) -> &[f64] {
        &self.init_dist
    }

    pub fn rewards(&self) -> &RewardBelief {
        &self.rewards
    }

    pub fn concentration(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition_conc[start..start + self.n_states]
    }

    /// The MDP whose parameters are the posterior means.
    pub fn mean_mdp(&self) -> Result<TabularMdp> {
        let mut transition = Vec::with_capacity(self.transition_conc.len());
        for row in self.transition_conc.chunks(self.n_states.max(1)) {
            let total: f64 = row.iter().sum();
            transition.extend(row.iter().map(|c| c / total));
        }
        let reward = match &self.rewards {
            RewardBelief::Beta(arms) => arms.iter().map(|b| b.alpha / (b.alpha + b.beta)).collect(),
            RewardBelief::Known(r) => r.clone(),
        };
        TabularMdp::new(
            self.n_states,
            self.n_actions,
            self.horizon,
            reward,
            transition,
            self.init_dist.clone(),
        )
    }

    /// Draws one MDP: a Dirichlet sample per transition row (normalised
    /// Gammas) and a Beta sample per mean reward.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TabularMdp> {
        let ns = self.n_states;
        let mut transition = Vec::with_capacity(self.transition_conc.len());
        let mut row = vec![0.0; ns];
        for conc in self.transition_conc.chunks(ns) {
            let mut total = 0.0;
            for (x, &c) in row.iter_mut().zip(conc) {
                let g = Gamma::new(c, 1.0).map_err(|e| Error::Numeric(format!("Gamma({c}): {e}")))?;
                *x = g.sample(rng);
                total += *x;
            }
            if total > 0.0 && total.is_finite() {
                transition.extend(row.iter().map(|x| x / total));
            } else {
                // Every Gamma draw underflowed (tiny concentrations); fall back
                // to the posterior mean row.
                let ctotal: f64 = conc.iter().sum();
                transition.extend(conc.iter().map(|c| c / ctotal));
            }
        }
        let reward = match &self.rewards {
            RewardBelief::Beta(arms) => arms
                .iter()
                .map(|b| {
                    Beta::new(b.alpha, b.beta)
                        .map(|d| d.sample(rng))
                        .map_err(|e| Error::Numeric(format!("Beta({}, {}): {e}", b.alpha, b.beta)))
                })
                .collect::<Result<Vec<_>>>()?,
            RewardBelief::Known(r) => r.clone(),
        };
        TabularMdp::new(ns, self.n_actions, self.horizon, reward, transition, self.init_dist.clone())
    }

    /// Conjugate update from one episode.
    pub fn update(&self, traj: &EpisodeTrajectory) -> Result<Self> {
        if traj.steps.len() != self.horizon {
            return Err(Error::Dimension {
                context: "trajectory length vs horizon",
                expected: self.horizon,
                actual: traj.steps.len(),
            });
        }
        let mut next = self.clone();
        let mut states = traj.steps.iter().map(|st| st.state).skip(1).chain([traj.final_state]);
        for st in &traj.steps {
            let s_next = states.next().expect("one successor per step");
            for (what, idx, len) in [
                ("state", st.state, self.n_states),
                ("action", st.action, self.n_actions),
                ("next state", s_next, self.n_states),
            ] {
                if idx >= len {
                    return Err(Error::IndexOutOfRange { what, index: idx, len });
                }
            }
            let sa = st.state * self.n_actions + st.action;
            next.transition_conc[sa * self.n_states + s_next] += 1.0;
            if let RewardBelief::Beta(arms) = &mut next.rewards {
                if st.reward == 1.0 {
                    arms[sa].alpha += 1.0;
                } else if st.reward == 0.0 {
                    arms[sa].beta += 1.0;
                } else {
                    return Err(Error::validation(format!(
                        "reward {} is not a Bernoulli realisation",
                        st.reward
                    )));
                }
            }
        }
        Ok(next)
    }
}

pub fn update_mdp_posterior(post: &MdpPosterior, traj: &EpisodeTrajectory) -> Result<MdpPosterior> {
    post.update(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrajectory {
    pub steps: Vec<TrajectoryStep>,
    pub final_state: usize,
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Runs one episode of `pi` in `m`, drawing Bernoulli reward realisations
/// with the mean rewards of `m`.
pub fn rollout<R: Rng + ?Sized>(m: &TabularMdp, pi: &NonStationaryPolicy, rng: &mut R) -> Result<EpisodeTrajectory> {
    if pi.horizon() != m.horizon() {
        return Err(Error::Dimension {
            context: "policy horizon",
            expected: m.horizon(),
            actual: pi.horizon(),
        });
    }
    let step0 = pi.step(0);
    if step0.n_states() != m.n_states() || step0.n_actions() != m.n_actions() {
        return Err(Error::Dimension {
            context: "policy vs MDP (states × actions)",
            expected: m.n_states() * m.n_actions(),
            actual: step0.n_states() * step0.n_actions(),
        });
    }
    let mut s = sample_index(m.init_dist(), rng);
    let mut steps = Vec::with_capacity(m.horizon());
    for h in 0..m.horizon() {
        let a = sample_index(pi.step(h).row(s), rng);
        let reward = if rng.random::<f64>() < m.reward(s, a) { 1.0 } else { 0.0 };
        steps.push(TrajectoryStep { state: s, action: a, reward });
        s = sample_index(m.transition_row(s, a), rng);
    }
    Ok(EpisodeTrajectory { steps, final_state: s })
}

/// One posterior sample's optimal policy.
pub fn psrl_episode_policy<R: Rng + ?Sized>(post: &MdpPosterior, rng: &mut R) -> Result<NonStationaryPolicy> {
    let m = post.sample(rng)?;
    Ok(solve_optimal(&m).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsrlConfig {
    pub beta: f64,
    #[serde(default = "VsrlConfig::default_z_samples")]
    pub z_samples: usize,
    #[serde(default)]
    pub ba: BaConfig,
}

impl VsrlConfig {
    fn default_z_samples() -> usize {
        100
    }

    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            z_samples: Self::default_z_samples(),
            ba: BaConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::validation("beta must be non-negative"));
        }
        if self.z_samples == 0 {
            return Err(Error::validation("z_samples must be at least 1"));
        }
        self.ba.validate()
    }
}

/// A fixed set of sampled MDPs acting as both source and codebook, with the
/// pairwise value-equivalence distortion between them.
#[derive(Debug, Clone)]
pub struct ValueEquivalenceCompressor {
    samples: Vec<TabularMdp>,
    optimal: Vec<NonStationaryPolicy>,
    distortion: DistortionMatrix,
}

impl ValueEquivalenceCompressor {
    /// Uses the sampled MDPs' first-step optimal policies and optimal value
    /// functions as the distortion sets.
    pub fn new(samples: Vec<TabularMdp>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::validation("compressor needs at least one sample"))?;
        let (ns, na) = (first.n_states(), first.n_actions());
        let solved: Vec<_> = samples.iter().map(solve_optimal).collect();
        let pis: Vec<StationaryPolicy> = solved.iter().map(|(p, _)| p.step(0).clone()).collect();
        let vs: Vec<Vec<f64>> = solved.iter().map(|(_, v)| v.at(0).to_vec()).collect();
        let sets = DistortionSets::new(ns, na, pis, vs)?;
        let optimal = solved.into_iter().map(|(p, _)| p).collect();
        Self::build(samples, optimal, &sets)
    }

    pub fn with_sets(samples: Vec<TabularMdp>, sets: &DistortionSets) -> Result<Self> {
        let optimal = samples.iter().map(|m| solve_optimal(m).0).collect();
        Self::build(samples, optimal, sets)
    }

    fn build(samples: Vec<TabularMdp>, optimal: Vec<NonStationaryPolicy>, sets: &DistortionSets) -> Result<Self> {
        let z = samples.len();
        if z == 0 {
            return Err(Error::validation("compressor needs at least one sample"));
        }
        // The distortion is symmetric with a zero diagonal, so only the upper
        // triangle is evaluated.
        let upper: Vec<Vec<f64>> = (0..z)
            .into_par_iter()
            .map(|i| {
                (i + 1..z)
                    .map(|j| sets.distortion(&samples[i], &samples[j]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let mut data = vec![0.0; z * z];
        for (i, row) in upper.iter().enumerate() {
            for (off, &d) in row.iter().enumerate() {
                let j = i + 1 + off;
                data[i * z + j] = d;
                data[j * z + i] = d;
            }
        }
        let distortion = DistortionMatrix::new(z, z, data)?;
        Ok(Self {
            samples,
            optimal,
            distortion,
        })
    }

    pub fn samples(&self) -> &[TabularMdp] {
        &self.samples
    }

    pub fn optimal_policy(&self, i: usize) -> &NonStationaryPolicy {
        &self.optimal[i]
    }

    pub fn distortion(&self) -> &DistortionMatrix {
        &self.distortion
    }

    /// Rate-distortion channel from sample index to compressed sample index.
    pub fn solve(&self, beta: f64, ba: &BaConfig) -> Result<BaSolution> {
        let z = self.samples.len();
        let weights = vec![1.0 / z as f64; z];
        BlahutArimoto::with_weights(&weights, &self.distortion, beta)?.run(ba)
    }
}

#[derive(Debug, Clone)]
pub struct VsrlDecision {
    pub policy: NonStationaryPolicy,
    pub rate: f64,
    pub distortion: f64,
    pub iters: usize,
    pub source_index: usize,
    pub compressed_index: usize,
}

/// Draws `Z` posterior MDPs, compresses them under the value-equivalence
/// distortion, then probability-matches: a uniformly drawn source sample is
/// mapped through the channel and its compressed MDP is planned in.
///
/// `sets` overrides the default distortion sets (see
/// [`ValueEquivalenceCompressor::new`]).
pub fn vsrl_episode_policy<R: Rng + ?Sized>(
    post: &MdpPosterior,
    cfg: &VsrlConfig,
    sets: Option<&DistortionSets>,
    rng: &mut R,
) -> Result<VsrlDecision> {
    cfg.validate()?;
    let samples = (0..cfg.z_samples)
        .map(|_| post.sample(rng))
        .collect::<Result<Vec<_>>>()?;
    let comp = match sets {
        Some(s) => ValueEquivalenceCompressor::with_sets(samples, s)?,
        None => ValueEquivalenceCompressor::new(samples)?,
    };
    let sol = comp.solve(cfg.beta, &cfg.ba)?;
    let source_index = rng.random_range(0..cfg.z_samples);
    let compressed_index = sol.channel.sample_row(source_index, rng.random());
    Ok(VsrlDecision {
        policy: comp.optimal[compressed_index].clone(),
        rate: sol.rate,
        distortion: sol.distortion,
        iters: sol.iters,
        source_index,
        compressed_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MdpAgentConfig {
    Psrl,
    Vsrl(VsrlConfig),
}

impl MdpAgentConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            MdpAgentConfig::Psrl => Ok(()),
            MdpAgentConfig::Vsrl(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeDiagnostics {
    /// `V*_1 − V^π_1` under the true MDP, averaged over the initial distribution.
    pub regret: f64,
    /// Channel rate in nats (VSRL only).
    pub rate: Option<f64>,
}

/// An episodic agent: a posterior plus the rule that turns it into a policy.
#[derive(Debug, Clone)]
pub struct MdpAgent {
    config: MdpAgentConfig,
    posterior: MdpPosterior,
    episode: u64,
}

impl MdpAgent {
    pub fn new(config: MdpAgentConfig, prior: MdpPosterior) -> Result<Self> {
        config.validate()?;
        prior.validate()?;
        Ok(Self {
            config,
            posterior: prior,
            episode: 0,
        })
    }

    pub fn posterior(&self) -> &MdpPosterior {
        &self.posterior
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Plans, acts for one episode in `truth`, and updates the posterior.
    /// `truth_value` is `Σ_s β(s) V*_1(s)` of the true MDP.
    pub fn run_episode<R: Rng + ?Sized>(
        &mut self,
        truth: &TabularMdp,
        truth_value: f64,
        rng: &mut R,
    ) -> Result<(EpisodeTrajectory, EpisodeDiagnostics)> {
        let (policy, rate) = match &self.config {
            MdpAgentConfig::Psrl => (psrl_episode_policy(&self.posterior, rng)?, None),
            MdpAgentConfig::Vsrl(cfg) => {
                let d = vsrl_episode_policy(&self.posterior, cfg, None, rng)?;
                (d.policy, Some(d.rate))
            }
        };
        let v = crate::mdp::policy_value(truth, &policy)?;
        let regret = (truth_value - truth.start_value(v.at(0))).max(0.0);
        let traj = rollout(truth, &policy, rng)?;
        self.posterior = self.posterior.update(&traj)?;
        self.episode += 1;
        Ok((traj, EpisodeDiagnostics { regret, rate }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn one_state(rewards: Vec<f64>) -> MdpPosterior {
        let na = rewards.len();
        MdpPosterior::uniform_prior(1, na, 1, vec![1.0], 1.0)
            .unwrap()
            .with_known_rewards(rewards)
            .unwrap()
    }

    #[test]
    fn update_counts() {
        let post = MdpPosterior::uniform_prior(2, 2, 1, vec![1.0, 0.0], 1.0).unwrap();
        let traj = EpisodeTrajectory {
            steps: vec![TrajectoryStep { state: 0, action: 1, reward: 1.0 }],
            final_state: 1,
        };
        let next = post.update(&traj).unwrap();
        assert_eq!(next.concentration(0, 1), &[1.0, 2.0]);
        assert_eq!(next.concentration(0, 0), &[1.0, 1.0]);
        assert_eq!(next.concentration(1, 1), &[1.0, 1.0]);
        match next.rewards() {
            RewardBelief::Beta(arms) => {
                assert_eq!(arms[1], BetaArm { alpha: 2.0, beta: 1.0 });
                assert_eq!(arms[0], BetaArm { alpha: 1.0, beta: 1.0 });
            }
            RewardBelief::Known(_) => unreachable!(),
        }
        let bad = EpisodeTrajectory {
            steps: vec![TrajectoryStep { state: 0, action: 1, reward: 0.5 }],
            final_state: 1,
        };
        assert!(post.update(&bad).is_err());
        let short = EpisodeTrajectory { steps: vec![], final_state: 0 };
        assert!(post.update(&short).is_err());
    }

    #[test]
    fn dirichlet_posterior_mean_is_consistent() {
        let truth = TabularMdp::new(2, 1, 1, vec![0.5, 0.5], vec![0.7, 0.3, 0.5, 0.5], vec![1.0, 0.0]).unwrap();
        let pi = NonStationaryPolicy::new(vec![StationaryPolicy::uniform(2, 1).unwrap()]).unwrap();
        let mut post = MdpPosterior::uniform_prior(2, 1, 1, vec![1.0, 0.0], 1.0).unwrap();
        let mut rng = stream(1, 0);
        for _ in 0..1000 {
            let traj = rollout(&truth, &pi, &mut rng).unwrap();
            post = post.update(&traj).unwrap();
        }
        let mean = post.mean_mdp().unwrap();
        assert!((mean.transition_row(0, 0)[0] - 0.7).abs() < 0.05);
        assert!((mean.reward(0, 0) - 0.5).abs() < 0.05);
    }

    #[test]
    fn concentrated_posterior_samples_its_mdp() {
        let truth = TabularMdp::new(2, 2, 2, vec![0.1, 0.9, 0.8, 0.2], vec![0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.3, 0.7], vec![0.5, 0.5])
            .unwrap();
        let conc: Vec<f64> = truth.transitions().iter().map(|p| p * 1e7 + 1e-3).collect();
        let rewards = RewardBelief::Beta(
            truth
                .rewards()
                .iter()
                .map(|r| BetaArm { alpha: r * 1e7 + 1e-3, beta: (1.0 - r) * 1e7 + 1e-3 })
                .collect(),
        );
        let post = MdpPosterior::new(2, 2, 2, vec![0.5, 0.5], conc, rewards).unwrap();
        let target = solve_optimal(&truth).0;
        let mut rng = stream(2, 0);
        let hits = (0..200)
            .filter(|_| psrl_episode_policy(&post, &mut rng).unwrap() == target)
            .count();
        assert!(hits as f64 / 200.0 > 0.99);
    }

    #[test]
    fn psrl_symmetric_posterior_splits_evenly() {
        let post = MdpPosterior::uniform_prior(1, 2, 1, vec![1.0], 1.0).unwrap();
        let mut rng = stream(3, 0);
        let n = 10_000;
        let first = (0..n)
            .filter(|_| psrl_episode_policy(&post, &mut rng).unwrap().action_profile().unwrap()[0] == 0)
            .count();
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn zero_beta_has_zero_rate() {
        let post = MdpPosterior::uniform_prior(3, 2, 3, vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let mut rng = stream(4, 0);
        let cfg = VsrlConfig { beta: 0.0, z_samples: 12, ba: BaConfig::default() };
        let d = vsrl_episode_policy(&post, &cfg, None, &mut rng).unwrap();
        assert!(d.rate.abs() < 1e-12);
        assert!(d.source_index < 12 && d.compressed_index < 12);
    }

    #[test]
    fn rate_never_exceeds_log_z() {
        let post = MdpPosterior::uniform_prior(3, 2, 3, vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let mut rng = stream(5, 0);
        for beta in [1.0, 100.0, 1e9] {
            let cfg = VsrlConfig { beta, z_samples: 10, ba: BaConfig::default() };
            let d = vsrl_episode_policy(&post, &cfg, None, &mut rng).unwrap();
            assert!(d.rate <= (10f64).ln() + 1e-9);
        }
    }

    #[test]
    fn compressor_distortion_is_symmetric_with_zero_diagonal() {
        let post = MdpPosterior::uniform_prior(3, 2, 2, vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let mut rng = stream(6, 0);
        let samples: Vec<_> = (0..6).map(|_| post.sample(&mut rng).unwrap()).collect();
        let comp = ValueEquivalenceCompressor::new(samples).unwrap();
        let d = comp.distortion();
        for i in 0..6 {
            assert_eq!(d.get(i, i), 0.0);
            for j in 0..6 {
                assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
    }

    #[test]
    fn known_reward_mode_ignores_observed_rewards() {
        let post = one_state(vec![0.2, 0.7]);
        let traj = EpisodeTrajectory {
            steps: vec![TrajectoryStep { state: 0, action: 1, reward: 0.3 }],
            final_state: 0,
        };
        let next = post.update(&traj).unwrap();
        assert_eq!(next.rewards(), post.rewards());
        let pi = psrl_episode_policy(&next, &mut stream(7, 0)).unwrap();
        assert_eq!(pi.action_profile().unwrap(), vec![1]);
    }

    #[test]
    fn invalid_posteriors_rejected() {
        assert!(MdpPosterior::uniform_prior(2, 2, 2, vec![1.0, 0.0], 0.0).is_err());
        assert!(MdpPosterior::uniform_prior(2, 2, 0, vec![1.0, 0.0], 1.0).is_err());
        assert!(MdpPosterior::uniform_prior(2, 2, 2, vec![0.5, 0.6], 1.0).is_err());
        assert!(one_state(vec![0.1]).clone().with_known_rewards(vec![2.0]).is_err());
    }

    #[test]
    fn rollout_has_horizon_length() {
        let post = MdpPosterior::uniform_prior(3, 2, 4, vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let mut rng = stream(8, 0);
        let m = post.sample(&mut rng).unwrap();
        let pi = solve_optimal(&m).0;
        let traj = rollout(&m, &pi, &mut rng).unwrap();
        assert_eq!(traj.steps.len(), 4);
        assert!(traj.steps.iter().all(|s| s.reward == 0.0 || s.reward == 1.0));
        assert_eq!(traj.steps[0].state, 0);
    }
}
