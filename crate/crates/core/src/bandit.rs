//! Bandit environments and conjugate per-arm beliefs.
//!
//! Two reward models are supported: Bernoulli rewards with Beta posteriors and
//! Gaussian rewards with unit observation noise and Gaussian posteriors.

use rand::Rng;
use rand_distr::{Bernoulli, Beta, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Bernoulli,
    Gaussian,
}

/// True bandit: per-arm mean rewards and the reward model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditEnv {
    kind: RewardKind,
    means: Vec<f64>,
}

impl BanditEnv {
    pub fn new(kind: RewardKind, means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::validation("bandit needs at least one arm"));
        }
        for (a, &m) in means.iter().enumerate() {
            let ok = match kind {
                RewardKind::Bernoulli => (0.0..=1.0).contains(&m),
                RewardKind::Gaussian => m.is_finite(),
            };
            if !ok {
                return Err(Error::validation(format!(
                    "arm {a} mean {m} is not valid for a {kind:?} bandit"
                )));
            }
        }
        Ok(Self { kind, means })
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn n_arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Expected shortfall `max_b ρ̄(b) − ρ̄(arm)`.
    pub fn regret(&self, arm: usize) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.best_mean() - self.means[arm])
    }

    /// Draws `R ~ ρ(· | arm)`: Bernoulli, or Gaussian with unit variance.
    pub fn sample_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        self.check_arm(arm)?;
        let m = self.means[arm];
        Ok(match self.kind {
            RewardKind::Bernoulli => {
                let coin = Bernoulli::new(m).map_err(|e| Error::Numeric(e.to_string()))?;
                if coin.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            RewardKind::Gaussian => m + rng.sample::<f64, _>(StandardNormal),
        })
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.means.len() {
            return Err(Error::IndexOutOfRange {
                what: "arms",
                index: arm,
                len: self.means.len(),
            });
        }
        Ok(())
    }
}

/// One interaction `(t, A_t, R_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaArm {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianArm {
    pub mean: f64,
    pub var: f64,
}

/// Per-arm posterior sufficient statistics. Arms are independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arms", rename_all = "lowercase")]
pub enum BeliefState {
    Beta(Vec<BetaArm>),
    Gaussian(Vec<GaussianArm>),
}

impl BeliefState {
    pub fn beta_prior(n_arms: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::Beta(vec![BetaArm { alpha, beta }; n_arms]).validated()
    }

    pub fn gaussian_prior(n_arms: usize, mean: f64, var: f64) -> Result<Self> {
        Self::Gaussian(vec![GaussianArm { mean, var }; n_arms]).validated()
    }

    /// Beta(1,1) per arm for Bernoulli bandits, N(0,1) per arm for Gaussian ones.
    pub fn default_prior(kind: RewardKind, n_arms: usize) -> Result<Self> {
        match kind {
            RewardKind::Bernoulli => Self::beta_prior(n_arms, 1.0, 1.0),
            RewardKind::Gaussian => Self::gaussian_prior(n_arms, 0.0, 1.0),
        }
    }

    pub fn from_gaussian(means: &[f64], vars: &[f64]) -> Result<Self> {
        if means.len() != vars.len() {
            return Err(Error::Dimension {
                context: "gaussian belief variances",
                expected: means.len(),
                actual: vars.len(),
            });
        }
        Self::Gaussian(
            means
                .iter()
                .zip(vars)
                .map(|(&mean, &var)| GaussianArm { mean, var })
                .collect(),
        )
        .validated()
    }

    pub fn from_beta(params: &[(f64, f64)]) -> Result<Self> {
        Self::Beta(
            params
                .iter()
                .map(|&(alpha, beta)| BetaArm { alpha, beta })
                .collect(),
        )
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_arms() == 0 {
            return Err(Error::validation("belief has no arms"));
        }
        match self {
            BeliefState::Beta(arms) => {
                for (a, p) in arms.iter().enumerate() {
                    if !(p.alpha > 0.0 && p.beta > 0.0 && p.alpha.is_finite() && p.beta.is_finite()) {
                        return Err(Error::validation(format!(
                            "arm {a}: Beta parameters ({}, {}) must be positive and finite",
                            p.alpha, p.beta
                        )));
                    }
                }
            }
            BeliefState::Gaussian(arms) => {
                for (a, p) in arms.iter().enumerate() {
                    if !(p.var > 0.0 && p.var.is_finite() && p.mean.is_finite()) {
                        return Err(Error::validation(format!(
                            "arm {a}: Gaussian posterior ({}, {}) needs finite mean and positive variance",
                            p.mean, p.var
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> RewardKind {
        match self {
            BeliefState::Beta(_) => RewardKind::Bernoulli,
            BeliefState::Gaussian(_) => RewardKind::Gaussian,
        }
    }

    pub fn n_arms(&self) -> usize {
        match self {
            BeliefState::Beta(a) => a.len(),
            BeliefState::Gaussian(a) => a.len(),
        }
    }

    pub fn posterior_mean(&self, arm: usize) -> f64 {
        match self {
            BeliefState::Beta(a) => a[arm].alpha / (a[arm].alpha + a[arm].beta),
            BeliefState::Gaussian(a) => a[arm].mean,
        }
    }

    pub fn posterior_variance(&self, arm: usize) -> f64 {
        match self {
            BeliefState::Beta(a) => {
                let (al, be) = (a[arm].alpha, a[arm].beta);
                let s = al + be;
                al * be / (s * s * (s + 1.0))
            }
            BeliefState::Gaussian(a) => a[arm].var,
        }
    }

    /// Conjugate Bayes update for the arm in `rec`; other arms are untouched.
    pub fn update(&self, rec: &StepRecord) -> Result<Self> {
        if rec.action >= self.n_arms() {
            return Err(Error::IndexOutOfRange {
                what: "arms",
                index: rec.action,
                len: self.n_arms(),
            });
        }
        let mut next = self.clone();
        match &mut next {
            BeliefState::Beta(arms) => {
                if rec.reward != 0.0 && rec.reward != 1.0 {
                    return Err(Error::validation(format!(
                        "Bernoulli reward must be 0 or 1, got {}",
                        rec.reward
                    )));
                }
                let arm = &mut arms[rec.action];
                arm.alpha += rec.reward;
                arm.beta += 1.0 - rec.reward;
            }
            BeliefState::Gaussian(arms) => {
                if !rec.reward.is_finite() {
                    return Err(Error::validation("Gaussian reward must be finite"));
                }
                let arm = &mut arms[rec.action];
                let precision = 1.0 / arm.var + 1.0;
                arm.mean = (arm.mean / arm.var + rec.reward) / precision;
                arm.var = 1.0 / precision;
            }
        }
        Ok(next)
    }

    /// Per-arm posterior samplers, built once and reused across many draws.
    pub fn sampler(&self) -> Result<BeliefSampler> {
        self.validate()?;
        let arms = match self {
            BeliefState::Beta(arms) => arms
                .iter()
                .map(|p| {
                    Beta::new(p.alpha, p.beta)
                        .map(ArmSampler::Beta)
                        .map_err(|e| Error::Numeric(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
            BeliefState::Gaussian(arms) => arms
                .iter()
                .map(|p| {
                    Normal::new(p.mean, p.var.sqrt())
                        .map(ArmSampler::Normal)
                        .map_err(|e| Error::Numeric(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(BeliefSampler {
            kind: self.kind(),
            arms,
        })
    }

    /// Draws one environment realisation `θ ~ η`.
    pub fn sample_env<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BanditEnv> {
        let sampler = self.sampler()?;
        let mut means = vec![0.0; self.n_arms()];
        sampler.sample_into(rng, &mut means);
        Ok(BanditEnv {
            kind: self.kind(),
            means,
        })
    }
}

#[derive(Debug, Clone)]
enum ArmSampler {
    Beta(Beta<f64>),
    Normal(Normal<f64>),
}

/// Cached per-arm posterior distributions.
#[derive(Debug, Clone)]
pub struct BeliefSampler {
    kind: RewardKind,
    arms: Vec<ArmSampler>,
}

impl BeliefSampler {
    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    /// Fills `out` with one draw of every arm's mean, arms in index order.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.arms.len());
        for (slot, arm) in out.iter_mut().zip(&self.arms) {
            *slot = match arm {
                ArmSampler::Beta(b) => b.sample(rng),
                ArmSampler::Normal(n) => n.sample(rng),
            };
        }
    }

    /// `n` joint draws, row-major `n × arms`.
    pub fn sample_many<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let k = self.arms.len();
        let mut out = vec![0.0; n * k];
        for row in out.chunks_mut(k.max(1)) {
            self.sample_into(rng, row);
        }
        out
    }
}
