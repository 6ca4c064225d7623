//! Monte-Carlo diagnostics over bandit beliefs: entropy of the optimal action
//! and the information ratio of a target action.

use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::agents::{argmax_uniform, satisficing_arm, AgentConfig, BlastsChannel};
use crate::bandit::{BeliefState, RewardKind};
use crate::error::{Error, Result};
use crate::info::{entropy, entropy_of, DiscreteDist};

/// Denominators below this are reported as undefined rather than divided by.
pub const INFORMATION_FLOOR: f64 = 1e-12;

/// Entropy of the argmax frequencies of row-major sampled means; tied maxima
/// split their count uniformly.
pub fn argmax_entropy_from_means(means: &[f64], arms: usize) -> Result<f64> {
    let counts = argmax_counts(means, arms)?;
    Ok(entropy(&DiscreteDist::from_counts(&counts)?))
}

fn argmax_counts(means: &[f64], arms: usize) -> Result<Vec<f64>> {
    if arms == 0 || means.is_empty() || means.len() % arms != 0 {
        return Err(Error::Dimension {
            context: "sampled means",
            expected: arms,
            actual: means.len(),
        });
    }
    let mut counts = vec![0.0; arms];
    for row in means.chunks(arms) {
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties = row.iter().filter(|&&v| v == best).count() as f64;
        for (c, &v) in counts.iter_mut().zip(row) {
            if v == best {
                *c += 1.0 / ties;
            }
        }
    }
    Ok(counts)
}

/// Plug-in estimate of `H_t(A*)` from `n_samples` posterior draws.
pub fn estimate_optimal_action_entropy<R: Rng + ?Sized>(
    b: &BeliefState,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be at least 1"));
    }
    let sampler = b.sampler()?;
    let means = sampler.sample_many(rng, n_samples);
    argmax_entropy_from_means(&means, sampler.n_arms())
}

/// Monte-Carlo information ratio estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationRatio {
    /// `Γ`, or `None` when the information gain is below [`INFORMATION_FLOOR`].
    pub value: Option<f64>,
    /// `(E[ρ̄(Ã) − ρ̄(A)])²`
    pub numerator: f64,
    /// `I(Ã; (A, O))`
    pub information_gain: f64,
    pub n_samples: usize,
}

/// Bins used to discretise unit-variance Gaussian observations.
const GAUSSIAN_BINS: usize = 40;

/// Estimates `(E_t[ρ̄(Ã) − ρ̄(A)])² / I_t(Ã; (A, O))` for the target action
/// induced by `agent`, where `A` is the agent's executed action.
///
/// `n_samples` posterior draws form the empirical source. The target action
/// is `argmax θ` for TS, the satisficing arm for STS and the Blahut-Arimoto
/// channel (solved on these same draws) for BLASTS. The executed action is
/// independent of `(θ, Ã)` with the target's marginal, so the information
/// gain is `Σ_a π(a) I(Ã; O | A = a)` with observation probabilities computed
/// per draw (Bernoulli outcomes, or Gaussian outcomes in fixed bins).
pub fn estimate_information_ratio<R: Rng + ?Sized>(
    b: &BeliefState,
    agent: &AgentConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<InformationRatio> {
    if n_samples == 0 {
        return Err(Error::validation("n_samples must be at least 1"));
    }
    agent.validate()?;
    let sampler = b.sampler()?;
    let arms = sampler.n_arms();
    let means = sampler.sample_many(rng, n_samples);

    // target[i * arms + a] = P(Ã = a | θ_i)
    let target: Vec<f64> = match agent {
        AgentConfig::Thompson => {
            let mut t = vec![0.0; means.len()];
            for (row, out) in means.chunks(arms).zip(t.chunks_mut(arms)) {
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let ties = row.iter().filter(|&&v| v == best).count() as f64;
                for (o, &v) in out.iter_mut().zip(row) {
                    if v == best {
                        *o = 1.0 / ties;
                    }
                }
            }
            t
        }
        AgentConfig::Satisficing { epsilon } => {
            let mut t = vec![0.0; means.len()];
            for (row, out) in means.chunks(arms).zip(t.chunks_mut(arms)) {
                out[satisficing_arm(row, *epsilon)] = 1.0;
            }
            t
        }
        AgentConfig::Blasts(cfg) => {
            let ch = BlastsChannel::from_means(means.clone(), arms, cfg)?;
            (0..n_samples)
                .flat_map(|i| ch.solution.channel.row(i).to_vec())
                .collect()
        }
    };

    let n = n_samples as f64;
    let mut pi = vec![0.0; arms];
    let mut mean_reward = vec![0.0; arms];
    let mut target_value = 0.0;
    for (row, trow) in means.chunks(arms).zip(target.chunks(arms)) {
        for a in 0..arms {
            pi[a] += trow[a] / n;
            mean_reward[a] += row[a] / n;
            target_value += trow[a] * row[a] / n;
        }
    }
    let executed_value: f64 = pi.iter().zip(&mean_reward).map(|(p, m)| p * m).sum();
    let gap = target_value - executed_value;
    let numerator = gap * gap;

    let obs = ObservationModel::new(b.kind(), &means);
    let n_obs = obs.n_outcomes();
    let mut information_gain = 0.0;
    let mut probs = vec![0.0; n_obs];
    for a in 0..arms {
        if pi[a] == 0.0 {
            continue;
        }
        // cond[ã][o] accumulates Σ_i P(Ã = ã | θ_i) P(O = o | θ_i, a)
        let mut cond = vec![0.0; arms * n_obs];
        for (row, trow) in means.chunks(arms).zip(target.chunks(arms)) {
            obs.probs(row[a], &mut probs);
            for (ta, &w) in trow.iter().enumerate() {
                if w > 0.0 {
                    for (c, p) in cond[ta * n_obs..(ta + 1) * n_obs].iter_mut().zip(&probs) {
                        *c += w * p;
                    }
                }
            }
        }
        let mut marginal = vec![0.0; n_obs];
        let mut conditional_entropy = 0.0;
        for ta in 0..arms {
            let mass = pi[ta] * n;
            if mass <= 0.0 {
                continue;
            }
            let row: Vec<f64> = cond[ta * n_obs..(ta + 1) * n_obs].iter().map(|c| c / mass).collect();
            conditional_entropy += pi[ta] * entropy_of(&row);
            for (m, r) in marginal.iter_mut().zip(&row) {
                *m += pi[ta] * r;
            }
        }
        information_gain += pi[a] * (entropy_of(&marginal) - conditional_entropy).max(0.0);
    }

    let value = (information_gain >= INFORMATION_FLOOR).then(|| numerator / information_gain);
    Ok(InformationRatio {
        value,
        numerator,
        information_gain,
        n_samples,
    })
}

enum ObservationModel {
    Bernoulli,
    /// Bin edges for `O = θ + N(0, 1)`; two open tails are added.
    Gaussian { edges: Vec<f64> },
}

impl ObservationModel {
    fn new(kind: RewardKind, means: &[f64]) -> Self {
        match kind {
            RewardKind::Bernoulli => ObservationModel::Bernoulli,
            RewardKind::Gaussian => {
                let lo = means.iter().copied().fold(f64::INFINITY, f64::min) - 4.0;
                let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 4.0;
                let width = (hi - lo) / GAUSSIAN_BINS as f64;
                let edges = (0..=GAUSSIAN_BINS).map(|i| lo + width * i as f64).collect();
                ObservationModel::Gaussian { edges }
            }
        }
    }

    fn n_outcomes(&self) -> usize {
        match self {
            ObservationModel::Bernoulli => 2,
            ObservationModel::Gaussian { edges } => edges.len() + 1,
        }
    }

    fn probs(&self, theta: f64, out: &mut [f64]) {
        match self {
            ObservationModel::Bernoulli => {
                let p = theta.clamp(0.0, 1.0);
                out[0] = 1.0 - p;
                out[1] = p;
            }
            ObservationModel::Gaussian { edges } => {
                let cdf = |x: f64| 0.5 * erfc(-(x - theta) / std::f64::consts::SQRT_2);
                let mut prev = 0.0;
                for (o, &e) in out.iter_mut().zip(edges) {
                    let c = cdf(e);
                    *o = (c - prev).max(0.0);
                    prev = c;
                }
                out[edges.len()] = (1.0 - prev).max(0.0);
            }
        }
    }
}

/// Frequencies with which `argmax_uniform` picks each arm over `n` posterior draws.
pub fn thompson_frequencies<R: Rng + ?Sized>(b: &BeliefState, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = b.sampler()?;
    let arms = sampler.n_arms();
    let mut counts = vec![0.0; arms];
    let mut row = vec![0.0; arms];
    for _ in 0..n {
        sampler.sample_into(rng, &mut row);
        counts[argmax_uniform(&row, rng)] += 1.0;
    }
    Ok(counts.iter().map(|c| c / n as f64).collect())
}

/// `Σ_t (R_t − R_{t+1})` over a rate series; telescopes to `R_1 − R_T`.
pub fn cumulative_rate_drop(rates: &[f64]) -> f64 {
    rates.windows(2).map(|w| w[0] - w[1]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{BlastsConfig, RateParam};
    use crate::rng::stream;

    #[test]
    fn optimal_action_entropy_examples() {
        let point = BeliefState::from_gaussian(&[0.0, 1.0, 0.5], &[1e-30; 3]).unwrap();
        let h = estimate_optimal_action_entropy(&point, 1000, &mut stream(1, 0)).unwrap();
        assert_eq!(h, 0.0);

        let k = 5;
        let exch = BeliefState::beta_prior(k, 1.0, 1.0).unwrap();
        let h = estimate_optimal_action_entropy(&exch, 100_000, &mut stream(2, 0)).unwrap();
        assert!((h - (k as f64).ln()).abs() < 0.05);

        assert!(estimate_optimal_action_entropy(&exch, 0, &mut stream(2, 0)).is_err());
    }

    #[test]
    fn ties_split_uniformly() {
        let counts = argmax_counts(&[1.0, 1.0, 0.0, 0.0, 2.0, 2.0], 3).unwrap();
        assert_eq!(counts, vec![0.5, 1.0, 0.5]);
    }

    #[test]
    fn identical_point_mass_arms_are_undefined() {
        let b = BeliefState::from_gaussian(&[0.5, 0.5], &[1e-300, 1e-300]).unwrap();
        let r = estimate_information_ratio(&b, &AgentConfig::Thompson, 2000, &mut stream(3, 0)).unwrap();
        assert!(r.numerator < 1e-20);
        assert!(r.information_gain < INFORMATION_FLOOR);
        assert!(r.value.is_none());
        assert_eq!(r.n_samples, 2000);
    }

    #[test]
    fn degenerate_posterior_has_zero_numerator() {
        let b = BeliefState::from_gaussian(&[0.0, 1.0], &[1e-300, 1e-300]).unwrap();
        let r = estimate_information_ratio(&b, &AgentConfig::Thompson, 500, &mut stream(4, 0)).unwrap();
        assert!(r.numerator < 1e-20);
        assert!(r.value.map_or(true, |v| v < 1e-12));
    }

    #[test]
    fn thompson_ratio_is_within_bandit_bound() {
        let b = BeliefState::beta_prior(10, 1.0, 1.0).unwrap();
        let r = estimate_information_ratio(&b, &AgentConfig::Thompson, 20_000, &mut stream(5, 0)).unwrap();
        let v = r.value.unwrap();
        assert!(v > 0.0 && v <= 5.0 * 1.5, "{r:?}");
    }

    #[test]
    fn blasts_and_gaussian_ratios_are_finite() {
        let b = BeliefState::gaussian_prior(4, 0.0, 1.0).unwrap();
        let cfg = AgentConfig::Blasts(BlastsConfig::new(RateParam::Beta(5.0), 1));
        let r = estimate_information_ratio(&b, &cfg, 2000, &mut stream(6, 0)).unwrap();
        assert!(r.information_gain > 0.0);
        assert!(r.value.unwrap().is_finite());
    }

    #[test]
    fn rate_drop_telescopes() {
        let rates = [2.0, 1.5, 1.7, 0.4];
        assert!((cumulative_rate_drop(&rates) - 1.6).abs() < 1e-15);
        assert_eq!(cumulative_rate_drop(&[1.0]), 0.0);
    }
}
