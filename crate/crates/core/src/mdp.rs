//! Finite-horizon tabular MDPs: Bellman operators, backward-induction
//! planning, exact policy evaluation and the value-equivalence distortion.
//!
//! Rewards and transitions are time-homogeneous; policies are non-stationary
//! (one stationary policy per timestep). Timesteps are 0-based here, so
//! `h = 0` is the first step of an episode and `V_H = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::NORMALIZATION_TOL;

/// Serialised layout of a [`TabularMdp`]: `reward` is `S × A` row-major and
/// `transition` is `S × A × S` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDocument {
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub reward: Vec<f64>,
    pub transition: Vec<f64>,
    pub init_dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpDocument", into = "MdpDocument")]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    reward: Vec<f64>,
    transition: Vec<f64>,
    init_dist: Vec<f64>,
}

impl TryFrom<MdpDocument> for TabularMdp {
    type Error = Error;

    fn try_from(d: MdpDocument) -> Result<Self> {
        TabularMdp::new(d.n_states, d.n_actions, d.horizon, d.reward, d.transition, d.init_dist)
    }
}

impl From<TabularMdp> for MdpDocument {
    fn from(m: TabularMdp) -> Self {
        MdpDocument {
            n_states: m.n_states,
            n_actions: m.n_actions,
            horizon: m.horizon,
            reward: m.reward,
            transition: m.transition,
            init_dist: m.init_dist,
        }
    }
}

fn check_simplex(v: &[f64], what: impl Fn() -> String) -> Result<()> {
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::validation(format!("{} has a negative or non-finite entry", what())));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::validation(format!("{} sums to {total}, not 1", what())));
    }
    Ok(())
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        reward: Vec<f64>,
        transition: Vec<f64>,
        init_dist: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::validation("MDP needs at least one state and one action"));
        }
        if horizon == 0 {
            return Err(Error::validation("horizon must be at least 1"));
        }
        let sa = n_states
            .checked_mul(n_actions)
            .ok_or_else(|| Error::validation("state-action space too large"))?;
        let sas = sa
            .checked_mul(n_states)
            .ok_or_else(|| Error::validation("transition tensor too large"))?;
        if reward.len() != sa {
            return Err(Error::Dimension {
                context: "reward table",
                expected: sa,
                actual: reward.len(),
            });
        }
        if transition.len() != sas {
            return Err(Error::Dimension {
                context: "transition tensor",
                expected: sas,
                actual: transition.len(),
            });
        }
        if init_dist.len() != n_states {
            return Err(Error::Dimension {
                context: "initial distribution",
                expected: n_states,
                actual: init_dist.len(),
            });
        }
        if let Some((i, r)) = reward
            .iter()
            .enumerate()
            .find(|(_, r)| !(0.0..=1.0).contains(*r))
        {
            return Err(Error::validation(format!(
                "reward entry {i} is {r}; rewards must lie in [0, 1]"
            )));
        }
        for (i, row) in transition.chunks(n_states).enumerate() {
            check_simplex(row, || {
                format!("transition row (s={}, a={})", i / n_actions, i % n_actions)
            })?;
        }
        check_simplex(&init_dist, || "initial distribution".to_string())?;
        Ok(Self {
            n_states,
            n_actions,
            horizon,
            reward,
            transition,
            init_dist,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MdpDocument =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("MDP JSON: {e}")))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MdpDocument::from(self.clone())).expect("MDP serialises")
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

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transition
    }

    fn same_shape(&self, other: &TabularMdp) -> Result<()> {
        if self.n_states != other.n_states || self.n_actions != other.n_actions || self.horizon != other.horizon {
            return Err(Error::Dimension {
                context: "MDP shapes (states, actions, horizon)",
                expected: self.n_states * self.n_actions * self.horizon,
                actual: other.n_states * other.n_actions * other.horizon,
            });
        }
        Ok(())
    }

    /// `Q(s, a) = U(s, a) + Σ_s' T(s' | s, a) V(s')`, row-major `S × A`.
    pub fn q_values(&self, v_next: &[f64]) -> Result<Vec<f64>> {
        self.check_values(v_next)?;
        let mut q = Vec::with_capacity(self.n_states * self.n_actions);
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let ev: f64 = self
                    .transition_row(s, a)
                    .iter()
                    .zip(v_next)
                    .map(|(p, v)| p * v)
                    .sum();
                q.push(self.reward(s, a) + ev);
            }
        }
        Ok(q)
    }

    fn check_values(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_states {
            return Err(Error::Dimension {
                context: "value vector",
                expected: self.n_states,
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// `Σ_s β(s) V(s)`.
    pub fn start_value(&self, v: &[f64]) -> f64 {
        self.init_dist.iter().zip(v).map(|(p, x)| p * x).sum()
    }
}

/// Stationary stochastic policy, row-major `S × A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl StationaryPolicy {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions || n_actions == 0 {
            return Err(Error::Dimension {
                context: "policy table",
                expected: n_states * n_actions,
                actual: probs.len(),
            });
        }
        for (s, row) in probs.chunks(n_actions).enumerate() {
            check_simplex(row, || format!("policy row for state {s}"))?;
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::IndexOutOfRange {
                    what: "actions",
                    index: a,
                    len: n_actions,
                });
            }
            probs[s * n_actions + a] = 1.0;
        }
        Self::new(actions.len(), n_actions, probs)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Result<Self> {
        Self::new(n_states, n_actions, vec![1.0 / n_actions as f64; n_states * n_actions])
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    /// The chosen action per state when the policy is deterministic.
    pub fn greedy_actions(&self) -> Option<Vec<usize>> {
        (0..self.n_states)
            .map(|s| self.row(s).iter().position(|&p| p == 1.0))
            .collect()
    }
}

/// `(π_0, …, π_{H−1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonStationaryPolicy {
    steps: Vec<StationaryPolicy>,
}

impl NonStationaryPolicy {
    pub fn new(steps: Vec<StationaryPolicy>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::validation("policy needs at least one timestep"))?;
        let (s, a) = (first.n_states, first.n_actions);
        if steps.iter().any(|p| p.n_states != s || p.n_actions != a) {
            return Err(Error::validation("all timesteps of a policy must share one shape"));
        }
        Ok(Self { steps })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, h: usize) -> &StationaryPolicy {
        &self.steps[h]
    }

    pub fn steps(&self) -> &[StationaryPolicy] {
        &self.steps
    }

    /// Concatenated greedy actions over all `(h, s)`, when deterministic.
    pub fn action_profile(&self) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        for p in &self.steps {
            out.extend(p.greedy_actions()?);
        }
        Some(out)
    }
}

/// `V_h(s)` for `h = 0..H`; `V_H = 0` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    values: Vec<Vec<f64>>,
}

impl ValueTable {
    pub fn at(&self, h: usize) -> &[f64] {
        &self.values[h]
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.iter().map(Vec::as_slice)
    }
}

fn check_policy_shape(m: &TabularMdp, pi: &StationaryPolicy) -> Result<()> {
    if pi.n_states != m.n_states || pi.n_actions != m.n_actions {
        return Err(Error::Dimension {
            context: "policy vs MDP (states × actions)",
            expected: m.n_states * m.n_actions,
            actual: pi.n_states * pi.n_actions,
        });
    }
    Ok(())
}

/// `(B^π V)(s) = Σ_a π(a|s) [U(s,a) + Σ_s' T(s'|s,a) V(s')]`.
pub fn bellman_apply(m: &TabularMdp, pi: &StationaryPolicy, v: &[f64]) -> Result<Vec<f64>> {
    check_policy_shape(m, pi)?;
    let q = m.q_values(v)?;
    Ok(q.chunks(m.n_actions)
        .enumerate()
        .map(|(s, qs)| qs.iter().zip(pi.row(s)).map(|(q, p)| q * p).sum())
        .collect())
}

/// Backward induction. The returned policy puts all mass on the lowest-index
/// maximiser of `Q_h(s, ·)`.
pub fn solve_optimal(m: &TabularMdp) -> (NonStationaryPolicy, ValueTable) {
    let (ns, na) = (m.n_states, m.n_actions);
    let mut values = vec![Vec::new(); m.horizon];
    let mut steps = Vec::with_capacity(m.horizon);
    let mut next = vec![0.0; ns];
    for h in (0..m.horizon).rev() {
        let q = m.q_values(&next).expect("value vector matches MDP");
        let mut v = vec![0.0; ns];
        let mut actions = vec![0usize; ns];
        for (s, qs) in q.chunks(na).enumerate() {
            let mut best = 0;
            for a in 1..na {
                if qs[a] > qs[best] {
                    best = a;
                }
            }
            actions[s] = best;
            v[s] = qs[best];
        }
        steps.push(StationaryPolicy::deterministic(&actions, na).expect("actions in range"));
        values[h] = v.clone();
        next = v;
    }
    steps.reverse();
    (NonStationaryPolicy { steps }, ValueTable { values })
}

/// Exact evaluation of `pi` by backward recursion `V_h = B^{π_h} V_{h+1}`.
pub fn policy_value(m: &TabularMdp, pi: &NonStationaryPolicy) -> Result<ValueTable> {
    if pi.horizon() != m.horizon {
        return Err(Error::Dimension {
            context: "policy horizon",
            expected: m.horizon,
            actual: pi.horizon(),
        });
    }
    let mut values = vec![Vec::new(); m.horizon];
    let mut next = vec![0.0; m.n_states];
    for h in (0..m.horizon).rev() {
        let v = bellman_apply(m, pi.step(h), &next)?;
        values[h] = v.clone();
        next = v;
    }
    Ok(ValueTable { values })
}

/// Supremal squared Bellman error between two models over `pis × vs`:
/// `max_{π, V} (max_s |B^π_M V(s) − B^π_M̂ V(s)|)²`.
pub fn ve_distortion(
    m: &TabularMdp,
    mhat: &TabularMdp,
    pis: &[StationaryPolicy],
    vs: &[Vec<f64>],
) -> Result<f64> {
    let sets = DistortionSets::new(m.n_states, m.n_actions, pis.to_vec(), vs.to_vec())?;
    sets.distortion(m, mhat)
}

/// Policy and value-function classes for [`ve_distortion`], pre-processed so
/// that many model pairs can be scored cheaply.
#[derive(Debug, Clone)]
pub struct DistortionSets {
    n_states: usize,
    n_actions: usize,
    /// Per policy, per state: the `(action, prob)` pairs with non-zero mass.
    supports: Vec<Vec<Vec<(usize, f64)>>>,
    values: Vec<Vec<f64>>,
}

impl DistortionSets {
    pub fn new(n_states: usize, n_actions: usize, pis: Vec<StationaryPolicy>, vs: Vec<Vec<f64>>) -> Result<Self> {
        if pis.is_empty() || vs.is_empty() {
            return Err(Error::validation("policy and value sets must be non-empty"));
        }
        for p in &pis {
            if p.n_states != n_states || p.n_actions != n_actions {
                return Err(Error::Dimension {
                    context: "distortion policy set",
                    expected: n_states * n_actions,
                    actual: p.n_states * p.n_actions,
                });
            }
        }
        if let Some(v) = vs.iter().find(|v| v.len() != n_states) {
            return Err(Error::Dimension {
                context: "distortion value set",
                expected: n_states,
                actual: v.len(),
            });
        }
        let mut supports: Vec<Vec<Vec<(usize, f64)>>> = pis
            .iter()
            .map(|p| {
                (0..n_states)
                    .map(|s| {
                        p.row(s)
                            .iter()
                            .enumerate()
                            .filter(|(_, &pr)| pr > 0.0)
                            .map(|(a, &pr)| (a, pr))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        supports.dedup();
        let mut values = vs;
        values.dedup();
        Ok(Self {
            n_states,
            n_actions,
            supports,
            values,
        })
    }

    pub fn n_policies(&self) -> usize {
        self.supports.len()
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn distortion(&self, m: &TabularMdp, mhat: &TabularMdp) -> Result<f64> {
        m.same_shape(mhat)?;
        if m.n_states != self.n_states || m.n_actions != self.n_actions {
            return Err(Error::Dimension {
                context: "distortion sets vs MDP",
                expected: self.n_states * self.n_actions,
                actual: m.n_states * m.n_actions,
            });
        }
        let (ns, na) = (self.n_states, self.n_actions);
        let mut gap = vec![0.0; ns * na];
        let mut worst = 0.0f64;
        for v in &self.values {
            // gap(s, a) = ΔU(s, a) + Σ_s' ΔT(s' | s, a) V(s')
            for s in 0..ns {
                for a in 0..na {
                    let t = m.transition_row(s, a);
                    let th = mhat.transition_row(s, a);
                    let mut g = m.reward(s, a) - mhat.reward(s, a);
                    for ((p, ph), x) in t.iter().zip(th).zip(v) {
                        g += (p - ph) * x;
                    }
                    gap[s * na + a] = g;
                }
            }
            for support in &self.supports {
                for (s, acts) in support.iter().enumerate() {
                    let diff: f64 = acts.iter().map(|&(a, p)| p * gap[s * na + a]).sum();
                    worst = worst.max(diff.abs());
                }
            }
        }
        Ok(worst * worst)
    }
}
