//! Experiment configuration: typed schema, `key=value` overrides and
//! diagnostics that point at the offending line and field.

use std::fmt;

use serde::de::{self, DeserializeSeed, Deserializer, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::{AgentConfig, BlastsConfig, DistortionKind, RateParam};
use crate::bandit::{BeliefState, RewardKind};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::mdp_agents::{MdpAgentConfig, MdpPosterior, VsrlConfig};
use crate::rd::BaConfig;

pub const DEFAULT_SEEDS: u64 = 30;
pub const DEFAULT_HORIZON: u64 = 2000;
pub const DEFAULT_EPISODES: usize = 500;
pub const DEFAULT_RATE_SAMPLES: usize = 1000;
pub const DEFAULT_BLASTS_Z: usize = 1000;
pub const DEFAULT_SWEEP_Z: usize = 50_000;
pub const DEFAULT_CURVE_Z: usize = 1000;
pub const DEFAULT_TS_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BanditRegret,
    BanditRate,
    RdCurve,
    MarginalSweep,
    MdpRegret,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::BanditRegret => "bandit-regret",
            ExperimentKind::BanditRate => "bandit-rate",
            ExperimentKind::RdCurve => "rd-curve",
            ExperimentKind::MarginalSweep => "marginal-sweep",
            ExperimentKind::MdpRegret => "mdp-regret",
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEEDS).collect()
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_episodes() -> usize {
    DEFAULT_EPISODES
}

fn default_rate_samples() -> usize {
    DEFAULT_RATE_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Free-form provenance notes; copied into the run manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<Value>,
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Steps per seed for bandit kinds.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Episodes per seed for `mdp-regret`.
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Posterior draws behind the TS/STS rate diagnostic.
    #[serde(default = "default_rate_samples")]
    pub rate_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Bandit(BanditSpec),
    Mdp(MdpSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditSpec {
    pub reward: RewardKind,
    /// Inferred from per-arm prior vectors when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_arms: Option<usize>,
    #[serde(default)]
    pub prior: PriorSpec,
    /// Debugging aid: use these true means instead of drawing them from the prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_means: Option<Vec<f64>>,
}

/// Per-arm conjugate prior. Scalars apply to every arm; vectors set each arm.
/// Bernoulli uses `alpha`/`beta`, Gaussian uses `mean`/`std`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stds: Option<Vec<f64>>,
}

fn default_concentration() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    /// Dirichlet prior concentration per next state.
    #[serde(default = "default_concentration")]
    pub concentration: f64,
    /// Defaults to starting in state 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_dist: Option<Vec<f64>>,
    /// Planner-only mode: mean rewards known, row-major `S × A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_rewards: Option<Vec<f64>>,
    /// Debugging aid: fixed true MDP instead of a prior draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_mdp: Option<TabularMdp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Ts,
    Sts,
    Blasts,
    Psrl,
    Vsrl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub name: String,
    pub kind: AgentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Information cost in reward per nat; `beta = 1 / lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ba: Option<BaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionKind>,
}

/// Grids and solver settings for `rd-curve` and `marginal-sweep`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts_samples: Option<usize>,
    #[serde(default)]
    pub distortion: DistortionKind,
    #[serde(default)]
    pub ba: BaConfig,
}

/// A path into the config document, e.g. `agents[1].lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathSegment {
    Key(String),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FieldPath(pub Vec<PathSegment>);

impl FieldPath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn key(mut self, k: impl Into<String>) -> Self {
        self.0.push(PathSegment::Key(k.into()));
        self
    }

    pub fn index(mut self, i: usize) -> Self {
        self.0.push(PathSegment::Index(i));
        self
    }
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<root>");
        }
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                PathSegment::Key(k) if i == 0 => write!(f, "{k}")?,
                PathSegment::Key(k) => write!(f, ".{k}")?,
                PathSegment::Index(n) => write!(f, "[{n}]")?,
            }
        }
        Ok(())
    }
}

/// A semantic problem found after the document deserialised.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: FieldPath,
    pub message: String,
}

fn issue(path: FieldPath, message: impl Into<String>) -> Issue {
    Issue {
        path,
        message: message.into(),
    }
}

/// One `--set key=value` override. The value is parsed as JSON when possible
/// and kept as a string otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: FieldPath,
    pub value: Value,
    pub raw: String,
}

pub fn parse_override(raw: &str) -> Result<Override> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::config(raw, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(raw, "override key is empty"));
    }
    let mut path = FieldPath::root();
    for part in key.split('.') {
        let (name, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if name.is_empty() && rest.is_empty() {
            return Err(Error::config(key, "override key has an empty segment"));
        }
        if !name.is_empty() {
            path = match name.parse::<usize>() {
                Ok(i) => path.index(i),
                Err(_) => path.key(name),
            };
        }
        while !rest.is_empty() {
            let close = rest
                .find(']')
                .ok_or_else(|| Error::config(key, "unclosed `[` in override key"))?;
            let idx = rest[1..close]
                .parse::<usize>()
                .map_err(|_| Error::config(key, "array index in override key is not a non-negative integer"))?;
            path = path.index(idx);
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(Error::config(key, "unexpected text after `]` in override key"));
            }
        }
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok(Override {
        path,
        value,
        raw: raw.to_string(),
    })
}

/// Sets `o.path` in `doc`, creating intermediate objects as needed. Array
/// indices must already exist.
pub fn apply_override(doc: &mut Value, o: &Override) -> Result<()> {
    let fail = |msg: &str| Error::config(o.path.to_string(), format!("cannot apply `{}`: {msg}", o.raw));
    let Some((last, parents)) = o.path.0.split_last() else {
        return Err(fail("empty path"));
    };
    let mut node = doc;
    for seg in parents {
        node = match seg {
            PathSegment::Key(k) => {
                let obj = node.as_object_mut().ok_or_else(|| fail("parent is not an object"))?;
                obj.entry(k.clone()).or_insert_with(|| Value::Object(Default::default()))
            }
            PathSegment::Index(i) => node
                .as_array_mut()
                .ok_or_else(|| fail("parent is not an array"))?
                .get_mut(*i)
                .ok_or_else(|| fail("array index out of range"))?,
        };
    }
    match last {
        PathSegment::Key(k) => {
            node.as_object_mut()
                .ok_or_else(|| fail("parent is not an object"))?
                .insert(k.clone(), o.value.clone());
        }
        PathSegment::Index(i) => {
            *node
                .as_array_mut()
                .ok_or_else(|| fail("parent is not an array"))?
                .get_mut(*i)
                .ok_or_else(|| fail("array index out of range"))? = o.value.clone();
        }
    }
    Ok(())
}

const LOCATED: &str = "\u{0}located";

struct Locate<'p>(&'p [PathSegment]);

impl<'de> DeserializeSeed<'de> for Locate<'_> {
    type Value = ();

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<(), D::Error> {
        match self.0.split_first() {
            None => Err(de::Error::custom(LOCATED)),
            Some((seg, rest)) => d.deserialize_any(LocateVisitor { seg, rest }),
        }
    }
}

struct LocateVisitor<'p> {
    seg: &'p PathSegment,
    rest: &'p [PathSegment],
}

impl<'de> Visitor<'de> for LocateVisitor<'_> {
    type Value = ();

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("any JSON value")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<(), A::Error> {
        while let Some(key) = map.next_key::<String>()? {
            match self.seg {
                PathSegment::Key(k) if *k == key => map.next_value_seed(Locate(self.rest))?,
                _ => {
                    map.next_value::<IgnoredAny>()?;
                }
            }
        }
        Ok(())
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<(), A::Error> {
        let mut i = 0;
        loop {
            let found = match self.seg {
                PathSegment::Index(n) if *n == i => seq.next_element_seed(Locate(self.rest))?,
                _ => seq.next_element::<IgnoredAny>()?.map(|_| ()),
            };
            if found.is_none() {
                return Ok(());
            }
            i += 1;
        }
    }

    fn visit_bool<E>(self, _: bool) -> std::result::Result<(), E> {
        Ok(())
    }

    fn visit_i64<E>(self, _: i64) -> std::result::Result<(), E> {
        Ok(())
    }

    fn visit_u64<E>(self, _: u64) -> std::result::Result<(), E> {
        Ok(())
    }

    fn visit_f64<E>(self, _: f64) -> std::result::Result<(), E> {
        Ok(())
    }

    fn visit_str<E>(self, _: &str) -> std::result::Result<(), E> {
        Ok(())
    }

    fn visit_unit<E>(self) -> std::result::Result<(), E> {
        Ok(())
    }
}

/// 1-based line of the deepest existing prefix of `path` in `text`.
pub fn locate_line(text: &str, path: &FieldPath) -> Option<usize> {
    for len in (1..=path.0.len()).rev() {
        let mut de = serde_json::Deserializer::from_str(text);
        if let Err(e) = Locate(&path.0[..len]).deserialize(&mut de) {
            if e.to_string().starts_with(LOCATED) && e.line() > 0 {
                return Some(e.line());
            }
        }
    }
    None
}

fn from_serde_path(p: &serde_path_to_error::Path) -> FieldPath {
    use serde_path_to_error::Segment;
    let mut out = FieldPath::root();
    for seg in p.iter() {
        out = match seg {
            Segment::Seq { index } => out.index(*index),
            Segment::Map { key } => out.key(key.clone()),
            Segment::Enum { variant } => out.key(variant.clone()),
            Segment::Unknown => out,
        };
    }
    out
}

/// Extracts `x` from serde's "unknown field `x`, expected ..." message.
fn unknown_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(&rest[..rest.find('`')?])
}

/// Parses `text`, applies `overrides` in order and validates the result.
pub fn parse_config(text: &str, overrides: &[Override]) -> Result<ExperimentConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Config {
        field: "<document>".into(),
        line: (e.line() > 0).then_some(e.line()),
        message: format!("invalid JSON: {e}"),
    })?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let overridden = |p: &FieldPath| overrides.iter().any(|o| p.0.starts_with(&o.path.0));
    let located = |p: &FieldPath, message: String| {
        let suffix = if overridden(p) { " (value set by override)" } else { "" };
        Error::Config {
            field: p.to_string(),
            line: locate_line(text, p),
            message: format!("{message}{suffix}"),
        }
    };
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let mut path = from_serde_path(e.path());
        let message = e.inner().to_string();
        if let Some(k) = unknown_field(&message) {
            if path.0.last() != Some(&PathSegment::Key(k.to_string())) {
                path = path.key(k);
            }
        }
        located(&path, message)
    })?;
    cfg.check().map_err(|i| located(&i.path, i.message))?;
    Ok(cfg)
}

impl PriorSpec {
    fn arm_count(&self) -> Option<usize> {
        [&self.alphas, &self.betas, &self.means, &self.stds]
            .into_iter()
            .flatten()
            .map(Vec::len)
            .next()
    }

    /// Builds the prior belief for `n` arms.
    pub fn belief(&self, kind: RewardKind, n: usize) -> std::result::Result<BeliefState, (String, String)> {
        let per_arm = |scalar: Option<f64>, vector: &Option<Vec<f64>>, name: &str, vname: &str, default: f64| {
            match (scalar, vector) {
                (Some(_), Some(_)) => Err((name.to_string(), format!("set either `{name}` or `{vname}`, not both"))),
                (None, Some(v)) if v.len() != n => {
                    Err((vname.to_string(), format!("has {} entries for {n} arms", v.len())))
                }
                (None, Some(v)) => Ok(v.clone()),
                (s, None) => Ok(vec![s.unwrap_or(default); n]),
            }
        };
        match kind {
            RewardKind::Bernoulli => {
                if self.mean.is_some() || self.std.is_some() || self.means.is_some() || self.stds.is_some() {
                    return Err(("mean".into(), "Bernoulli priors take alpha/beta, not mean/std".into()));
                }
                let a = per_arm(self.alpha, &self.alphas, "alpha", "alphas", 1.0)?;
                let b = per_arm(self.beta, &self.betas, "beta", "betas", 1.0)?;
                let params: Vec<(f64, f64)> = a.into_iter().zip(b).collect();
                BeliefState::from_beta(&params).map_err(|e| ("alpha".into(), e.to_string()))
            }
            RewardKind::Gaussian => {
                if self.alpha.is_some() || self.beta.is_some() || self.alphas.is_some() || self.betas.is_some() {
                    return Err(("alpha".into(), "Gaussian priors take mean/std, not alpha/beta".into()));
                }
                let m = per_arm(self.mean, &self.means, "mean", "means", 0.0)?;
                let s = per_arm(self.std, &self.stds, "std", "stds", 1.0)?;
                if let Some(bad) = s.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(("std".into(), format!("standard deviation {bad} must be positive")));
                }
                let vars: Vec<f64> = s.iter().map(|v| v * v).collect();
                BeliefState::from_gaussian(&m, &vars).map_err(|e| ("mean".into(), e.to_string()))
            }
        }
    }
}

impl BanditSpec {
    pub fn arms(&self) -> Option<usize> {
        self.n_arms.or_else(|| self.prior.arm_count())
    }

    pub fn prior_belief(&self) -> Result<BeliefState> {
        let n = self.arms().ok_or_else(|| Error::config("environment.bandit.n_arms", "missing"))?;
        self.prior
            .belief(self.reward, n)
            .map_err(|(f, m)| Error::config(format!("environment.bandit.prior.{f}"), m))
    }
}

impl MdpSpec {
    pub fn init(&self) -> Vec<f64> {
        self.init_dist.clone().unwrap_or_else(|| {
            let mut v = vec![0.0; self.n_states];
            if let Some(first) = v.first_mut() {
                *first = 1.0;
            }
            v
        })
    }

    pub fn prior(&self) -> Result<MdpPosterior> {
        let post = MdpPosterior::uniform_prior(
            self.n_states,
            self.n_actions,
            self.horizon,
            self.init(),
            self.concentration,
        )?;
        match &self.known_rewards {
            Some(r) => post.with_known_rewards(r.clone()),
            None => Ok(post),
        }
    }
}

impl AgentSpec {
    fn rate_param(&self, at: &FieldPath) -> std::result::Result<RateParam, Issue> {
        match (self.lambda, self.beta) {
            (Some(_), Some(_)) => Err(issue(at.clone().key("beta"), "set either `lambda` or `beta`, not both")),
            (Some(l), None) if l.is_nan() || l < 0.0 => Err(issue(at.clone().key("lambda"), "must be non-negative")),
            (None, Some(b)) if b.is_nan() || b < 0.0 => Err(issue(at.clone().key("beta"), "must be non-negative")),
            (Some(l), None) => Ok(RateParam::Lambda(l)),
            (None, Some(b)) => Ok(RateParam::Beta(b)),
            (None, None) => Err(issue(at.clone().key("lambda"), "one of `lambda` or `beta` is required")),
        }
    }

    fn reject(&self, at: &FieldPath, fields: &[(&str, bool)]) -> std::result::Result<(), Issue> {
        for (name, present) in fields {
            if *present {
                return Err(issue(
                    at.clone().key(*name),
                    format!("not used by agent kind `{}`", serde_json::to_value(self.kind).unwrap().as_str().unwrap()),
                ));
            }
        }
        Ok(())
    }

    fn check_z_and_ba(&self, at: &FieldPath) -> std::result::Result<(), Issue> {
        if self.z_samples == Some(0) {
            return Err(issue(at.clone().key("z_samples"), "must be at least 1"));
        }
        if let Some(ba) = &self.ba {
            ba.validate().map_err(|e| issue(at.clone().key("ba"), e.to_string()))?;
        }
        Ok(())
    }

    fn bandit_at(&self, at: &FieldPath) -> std::result::Result<AgentConfig, Issue> {
        match self.kind {
            AgentKind::Ts => {
                self.reject(
                    at,
                    &[
                        ("epsilon", self.epsilon.is_some()),
                        ("lambda", self.lambda.is_some()),
                        ("beta", self.beta.is_some()),
                        ("z_samples", self.z_samples.is_some()),
                        ("ba", self.ba.is_some()),
                        ("distortion", self.distortion.is_some()),
                    ],
                )?;
                Ok(AgentConfig::Thompson)
            }
            AgentKind::Sts => {
                self.reject(
                    at,
                    &[
                        ("lambda", self.lambda.is_some()),
                        ("beta", self.beta.is_some()),
                        ("z_samples", self.z_samples.is_some()),
                        ("ba", self.ba.is_some()),
                        ("distortion", self.distortion.is_some()),
                    ],
                )?;
                let epsilon = self
                    .epsilon
                    .ok_or_else(|| issue(at.clone().key("epsilon"), "required for STS"))?;
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(issue(at.clone().key("epsilon"), "must be finite and non-negative"));
                }
                Ok(AgentConfig::Satisficing { epsilon })
            }
            AgentKind::Blasts => {
                self.reject(at, &[("epsilon", self.epsilon.is_some())])?;
                self.check_z_and_ba(at)?;
                let rate = self.rate_param(at)?;
                Ok(AgentConfig::Blasts(
                    BlastsConfig::new(rate, self.z_samples.unwrap_or(DEFAULT_BLASTS_Z))
                        .with_distortion(self.distortion.unwrap_or_default())
                        .with_ba(self.ba.unwrap_or_default()),
                ))
            }
            AgentKind::Psrl | AgentKind::Vsrl => {
                Err(issue(at.clone().key("kind"), "MDP agents need an `mdp` environment"))
            }
        }
    }

    fn mdp_at(&self, at: &FieldPath) -> std::result::Result<MdpAgentConfig, Issue> {
        match self.kind {
            AgentKind::Psrl => {
                self.reject(
                    at,
                    &[
                        ("epsilon", self.epsilon.is_some()),
                        ("lambda", self.lambda.is_some()),
                        ("beta", self.beta.is_some()),
                        ("z_samples", self.z_samples.is_some()),
                        ("ba", self.ba.is_some()),
                        ("distortion", self.distortion.is_some()),
                    ],
                )?;
                Ok(MdpAgentConfig::Psrl)
            }
            AgentKind::Vsrl => {
                self.reject(
                    at,
                    &[("epsilon", self.epsilon.is_some()), ("distortion", self.distortion.is_some())],
                )?;
                self.check_z_and_ba(at)?;
                let beta = self.rate_param(at)?.beta();
                let mut cfg = VsrlConfig::new(beta);
                if let Some(z) = self.z_samples {
                    cfg.z_samples = z;
                }
                if let Some(ba) = self.ba {
                    cfg.ba = ba;
                }
                Ok(MdpAgentConfig::Vsrl(cfg))
            }
            _ => Err(issue(at.clone().key("kind"), "bandit agents need a `bandit` environment")),
        }
    }

    pub fn bandit_config(&self) -> Result<AgentConfig> {
        self.bandit_at(&FieldPath::root())
            .map_err(|i| Error::config(i.path.to_string(), i.message))
    }

    pub fn mdp_config(&self) -> Result<MdpAgentConfig> {
        self.mdp_at(&FieldPath::root())
            .map_err(|i| Error::config(i.path.to_string(), i.message))
    }
}

fn check_grid(at: FieldPath, grid: &[f64], what: &str) -> std::result::Result<(), Issue> {
    if grid.is_empty() {
        return Err(issue(at, format!("{what} grid must not be empty")));
    }
    if grid.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(issue(at, format!("{what} values must be non-negative")));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(issue(at, format!("{what} grid must be sorted ascending")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_config(text, &[])
    }

    /// Semantic checks beyond the schema; the issue carries the field path.
    pub fn check(&self) -> std::result::Result<(), Issue> {
        let root = FieldPath::root;
        if self.seeds.is_empty() {
            return Err(issue(root().key("seeds"), "at least one seed is required"));
        }
        let bandit_kind = matches!(
            self.kind,
            ExperimentKind::BanditRegret
                | ExperimentKind::BanditRate
                | ExperimentKind::RdCurve
                | ExperimentKind::MarginalSweep
        );
        match (&self.environment, bandit_kind) {
            (EnvironmentSpec::Bandit(b), true) => self.check_bandit_env(b)?,
            (EnvironmentSpec::Mdp(m), false) => self.check_mdp_env(m)?,
            _ => {
                return Err(issue(
                    root().key("environment"),
                    format!("environment type does not match kind `{}`", self.kind.as_str()),
                ))
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            let at = root().key("agents").index(i);
            if a.name.is_empty() || a.name.contains([',', '"', '\n', '\r']) {
                return Err(issue(at.key("name"), "agent names must be non-empty and free of commas, quotes and newlines"));
            }
            if !names.insert(a.name.as_str()) {
                return Err(issue(at.key("name"), format!("duplicate agent name `{}`", a.name)));
            }
            if bandit_kind {
                a.bandit_at(&at)?;
            } else {
                a.mdp_at(&at)?;
            }
        }
        match self.kind {
            ExperimentKind::BanditRegret | ExperimentKind::BanditRate => {
                if self.agents.is_empty() {
                    return Err(issue(root().key("agents"), "at least one agent is required"));
                }
                if self.horizon == 0 {
                    return Err(issue(root().key("horizon"), "must be at least 1"));
                }
                if self.rate_samples == 0 {
                    return Err(issue(root().key("rate_samples"), "must be at least 1"));
                }
                if self.sweep.is_some() {
                    return Err(issue(root().key("sweep"), "only used by rd-curve and marginal-sweep"));
                }
            }
            ExperimentKind::MdpRegret => {
                if self.agents.is_empty() {
                    return Err(issue(root().key("agents"), "at least one agent is required"));
                }
                if self.episodes == 0 {
                    return Err(issue(root().key("episodes"), "must be at least 1"));
                }
                if self.sweep.is_some() {
                    return Err(issue(root().key("sweep"), "only used by rd-curve and marginal-sweep"));
                }
            }
            ExperimentKind::RdCurve | ExperimentKind::MarginalSweep => {
                if !self.agents.is_empty() {
                    return Err(issue(root().key("agents"), "sweeps take their grids from `sweep`; leave `agents` empty"));
                }
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| issue(root().key("sweep"), "required for this kind"))?;
                let at = root().key("sweep");
                if self.kind == ExperimentKind::RdCurve {
                    check_grid(at.clone().key("betas"), &sweep.betas, "beta")?;
                    check_grid(at.clone().key("epsilons"), &sweep.epsilons, "epsilon")?;
                    if !sweep.lambdas.is_empty() {
                        return Err(issue(at.key("lambdas"), "rd-curve sweeps `betas` and `epsilons`"));
                    }
                } else {
                    check_grid(at.clone().key("lambdas"), &sweep.lambdas, "lambda")?;
                    if !sweep.betas.is_empty() || !sweep.epsilons.is_empty() {
                        return Err(issue(at.key("betas"), "marginal-sweep sweeps `lambdas` only"));
                    }
                }
                if sweep.z_samples == Some(0) {
                    return Err(issue(at.key("z_samples"), "must be at least 1"));
                }
                if sweep.ts_samples == Some(0) {
                    return Err(issue(at.key("ts_samples"), "must be at least 1"));
                }
                sweep
                    .ba
                    .validate()
                    .map_err(|e| issue(root().key("sweep").key("ba"), e.to_string()))?;
            }
        }
        Ok(())
    }

    fn check_bandit_env(&self, b: &BanditSpec) -> std::result::Result<(), Issue> {
        let at = FieldPath::root().key("environment").key("bandit");
        let n = b
            .arms()
            .ok_or_else(|| issue(at.clone().key("n_arms"), "required unless the prior lists per-arm values"))?;
        if n == 0 {
            return Err(issue(at.key("n_arms"), "must be at least 1"));
        }
        if let (Some(declared), Some(listed)) = (b.n_arms, b.prior.arm_count()) {
            if declared != listed {
                return Err(issue(at.key("n_arms"), format!("is {declared} but the prior lists {listed} arms")));
            }
        }
        b.prior
            .belief(b.reward, n)
            .map_err(|(f, m)| issue(at.clone().key("prior").key(f), m))?;
        if let Some(means) = &b.fixed_means {
            if means.len() != n {
                return Err(issue(at.key("fixed_means"), format!("has {} entries for {n} arms", means.len())));
            }
            crate::bandit::BanditEnv::new(b.reward, means.clone())
                .map_err(|e| issue(at.key("fixed_means"), e.to_string()))?;
        }
        Ok(())
    }

    fn check_mdp_env(&self, m: &MdpSpec) -> std::result::Result<(), Issue> {
        let at = FieldPath::root().key("environment").key("mdp");
        for (name, v) in [("n_states", m.n_states), ("n_actions", m.n_actions), ("horizon", m.horizon)] {
            if v == 0 {
                return Err(issue(at.key(name), "must be at least 1"));
            }
        }
        if !(m.concentration.is_finite() && m.concentration > 0.0) {
            return Err(issue(at.key("concentration"), "must be positive"));
        }
        let prior = m.prior().map_err(|e| {
            let field = if m.known_rewards.is_some() && e.to_string().contains("reward") {
                "known_rewards"
            } else {
                "init_dist"
            };
            issue(at.clone().key(field), e.to_string())
        })?;
        if let Some(fixed) = &m.fixed_mdp {
            if fixed.n_states() != m.n_states || fixed.n_actions() != m.n_actions || fixed.horizon() != m.horizon {
                return Err(issue(at.key("fixed_mdp"), "shape differs from n_states/n_actions/horizon"));
            }
            if fixed.init_dist() != prior.init_dist() {
                return Err(issue(at.key("fixed_mdp"), "init_dist differs from the environment's init_dist"));
            }
        }
        Ok(())
    }

    /// Named bandit agent configurations, in config order.
    pub fn bandit_agents(&self) -> Result<Vec<(String, AgentConfig)>> {
        self.agents
            .iter()
            .map(|a| Ok((a.name.clone(), a.bandit_config()?)))
            .collect()
    }

    pub fn mdp_agents(&self) -> Result<Vec<(String, MdpAgentConfig)>> {
        self.agents
            .iter()
            .map(|a| Ok((a.name.clone(), a.mdp_config()?)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "kind": "bandit-regret",
  "environment": {"bandit": {"reward": "bernoulli", "n_arms": 3}},
  "agents": [
    {"name": "ts", "kind": "ts"},
    {"name": "blasts", "kind": "blasts", "beta": 10.0, "z_samples": 20}
  ],
  "horizon": 5,
  "seeds": [1, 2]
}"#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg = ExperimentConfig::from_json(GOOD).unwrap();
        assert_eq!(cfg.rate_samples, DEFAULT_RATE_SAMPLES);
        let agents = cfg.bandit_agents().unwrap();
        assert_eq!(agents[0].1, AgentConfig::Thompson);
        match &agents[1].1 {
            AgentConfig::Blasts(b) => {
                assert_eq!(b.z_samples, 20);
                assert_eq!(b.rate, RateParam::Beta(10.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn type_error_reports_line_and_field() {
        let bad = GOOD.replace("\"beta\": 10.0", "\"beta\": \"ten\"");
        match ExperimentConfig::from_json(&bad).unwrap_err() {
            Error::Config { field, line, .. } => {
                assert_eq!(field, "agents[1].beta");
                assert_eq!(line, Some(6));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn semantic_error_reports_line_and_field() {
        let bad = GOOD.replace("\"z_samples\": 20", "\"z_samples\": 0");
        match ExperimentConfig::from_json(&bad).unwrap_err() {
            Error::Config { field, line, .. } => {
                assert_eq!(field, "agents[1].z_samples");
                assert_eq!(line, Some(6));
            }
            e => panic!("unexpected {e}"),
        }
        let bad = GOOD.replace("\"horizon\": 5", "\"horizon\": 0");
        let e = ExperimentConfig::from_json(&bad).unwrap_err();
        assert!(e.to_string().contains("line 8"), "{e}");
    }

    #[test]
    fn unknown_field_is_located() {
        let bad = GOOD.replace("\"horizon\": 5", "\"horizonn\": 5");
        match ExperimentConfig::from_json(&bad).unwrap_err() {
            Error::Config { field, line, .. } => {
                assert_eq!(field, "horizonn");
                assert_eq!(line, Some(8));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let bad = GOOD.replace("\"seeds\": [1, 2]", "\"seeds\": [1, 2");
        match ExperimentConfig::from_json(&bad).unwrap_err() {
            Error::Config { line, .. } => assert!(line.is_some()),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let sets = ["horizon=7", "agents[1].beta=0.5", "agents.0.name=thompson", "seeds=[9]"]
            .map(|s| parse_override(s).unwrap());
        let cfg = parse_config(GOOD, &sets).unwrap();
        assert_eq!(cfg.horizon, 7);
        assert_eq!(cfg.agents[1].beta, Some(0.5));
        assert_eq!(cfg.agents[0].name, "thompson");
        assert_eq!(cfg.seeds, vec![9]);

        let bad = parse_override("agents[1].beta=-1").unwrap();
        let e = parse_config(GOOD, &[bad]).unwrap_err();
        assert!(e.to_string().contains("override"), "{e}");
        assert!(parse_config(GOOD, &[parse_override("agents[5].beta=1").unwrap()]).is_err());
        assert!(parse_config(GOOD, &[parse_override("horizon.x=1").unwrap()]).is_err());
    }

    #[test]
    fn override_syntax() {
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("=1").is_err());
        assert!(parse_override("a[x]=1").is_err());
        assert!(parse_override("a[1=1").is_err());
        let o = parse_override("environment.bandit.reward=gaussian").unwrap();
        assert_eq!(o.value, Value::String("gaussian".into()));
        assert_eq!(o.path.to_string(), "environment.bandit.reward");
    }

    #[test]
    fn cross_field_checks() {
        let both = GOOD.replace("\"beta\": 10.0", "\"beta\": 10.0, \"lambda\": 0.1");
        assert!(ExperimentConfig::from_json(&both).is_err());
        let sts = GOOD.replace("{\"name\": \"ts\", \"kind\": \"ts\"}", "{\"name\": \"s\", \"kind\": \"sts\"}");
        let e = ExperimentConfig::from_json(&sts).unwrap_err();
        assert!(e.to_string().contains("epsilon"), "{e}");
        let dup = GOOD.replace("\"name\": \"blasts\"", "\"name\": \"ts\"");
        assert!(ExperimentConfig::from_json(&dup).is_err());
        let mdp_agent = GOOD.replace("\"kind\": \"ts\"", "\"kind\": \"psrl\"");
        assert!(ExperimentConfig::from_json(&mdp_agent).is_err());
        let no_seeds = GOOD.replace("[1, 2]", "[]");
        assert!(ExperimentConfig::from_json(&no_seeds).is_err());
    }

    #[test]
    fn prior_vectors_infer_arm_count() {
        let text = r#"{"kind": "marginal-sweep",
            "environment": {"bandit": {"reward": "gaussian", "prior": {"means": [-1, 0, 1], "stds": [1, 1, 1]}}},
            "sweep": {"lambdas": [0.01, 1, 100]}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let EnvironmentSpec::Bandit(b) = &cfg.environment else { unreachable!() };
        assert_eq!(b.arms(), Some(3));
        let belief = b.prior_belief().unwrap();
        assert_eq!(belief.posterior_mean(0), -1.0);
        let mismatch = text.replace("\"stds\": [1, 1, 1]", "\"stds\": [1, 1]");
        assert!(ExperimentConfig::from_json(&mismatch).is_err());
        let unsorted = text.replace("[0.01, 1, 100]", "[1, 0.01]");
        assert!(ExperimentConfig::from_json(&unsorted).is_err());
    }

    #[test]
    fn locate_line_handles_nesting() {
        let text = "{\n \"a\": [\n  {\"b\": 1},\n  {\"b\": 2,\n   \"c\": 3}\n ]\n}";
        let p = FieldPath::root().key("a").index(1).key("c");
        assert_eq!(locate_line(text, &p), Some(5));
        let missing = FieldPath::root().key("a").index(1).key("zzz");
        assert_eq!(locate_line(text, &missing), Some(4));
        assert_eq!(locate_line("not json", &p), None);
    }
}
