//! Command-line and config-file settings.
//!
//! Every setting can come from a TOML file given with `--config` or from a
//! flag of the same name; flags win. Keys in the file use the flag names
//! (`p-accept = 0.5`), and unknown keys are an error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use super::HarnessError;
use crate::agents::{LearningConfig, RewardScheme, MAX_LEARNING_AGENTS};
use crate::audit::{StateMapper, DEFAULT_MIN_SAMPLES};
use crate::embedding::HistoryClassifier;
use crate::engine::{EligibilityRule, GameSpec, Regime, MAX_AGENTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Repeat,
    Learned,
    NoRepeat,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Repeat => Regime::RepeatAllowed,
            RegimeArg::Learned => Regime::LearnedAvoidance,
            RegimeArg::NoRepeat => Regime::NoRepeat,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EligibilityArg {
    All,
    Once,
}

impl From<EligibilityArg> for EligibilityRule {
    fn from(e: EligibilityArg) -> Self {
        match e {
            EligibilityArg::All => EligibilityRule::AllAgents,
            EligibilityArg::Once => EligibilityRule::EachProposesOnce,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapperArg {
    Naive,
    Embedded,
}

impl From<MapperArg> for StateMapper {
    fn from(m: MapperArg) -> Self {
        match m {
            MapperArg::Naive => StateMapper::Naive,
            MapperArg::Embedded => StateMapper::Embedded,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierArg {
    Full,
    RejectedSet,
    PrevState,
}

impl From<ClassifierArg> for HistoryClassifier {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Full => HistoryClassifier::FullHistory,
            ClassifierArg::RejectedSet => HistoryClassifier::RejectedSet,
            ClassifierArg::PrevState => HistoryClassifier::PreviousState,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// TOML file with defaults for any of the other options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Number of agents.
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long, value_enum)]
    pub eligibility: Option<EligibilityArg>,
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Probability that a random responder accepts.
    #[arg(long)]
    pub p_accept: Option<f64>,
    /// Stop an episode after this many rejected rounds.
    #[arg(long)]
    pub max_rounds: Option<u32>,
    #[arg(long, value_enum)]
    pub mapper: Option<MapperArg>,
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierArg>,
    /// Significance level of the audit.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Smallest history class that enters a test.
    #[arg(long)]
    pub min_samples: Option<u64>,
    /// Q-learning step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub discount: Option<f64>,
    /// Exploration rate at the first training episode.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Exploration rate at the last training episode.
    #[arg(long)]
    pub epsilon_end: Option<f64>,
    #[arg(long)]
    pub accept_reward: Option<f64>,
    #[arg(long)]
    pub step_cost: Option<f64>,
    /// Also train the random baseline (train only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub baseline: Option<bool>,
    /// Depth limit for enumerating regimes without a finite game tree.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Output path: log file, report file, or training directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory log: input for audit, optional output for train.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { config: $top.config.or($base.config), $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Values from `top` where present, otherwise from `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self, top, agents, regime, eligibility, episodes, seed, p_accept, max_rounds, mapper, classifier, alpha,
            min_samples, learning_rate, discount, epsilon, epsilon_end, accept_reward, step_cost, baseline, max_depth,
            out, log
        )
    }

    /// Flags layered over the `--config` file, if one was named.
    pub fn resolve(self) -> Result<Settings, HarnessError> {
        match &self.config {
            Some(path) => Ok(Settings::load(path)?.overlay(self)),
            None => Ok(self),
        }
    }

    fn spec(&self, default_regime: Regime) -> Result<GameSpec, HarnessError> {
        let n = self.agents.unwrap_or(3);
        if n == 0 || n > MAX_AGENTS {
            return Err(HarnessError::Config(format!("agents must be between 1 and {MAX_AGENTS}, got {n}")));
        }
        if self.max_rounds == Some(0) {
            return Err(HarnessError::Config("max-rounds must be positive".into()));
        }
        let regime = self.regime.map_or(default_regime, Regime::from);
        let eligibility = self.eligibility.map_or(EligibilityRule::AllAgents, EligibilityRule::from);
        Ok(GameSpec::new(n, regime, eligibility)
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .with_max_rounds(self.max_rounds))
    }

    fn p_accept(&self) -> Result<f64, HarnessError> {
        let p = self.p_accept.unwrap_or(0.5);
        unit_interval("p-accept", p)?;
        Ok(p)
    }

    pub fn simulate_config(&self) -> Result<SimulateConfig, HarnessError> {
        Ok(SimulateConfig {
            spec: self.spec(Regime::NoRepeat)?,
            episodes: self.episodes.unwrap_or(1000),
            seed: self.seed.unwrap_or(0),
            p_accept: self.p_accept()?,
            out: self.out.clone(),
        })
    }

    pub fn audit_config(&self) -> Result<AuditConfig, HarnessError> {
        let alpha = self.alpha.unwrap_or(0.01);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(HarnessError::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let min_samples = self.min_samples.unwrap_or(DEFAULT_MIN_SAMPLES);
        if min_samples == 0 {
            return Err(HarnessError::Config("min-samples must be positive".into()));
        }
        let source = match &self.log {
            Some(path) => AuditSource::Log(path.clone()),
            None => AuditSource::Simulate(self.simulate_config()?),
        };
        Ok(AuditConfig {
            source,
            mapper: self.mapper.map_or(StateMapper::Naive, StateMapper::from),
            classifier: self.classifier.map_or(HistoryClassifier::RejectedSet, HistoryClassifier::from),
            alpha,
            min_samples,
            out: self.out.clone(),
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig, HarnessError> {
        let spec = self.spec(Regime::LearnedAvoidance)?;
        let mut learning = LearningConfig::new(spec.n(), self.episodes.unwrap_or(50_000), self.seed.unwrap_or(0))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        learning.spec = spec.with_max_rounds(self.max_rounds.or(learning.spec.max_rounds));
        learning.alpha = self.learning_rate.unwrap_or(learning.alpha);
        learning.gamma = self.discount.unwrap_or(learning.gamma);
        learning.epsilon_start = self.epsilon.unwrap_or(learning.epsilon_start);
        learning.epsilon_end = self.epsilon_end.or(self.epsilon).unwrap_or(learning.epsilon_end);
        learning.rewards = RewardScheme {
            accept_reward: self.accept_reward.unwrap_or(learning.rewards.accept_reward),
            step_cost: self.step_cost.unwrap_or(learning.rewards.step_cost),
        };
        for (name, v) in [
            ("learning-rate", learning.alpha),
            ("discount", learning.gamma),
            ("epsilon", learning.epsilon_start),
            ("epsilon-end", learning.epsilon_end),
        ] {
            unit_interval(name, v)?;
        }
        if learning.rewards.step_cost.is_nan() || learning.rewards.step_cost > 0.0 || !learning.rewards.accept_reward.is_finite() {
            return Err(HarnessError::Config("step-cost must be <= 0 and accept-reward finite".into()));
        }
        let out = self.out.clone().ok_or_else(|| HarnessError::Config("train needs --out DIR".into()))?;
        Ok(TrainConfig { learning, baseline: self.baseline.unwrap_or(false), out, log: self.log.clone() })
    }

    pub fn enumerate_config(&self) -> Result<EnumerateConfig, HarnessError> {
        let spec = self.spec(Regime::NoRepeat)?;
        let max_depth = self.max_depth.unwrap_or(4);
        if max_depth == 0 {
            return Err(HarnessError::Config("max-depth must be positive".into()));
        }
        Ok(EnumerateConfig { spec, p_accept: self.p_accept()?, max_depth, out: self.out.clone() })
    }
}

fn unit_interval(name: &str, v: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must lie in [0, 1], got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateConfig {
    pub spec: GameSpec,
    pub episodes: u64,
    pub seed: u64,
    pub p_accept: f64,
    /// Log destination; standard output when absent.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AuditSource {
    Log(PathBuf),
    /// Simulate in memory instead of reading a log.
    Simulate(SimulateConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub source: AuditSource,
    pub mapper: StateMapper,
    pub classifier: HistoryClassifier,
    pub alpha: f64,
    pub min_samples: u64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning: LearningConfig,
    pub baseline: bool,
    pub out: PathBuf,
    pub log: Option<PathBuf>,
}

impl TrainConfig {
    pub fn check_size(&self) -> Result<(), HarnessError> {
        let n = self.learning.spec.n();
        if n > MAX_LEARNING_AGENTS {
            return Err(HarnessError::Refused(format!(
                "learning supports at most {MAX_LEARNING_AGENTS} agents (got {n}): the observation space grows with every history"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerateConfig {
    pub spec: GameSpec,
    pub p_accept: f64,
    /// Round cutoff used when the regime has no finite game tree.
    pub max_depth: usize,
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Settings::from_toml("agents = 4\nregime = \"repeat\"\np-accept = 0.25\n").unwrap();
        let flags = Settings { agents: Some(2), ..Default::default() };
        let s = file.overlay(flags).simulate_config().unwrap();
        assert_eq!(s.spec.n(), 2);
        assert_eq!(s.spec.regime, Regime::RepeatAllowed);
        assert_eq!(s.p_accept, 0.25);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(Settings::from_toml("agentz = 3"), Err(HarnessError::Config(_))));
        assert!(Settings::from_toml("config = \"x.toml\"").is_err());
    }

    #[test]
    fn values_validated() {
        let bad = |s: Settings| s.simulate_config().is_err();
        assert!(bad(Settings { agents: Some(0), ..Default::default() }));
        assert!(bad(Settings { agents: Some(17), ..Default::default() }));
        assert!(bad(Settings { p_accept: Some(1.5), ..Default::default() }));
        assert!(bad(Settings { p_accept: Some(f64::NAN), ..Default::default() }));
        assert!(Settings { alpha: Some(0.0), ..Default::default() }.audit_config().is_err());
        assert!(Settings { min_samples: Some(0), ..Default::default() }.audit_config().is_err());
    }

    #[test]
    fn defaults_per_command() {
        let s = Settings::default();
        assert_eq!(s.simulate_config().unwrap().spec.regime, Regime::NoRepeat);
        let t = Settings { out: Some("x".into()), ..Default::default() }.train_config().unwrap();
        assert_eq!(t.learning.spec.regime, Regime::LearnedAvoidance);
        assert_eq!(t.learning.spec.max_rounds, Some(200));
        assert!(Settings::default().train_config().is_err());
        let a = s.audit_config().unwrap();
        assert_eq!(a.classifier, HistoryClassifier::RejectedSet);
        assert!(matches!(a.source, AuditSource::Simulate(_)));
    }
}
