//! Episodic training of independent tabular Q-learners.
//!
//! Each agent keeps one table covering both of its roles. An agent's
//! transition runs from one of its decisions to its next decision in the same
//! episode, collecting the rewards handed out in between; transitions still
//! open at the end of the episode receive a terminal update.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::qtable::{Action, Next, QParams, QTable};
use super::PolicyError;
use crate::embedding::{Filtration, KeyWriter, StateKey, KIND_PROPOSER_OBS, KIND_RESPONDER_OBS};
use crate::engine::{
    AgentId, ConfigError, EligibilityRule, Game, GamePhase, GameSpec, NaiveState, Outcome, ProtocolError,
    Regime, Reply, TerminationReason, Trajectory,
};
use crate::harness::seeds::{stream_seed, Lane};

pub const MAX_LEARNING_AGENTS: usize = 6;

/// Observation of a proposer: its id and the full history.
pub fn proposer_observation(n: usize, agent: AgentId, filtration: &Filtration) -> StateKey {
    let mut w = KeyWriter::new(n, KIND_PROPOSER_OBS);
    w.agent(agent).events(filtration);
    w.finish()
}

/// Observation of a responder: its id, the pending proposal and the full history.
pub fn responder_observation(n: usize, agent: AgentId, pending: NaiveState, filtration: &Filtration) -> StateKey {
    let mut w = KeyWriter::new(n, KIND_RESPONDER_OBS);
    w.agent(agent).agent(pending.proposer).coalition(pending.coalition).events(filtration);
    w.finish()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardScheme {
    /// Paid to each member of an accepted coalition.
    pub accept_reward: f64,
    /// Paid to every agent for each rejected round; must be `<= 0`.
    pub step_cost: f64,
}

impl Default for RewardScheme {
    fn default() -> Self {
        RewardScheme { accept_reward: 1.0, step_cost: -0.05 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningConfig {
    pub spec: GameSpec,
    pub episodes: u64,
    pub seed: u64,
    pub rewards: RewardScheme,
    pub alpha: f64,
    pub gamma: f64,
    /// Exploration rate of the first episode, decayed linearly to `epsilon_end`.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Keep every training episode in [`LearningOutcome::trajectories`].
    pub record_trajectories: bool,
}

impl LearningConfig {
    /// Defaults: learned-avoidance regime, all agents eligible, 200-round cap.
    pub fn new(n: usize, episodes: u64, seed: u64) -> Result<Self, ConfigError> {
        let spec = GameSpec::new(n, Regime::LearnedAvoidance, EligibilityRule::AllAgents)?.with_max_rounds(Some(200));
        Ok(LearningConfig {
            spec,
            episodes,
            seed,
            rewards: RewardScheme::default(),
            alpha: 0.1,
            gamma: 0.95,
            epsilon_start: 0.1,
            epsilon_end: 0.01,
            record_trajectories: false,
        })
    }

    /// Same game and seeds with uniform-random play and no learning.
    pub fn random_baseline(&self) -> Self {
        LearningConfig { alpha: 0.0, epsilon_start: 1.0, epsilon_end: 1.0, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.spec.n() > MAX_LEARNING_AGENTS {
            return Err(PolicyError::TooManyAgents { max: MAX_LEARNING_AGENTS, got: self.spec.n() });
        }
        for (name, value) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(PolicyError::Hyperparameter { name, value });
            }
        }
        QParams { alpha: self.alpha, gamma: self.gamma, epsilon: self.epsilon_start }.validate()?;
        if !self.rewards.accept_reward.is_finite() {
            return Err(PolicyError::Hyperparameter { name: "accept_reward", value: self.rewards.accept_reward });
        }
        if !(self.rewards.step_cost.is_finite() && self.rewards.step_cost <= 0.0) {
            return Err(PolicyError::Hyperparameter { name: "step_cost", value: self.rewards.step_cost });
        }
        Ok(())
    }

    pub fn epsilon_at(&self, episode: u64) -> f64 {
        if self.episodes <= 1 {
            return self.epsilon_start;
        }
        let frac = episode as f64 / (self.episodes - 1) as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeStats {
    pub episode: u64,
    pub rounds: u32,
    pub termination: TerminationReason,
    /// Episode return averaged over agents.
    pub mean_reward: f64,
    pub proposals: u32,
    /// Proposals of a coalition already rejected earlier in the episode.
    pub repeat_proposals: u32,
    /// Proposals made while some earlier-rejected coalition was available to the proposer.
    pub repeat_opportunities: u32,
}

#[derive(Clone, Debug)]
pub struct LearningOutcome {
    pub tables: Vec<QTable>,
    pub stats: Vec<EpisodeStats>,
    /// Empty unless the config asked for them.
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Error)]
pub enum LearningError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

struct Open {
    obs: StateKey,
    action: Action,
    reward: f64,
}

pub fn run_learning(config: &LearningConfig) -> Result<LearningOutcome, LearningError> {
    config.validate()?;
    let n = config.spec.n();
    let params = QParams { alpha: config.alpha, gamma: config.gamma, epsilon: config.epsilon_start };
    let mut tables: Vec<QTable> = (0..n).map(|_| QTable::new(params)).collect::<Result<_, _>>()?;
    let mut stats = Vec::with_capacity(config.episodes as usize);
    let mut trajectories = Vec::new();
    for episode in 0..config.episodes {
        let epsilon = config.epsilon_at(episode);
        for t in &mut tables {
            t.params.epsilon = epsilon;
        }
        let (s, game) = run_episode(config, episode, &mut tables)?;
        stats.push(s);
        if config.record_trajectories {
            trajectories.push(game.into_trajectory(episode));
        }
    }
    Ok(LearningOutcome { tables, stats, trajectories })
}

fn run_episode(config: &LearningConfig, episode: u64, tables: &mut [QTable]) -> Result<(EpisodeStats, Game), LearningError> {
    let n = config.spec.n();
    let rewards = config.rewards;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, episode, Lane::Policy));
    let mut game = Game::new(config.spec, stream_seed(config.seed, episode, Lane::Game));
    let mut open: Vec<Option<Open>> = (0..n).map(|_| None).collect();
    let mut returns = vec![0.0; n];
    let mut stats = EpisodeStats {
        episode,
        rounds: 0,
        termination: TerminationReason::Exhausted,
        mean_reward: 0.0,
        proposals: 0,
        repeat_proposals: 0,
        repeat_opportunities: 0,
    };

    let termination = loop {
        let (agent, obs, legal) = match game.phase() {
            GamePhase::AwaitingProposal { proposer } => {
                let agent = *proposer;
                let legal: Vec<Action> = game.legal_proposals().into_iter().map(Action::Propose).collect();
                (agent, proposer_observation(n, agent, game.filtration()), legal)
            }
            GamePhase::AwaitingResponses { state, pending, .. } => {
                let agent = pending[0];
                let legal = vec![Action::Respond(Reply::Accept), Action::Respond(Reply::Reject)];
                (agent, responder_observation(n, agent, *state, game.filtration()), legal)
            }
            GamePhase::Terminated(reason) => break *reason,
        };
        let table = &mut tables[agent.index()];
        if let Some(prev) = open[agent.index()].take() {
            table.update(&prev.obs, prev.action, prev.reward, Next::State { obs: &obs, legal: &legal });
        }
        let action = table.epsilon_greedy_action(&obs, &legal, &mut rng)?;
        open[agent.index()] = Some(Open { obs, action, reward: 0.0 });
        match action {
            Action::Propose(c) => {
                let rejected = game.filtration().rejected_coalitions();
                stats.proposals += 1;
                if rejected.contains(&c) {
                    stats.repeat_proposals += 1;
                }
                if rejected.iter().any(|r| r.contains(agent)) {
                    stats.repeat_opportunities += 1;
                }
                game.submit_proposal(c)?;
            }
            Action::Respond(reply) => {
                let before = game.filtration().len();
                game.submit_response(reply)?;
                let rejected_round = game.filtration().len() > before
                    && game.filtration().events()[before].outcome == Outcome::Rejected;
                if rejected_round {
                    for (i, slot) in open.iter_mut().enumerate() {
                        returns[i] += rewards.step_cost;
                        if let Some(o) = slot {
                            o.reward += rewards.step_cost;
                        }
                    }
                }
            }
        }
    };

    if let TerminationReason::Agreement(c) = termination {
        for member in c.members() {
            returns[member.index()] += rewards.accept_reward;
            if let Some(o) = &mut open[member.index()] {
                o.reward += rewards.accept_reward;
            }
        }
    }
    for (i, slot) in open.into_iter().enumerate() {
        if let Some(o) = slot {
            tables[i].update(&o.obs, o.action, o.reward, Next::Terminal);
        }
    }
    stats.rounds = game.filtration().len() as u32;
    stats.termination = termination;
    stats.mean_reward = returns.iter().sum::<f64>() / n as f64;
    Ok((stats, game))
}
