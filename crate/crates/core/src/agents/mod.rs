//! Agent policies: memoryless random baselines and tabular Q-learners that
//! observe the full game history.

mod learning;
mod qtable;

pub use learning::{
    proposer_observation, responder_observation, run_learning, EpisodeStats, LearningConfig,
    LearningError, LearningOutcome, RewardScheme, MAX_LEARNING_AGENTS,
};
pub use qtable::{Action, ActionKey, Next, QParams, QTable};

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::embedding::Filtration;
use crate::engine::{AgentId, Coalition, Game, GamePhase, GameSpec, NaiveState, ProtocolError, Reply, Trajectory};

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("no legal action available")]
    EmptyLegalSet,
    #[error("acceptance probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("invalid hyperparameter {name}: {value}")]
    Hyperparameter { name: &'static str, value: f64 },
    #[error("learning runs support at most {max} agents, got {got}")]
    TooManyAgents { max: usize, got: usize },
}

/// What a proposer sees when asked to move.
pub struct ProposerView<'a> {
    pub agent: AgentId,
    pub n: usize,
    pub filtration: &'a Filtration,
    /// Nonempty whenever the engine asks for a proposal.
    pub legal: &'a [Coalition],
}

/// What a responder sees when asked to reply.
pub struct ResponderView<'a> {
    pub agent: AgentId,
    pub n: usize,
    pub pending: NaiveState,
    pub filtration: &'a Filtration,
}

pub trait ProposerPolicy {
    fn propose(&mut self, view: &ProposerView<'_>, rng: &mut dyn RngCore) -> Coalition;
}

pub trait ResponderPolicy {
    fn respond(&mut self, view: &ResponderView<'_>, rng: &mut dyn RngCore) -> Reply;
}

/// Uniform over the legal set, ignoring history.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformProposer;

impl ProposerPolicy for UniformProposer {
    fn propose(&mut self, view: &ProposerView<'_>, rng: &mut dyn RngCore) -> Coalition {
        view.legal[rng.gen_range(0..view.legal.len())]
    }
}

/// Accepts independently with a fixed probability.
#[derive(Clone, Copy, Debug)]
pub struct RandomResponder {
    p_accept: f64,
}

impl RandomResponder {
    pub fn new(p_accept: f64) -> Result<Self, PolicyError> {
        if !(0.0..=1.0).contains(&p_accept) {
            return Err(PolicyError::Probability(p_accept));
        }
        Ok(RandomResponder { p_accept })
    }

    pub fn p_accept(&self) -> f64 {
        self.p_accept
    }
}

impl ResponderPolicy for RandomResponder {
    fn respond(&mut self, _view: &ResponderView<'_>, rng: &mut dyn RngCore) -> Reply {
        // gen_bool panics outside [0, 1]; the constructor guards that.
        if rng.gen_bool(self.p_accept) {
            Reply::Accept
        } else {
            Reply::Reject
        }
    }
}

pub fn random_proposer_policy() -> UniformProposer {
    UniformProposer
}

pub fn random_responder_policy(p_accept: f64) -> Result<RandomResponder, PolicyError> {
    RandomResponder::new(p_accept)
}

/// Plays one game to termination. The engine draws proposers from
/// `game_seed`; the policies draw from `rng`.
pub fn play_episode<P, R>(
    spec: GameSpec,
    episode: u64,
    game_seed: u64,
    proposer: &mut P,
    responder: &mut R,
    rng: &mut dyn RngCore,
) -> Result<Trajectory, ProtocolError>
where
    P: ProposerPolicy + ?Sized,
    R: ResponderPolicy + ?Sized,
{
    let mut game = Game::new(spec, game_seed);
    loop {
        match game.phase().clone() {
            GamePhase::AwaitingProposal { proposer: agent } => {
                let legal = game.legal_proposals();
                let view = ProposerView { agent, n: spec.n(), filtration: game.filtration(), legal: &legal };
                let c = proposer.propose(&view, rng);
                game.submit_proposal(c)?;
            }
            GamePhase::AwaitingResponses { state, pending, .. } => {
                let view = ResponderView { agent: pending[0], n: spec.n(), pending: state, filtration: game.filtration() };
                let reply = responder.respond(&view, rng);
                game.submit_response(reply)?;
            }
            GamePhase::Terminated(_) => return Ok(game.into_trajectory(episode)),
        }
    }
}
