//! Protocol engine for the coalitional bargaining game.
//!
//! A round consists of a proposer naming a coalition that contains itself,
//! followed by the other members replying in ascending id order. The first
//! rejection ends the round; unanimous acceptance ends the game. The game
//! also ends when no eligible agent has a legal proposal left.
//!
//! Viewed as a stochastic game `<N, S, A, T, R, gamma>`, the agent set is
//! `0..n`, the naive state is the current `(proposer, coalition)` pair, the
//! joint action is the proposal plus the replies, and the transition kernel
//! is induced by [`choose_proposer`] and [`legal_proposals`]. Rewards live in
//! [`crate::agents`].

mod game;

pub use game::{choose_proposer, legal_proposals, legal_proposal_count, Game, GamePhase};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Filtration;

/// Largest supported agent count; coalitions are 16-bit masks.
pub const MAX_AGENTS: usize = 16;

/// Index of an agent in `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u8);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonempty set of agents stored as a bitmask (bit `i` is agent `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u16);

impl Coalition {
    /// Returns `None` for the empty mask.
    pub fn from_mask(mask: u16) -> Option<Self> {
        (mask != 0).then_some(Coalition(mask))
    }

    pub fn singleton(agent: AgentId) -> Self {
        Coalition(1 << agent.0)
    }

    pub fn from_members<I: IntoIterator<Item = u8>>(members: I) -> Option<Self> {
        let mask = members.into_iter().fold(0u16, |m, a| m | (1u16 << a));
        Self::from_mask(mask)
    }

    /// Every agent in `0..n`.
    pub fn grand(n: usize) -> Self {
        Coalition(full_mask(n))
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn contains(self, agent: AgentId) -> bool {
        self.0 & (1 << agent.0) != 0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_singleton(self) -> bool {
        self.0.is_power_of_two()
    }

    /// True when every member is below `n`.
    pub fn is_within(self, n: usize) -> bool {
        self.0 & !full_mask(n) == 0
    }

    /// Members in ascending id order.
    pub fn members(self) -> impl Iterator<Item = AgentId> {
        let mask = self.0;
        (0..MAX_AGENTS as u8).filter(move |i| mask & (1 << i) != 0).map(AgentId)
    }

    /// Members other than `proposer`, ascending; this is the reply order.
    pub fn responders(self, proposer: AgentId) -> Vec<AgentId> {
        self.members().filter(|&a| a != proposer).collect()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn full_mask(n: usize) -> u16 {
    if n >= 16 {
        u16::MAX
    } else {
        (1u16 << n) - 1
    }
}

/// History rule applied to proposals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Rejected coalitions may be proposed again.
    RepeatAllowed,
    /// Same legal set as `RepeatAllowed`; agents are expected to learn to avoid repeats.
    LearnedAvoidance,
    /// A coalition rejected once is never legal again, whoever proposed it.
    NoRepeat,
}

/// Which agents may be drawn as proposer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EligibilityRule {
    #[default]
    AllAgents,
    /// An agent that has proposed once is never drawn again.
    EachProposesOnce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reply {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Response {
    pub responder: AgentId,
    pub reply: Reply,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected,
}

/// Record of one completed round.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProposalEvent {
    pub round: u32,
    pub proposer: AgentId,
    pub coalition: Coalition,
    /// Replies actually given, in query order; stops at the first rejection.
    pub responses: Vec<Response>,
    pub outcome: Outcome,
}

impl ProposalEvent {
    /// Builds an event from the replies of the queried members, deriving the
    /// responders and the outcome from the coalition.
    pub fn from_replies(
        round: u32,
        proposer: AgentId,
        coalition: Coalition,
        replies: &[Reply],
    ) -> Result<Self, ProtocolError> {
        let queue = coalition.responders(proposer);
        if !coalition.contains(proposer) {
            return Err(ProtocolError::MalformedEvent("proposer outside coalition"));
        }
        if replies.len() > queue.len() {
            return Err(ProtocolError::MalformedEvent("more replies than responders"));
        }
        if let Some(pos) = replies.iter().position(|&r| r == Reply::Reject) {
            if pos + 1 != replies.len() {
                return Err(ProtocolError::MalformedEvent("reply after a rejection"));
            }
        } else if replies.len() != queue.len() {
            return Err(ProtocolError::MalformedEvent("round ended without a rejection or full acceptance"));
        }
        let responses: Vec<Response> = queue
            .into_iter()
            .zip(replies)
            .map(|(responder, &reply)| Response { responder, reply })
            .collect();
        let outcome = if replies.contains(&Reply::Reject) {
            Outcome::Rejected
        } else {
            Outcome::Accepted
        };
        Ok(ProposalEvent { round, proposer, coalition, responses, outcome })
    }

    pub fn naive_state(&self) -> NaiveState {
        NaiveState { proposer: self.proposer, coalition: self.coalition }
    }

    /// Checks the structural invariants of a recorded event.
    pub fn is_well_formed(&self) -> bool {
        let replies: Vec<Reply> = self.responses.iter().map(|r| r.reply).collect();
        match ProposalEvent::from_replies(self.round, self.proposer, self.coalition, &replies) {
            Ok(rebuilt) => rebuilt == *self,
            Err(_) => false,
        }
    }
}

/// The current proposal `(proposer, coalition)` without any history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NaiveState {
    pub proposer: AgentId,
    pub coalition: Coalition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    Agreement(Coalition),
    /// No eligible agent has a legal proposal left.
    Exhausted,
    /// The optional per-episode round cap was reached.
    RoundLimit,
}

/// Static parameters of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GameSpec {
    n: usize,
    pub regime: Regime,
    pub eligibility: EligibilityRule,
    /// Ends the game after this many rejected rounds. `None` means unbounded.
    pub max_rounds: Option<u32>,
}

impl GameSpec {
    pub fn new(n: usize, regime: Regime, eligibility: EligibilityRule) -> Result<Self, ConfigError> {
        if !(1..=MAX_AGENTS).contains(&n) {
            return Err(ConfigError::AgentCount(n));
        }
        Ok(GameSpec { n, regime, eligibility, max_rounds: None })
    }

    pub fn with_max_rounds(mut self, max_rounds: Option<u32>) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n as u8).map(AgentId)
    }
}

/// A finished episode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub episode: u64,
    pub spec: GameSpec,
    pub filtration: Filtration,
    pub termination: TerminationReason,
}

impl Trajectory {
    pub fn events(&self) -> &[crate::engine::ProposalEvent] {
        self.filtration.events()
    }

    pub fn rounds(&self) -> usize {
        self.filtration.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("agent count must be in 1..={MAX_AGENTS}, got {0}")]
    AgentCount(usize),
}

/// Which legality rule a proposal broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IllegalReason {
    Empty,
    OutsideAgentSet,
    NotContainingProposer,
    AlreadyRejected,
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalReason::Empty => "empty coalition",
            IllegalReason::OutsideAgentSet => "member outside the agent set",
            IllegalReason::NotContainingProposer => "coalition does not contain the proposer",
            IllegalReason::AlreadyRejected => "coalition was already rejected",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("illegal proposal {coalition:#06x}: {reason}")]
    IllegalProposal { coalition: u16, reason: IllegalReason },
    #[error("expected {expected}, game is in phase {actual}")]
    WrongPhase { expected: &'static str, actual: &'static str },
    #[error("no proposal has been made this round")]
    NoProposal,
    #[error("malformed event: {0}")]
    MalformedEvent(&'static str),
}
