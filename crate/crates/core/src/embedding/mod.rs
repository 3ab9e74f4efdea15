//! Append-only game history and the state representations built on it.
//!
//! A [`Filtration`] is the ordered list of completed rounds. Every later
//! version of a game's filtration extends every earlier one, and the
//! filtration of a fresh game is empty. An [`EmbeddedState`] pairs the
//! current proposal with that history, which is enough to determine every
//! agent's legal proposals; the bare [`NaiveState`](crate::engine::NaiveState)
//! is not.

mod key;

pub use key::{
    canonical_key, decode_key, history_class_key, AnyState, ClassKey, HistoryClassifier, KeyError,
    StateKey, KEY_VERSION,
};
pub(crate) use key::{KeyWriter, KIND_PROPOSER_OBS, KIND_RESPONDER_OBS};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::engine::{Coalition, Outcome, ProposalEvent};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("event round {got} does not follow a history of length {expected}")]
pub struct SequencingError {
    pub expected: usize,
    pub got: u32,
}

/// Ordered record of completed rounds. Events are only ever appended.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Filtration {
    events: Vec<ProposalEvent>,
}

impl Filtration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[ProposalEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Returns a new filtration extended by `event`; `self` is unchanged.
    pub fn append_event(&self, event: ProposalEvent) -> Result<Filtration, SequencingError> {
        let mut next = self.clone();
        next.push(event)?;
        Ok(next)
    }

    pub(crate) fn push(&mut self, event: ProposalEvent) -> Result<(), SequencingError> {
        if event.round as usize != self.events.len() {
            return Err(SequencingError { expected: self.events.len(), got: event.round });
        }
        self.events.push(event);
        Ok(())
    }

    /// The history as it stood after the first `len` rounds.
    pub fn prefix(&self, len: usize) -> Filtration {
        Filtration { events: self.events[..len.min(self.events.len())].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &Filtration) -> bool {
        other.events.starts_with(&self.events)
    }

    pub fn rejected_coalitions(&self) -> BTreeSet<Coalition> {
        self.events
            .iter()
            .filter(|e| e.outcome == Outcome::Rejected)
            .map(|e| e.coalition)
            .collect()
    }

    pub fn has_rejected(&self, coalition: Coalition) -> bool {
        self.events
            .iter()
            .any(|e| e.outcome == Outcome::Rejected && e.coalition == coalition)
    }
}

impl FromIterator<ProposalEvent> for Result<Filtration, SequencingError> {
    fn from_iter<I: IntoIterator<Item = ProposalEvent>>(iter: I) -> Self {
        let mut f = Filtration::new();
        for e in iter {
            f.push(e)?;
        }
        Ok(f)
    }
}

/// Current proposal plus the full ordered history.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmbeddedState {
    pub coalition: Coalition,
    pub proposer: crate::engine::AgentId,
    pub filtration: Filtration,
}

impl EmbeddedState {
    /// State of round `round` of a recorded history, observed when the
    /// proposal is made (before any reply to it).
    pub fn at_round(history: &Filtration, round: usize) -> EmbeddedState {
        let e = &history.events()[round];
        EmbeddedState { coalition: e.coalition, proposer: e.proposer, filtration: history.prefix(round) }
    }

    pub fn naive(&self) -> crate::engine::NaiveState {
        crate::engine::NaiveState { proposer: self.proposer, coalition: self.coalition }
    }
}
