//! Canonical byte keys for states and history classes.
//!
//! State key layout (all integers little-endian):
//!
//! ```text
//! version:u8  n:u8  kind:u8  proposer:u8  coalition:u16  event*
//! event = proposer:u8  coalition:u16  reply_count:u8  accept_bits:u16  outcome:u8
//! ```
//!
//! Events appear only in embedded keys, in round order; bit `i` of
//! `accept_bits` is set when the `i`-th reply was an accept. The absorbing
//! key is `version, 0, 0xff`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EmbeddedState, Filtration};
use crate::engine::{AgentId, Coalition, NaiveState, Outcome, ProposalEvent, Reply, MAX_AGENTS};

pub const KEY_VERSION: u8 = 1;

const KIND_NAIVE: u8 = 0;
const KIND_EMBEDDED: u8 = 1;
pub(crate) const KIND_PROPOSER_OBS: u8 = 2;
pub(crate) const KIND_RESPONDER_OBS: u8 = 3;
const KIND_ABSORBING: u8 = 0xff;

const EVENT_WIDTH: usize = 7;

/// Hashable, totally ordered identifier of a state or observation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey(Box<[u8]>);

impl StateKey {
    pub fn absorbing() -> Self {
        StateKey(Box::new([KEY_VERSION, 0, KIND_ABSORBING]))
    }

    pub fn is_absorbing(&self) -> bool {
        self.0.get(2) == Some(&KIND_ABSORBING)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        StateKey(bytes.into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, KeyError> {
        hex::decode(s).map(|b| StateKey(b.into())).map_err(|_| KeyError::Hex)
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({})", self.to_hex())
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Identifier of a conditioning class of histories.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey(Box<[u8]>);

impl ClassKey {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        ClassKey(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl fmt::Debug for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassKey({})", self.to_hex())
    }
}

/// How histories are grouped when testing whether they matter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryClassifier {
    /// The full ordered event sequence.
    FullHistory,
    /// The unordered set of rejected coalitions.
    RejectedSet,
    /// Only the previous round's `(proposer, coalition)`.
    PreviousState,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AnyState {
    Naive(NaiveState),
    Embedded(EmbeddedState),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("unsupported key version {0}")]
    Version(u8),
    #[error("truncated key")]
    Truncated,
    #[error("unknown state kind {0:#04x}")]
    Kind(u8),
    #[error("invalid agent count {0}")]
    AgentCount(u8),
    #[error("invalid state: {0}")]
    Invalid(&'static str),
    #[error("invalid hex")]
    Hex,
}

pub(crate) struct KeyWriter {
    buf: Vec<u8>,
}

impl KeyWriter {
    pub(crate) fn new(n: usize, kind: u8) -> Self {
        let mut buf = Vec::with_capacity(16);
        buf.extend_from_slice(&[KEY_VERSION, n as u8, kind]);
        KeyWriter { buf }
    }

    pub(crate) fn agent(&mut self, a: AgentId) -> &mut Self {
        self.buf.push(a.0);
        self
    }

    pub(crate) fn coalition(&mut self, c: Coalition) -> &mut Self {
        self.buf.extend_from_slice(&c.mask().to_le_bytes());
        self
    }

    pub(crate) fn events(&mut self, f: &Filtration) -> &mut Self {
        for e in f.events() {
            write_event(&mut self.buf, e);
        }
        self
    }

    pub(crate) fn finish(self) -> StateKey {
        StateKey(self.buf.into_boxed_slice())
    }
}

fn write_event(buf: &mut Vec<u8>, e: &ProposalEvent) {
    buf.push(e.proposer.0);
    buf.extend_from_slice(&e.coalition.mask().to_le_bytes());
    buf.push(e.responses.len() as u8);
    let bits = e
        .responses
        .iter()
        .enumerate()
        .filter(|(_, r)| r.reply == Reply::Accept)
        .fold(0u16, |b, (i, _)| b | (1 << i));
    buf.extend_from_slice(&bits.to_le_bytes());
    buf.push(match e.outcome {
        Outcome::Accepted => 0,
        Outcome::Rejected => 1,
    });
}

pub fn canonical_key(n: usize, state: &AnyState) -> StateKey {
    match state {
        AnyState::Naive(s) => {
            let mut w = KeyWriter::new(n, KIND_NAIVE);
            w.agent(s.proposer).coalition(s.coalition);
            w.finish()
        }
        AnyState::Embedded(s) => {
            let mut w = KeyWriter::new(n, KIND_EMBEDDED);
            w.agent(s.proposer).coalition(s.coalition).events(&s.filtration);
            w.finish()
        }
    }
}

/// Inverse of [`canonical_key`]; returns the agent count and the state.
pub fn decode_key(key: &StateKey) -> Result<(usize, AnyState), KeyError> {
    let b = key.as_bytes();
    if b.len() < 3 {
        return Err(KeyError::Truncated);
    }
    if b[0] != KEY_VERSION {
        return Err(KeyError::Version(b[0]));
    }
    let n = b[1];
    if n == 0 || n as usize > MAX_AGENTS {
        return Err(KeyError::AgentCount(n));
    }
    let n = n as usize;
    let kind = b[2];
    if kind != KIND_NAIVE && kind != KIND_EMBEDDED {
        return Err(KeyError::Kind(kind));
    }
    if b.len() < 6 {
        return Err(KeyError::Truncated);
    }
    let proposer = AgentId(b[3]);
    let coalition = read_coalition(&b[4..6])?;
    check_proposal(n, proposer, coalition)?;
    let rest = &b[6..];
    if kind == KIND_NAIVE {
        if !rest.is_empty() {
            return Err(KeyError::Invalid("trailing bytes after naive state"));
        }
        return Ok((n, AnyState::Naive(NaiveState { proposer, coalition })));
    }
    if !rest.len().is_multiple_of(EVENT_WIDTH) {
        return Err(KeyError::Truncated);
    }
    let mut filtration = Filtration::new();
    for (round, chunk) in rest.chunks(EVENT_WIDTH).enumerate() {
        let e = read_event(n, round as u32, chunk)?;
        filtration.push(e).map_err(|_| KeyError::Invalid("event sequence"))?;
    }
    Ok((n, AnyState::Embedded(EmbeddedState { coalition, proposer, filtration })))
}

fn read_coalition(b: &[u8]) -> Result<Coalition, KeyError> {
    Coalition::from_mask(u16::from_le_bytes([b[0], b[1]])).ok_or(KeyError::Invalid("empty coalition"))
}

fn check_proposal(n: usize, proposer: AgentId, coalition: Coalition) -> Result<(), KeyError> {
    if proposer.index() >= n || !coalition.is_within(n) {
        return Err(KeyError::Invalid("agent outside the agent set"));
    }
    if !coalition.contains(proposer) {
        return Err(KeyError::Invalid("proposer outside coalition"));
    }
    Ok(())
}

fn read_event(n: usize, round: u32, b: &[u8]) -> Result<ProposalEvent, KeyError> {
    let proposer = AgentId(b[0]);
    let coalition = read_coalition(&b[1..3])?;
    check_proposal(n, proposer, coalition)?;
    let count = b[3] as usize;
    let bits = u16::from_le_bytes([b[4], b[5]]);
    if count > 15 || bits >> count != 0 {
        return Err(KeyError::Invalid("reply bits"));
    }
    let replies: Vec<Reply> = (0..count)
        .map(|i| if bits & (1 << i) != 0 { Reply::Accept } else { Reply::Reject })
        .collect();
    let outcome = match b[6] {
        0 => Outcome::Accepted,
        1 => Outcome::Rejected,
        _ => return Err(KeyError::Invalid("outcome byte")),
    };
    let event = ProposalEvent::from_replies(round, proposer, coalition, &replies)
        .map_err(|_| KeyError::Invalid("event replies"))?;
    if event.outcome != outcome {
        return Err(KeyError::Invalid("outcome disagrees with replies"));
    }
    Ok(event)
}

const CLASS_FULL: u8 = 0;
const CLASS_REJECTED: u8 = 1;
const CLASS_PREVIOUS: u8 = 2;

/// Key of the conditioning class that history `f` falls in.
pub fn history_class_key(f: &Filtration, classifier: HistoryClassifier) -> ClassKey {
    let mut buf = Vec::new();
    match classifier {
        HistoryClassifier::FullHistory => {
            buf.push(CLASS_FULL);
            for e in f.events() {
                write_event(&mut buf, e);
            }
        }
        HistoryClassifier::RejectedSet => {
            buf.push(CLASS_REJECTED);
            let set: BTreeSet<Coalition> = f.rejected_coalitions();
            for c in set {
                buf.extend_from_slice(&c.mask().to_le_bytes());
            }
        }
        HistoryClassifier::PreviousState => {
            buf.push(CLASS_PREVIOUS);
            match f.events().last() {
                None => buf.push(0),
                Some(e) => {
                    buf.push(1);
                    buf.push(e.proposer.0);
                    buf.extend_from_slice(&e.coalition.mask().to_le_bytes());
                }
            }
        }
    }
    ClassKey(buf.into_boxed_slice())
}
