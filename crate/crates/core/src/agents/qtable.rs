use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, RngCore};

use super::PolicyError;
use crate::embedding::StateKey;
use crate::engine::{Coalition, Reply};

/// A proposer or responder move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Propose(Coalition),
    Respond(Reply),
}

/// Total order on actions used for tie-breaking and export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionKey(pub u32);

const RESPOND_BASE: u32 = 0x1_0000;

impl Action {
    pub fn key(self) -> ActionKey {
        match self {
            Action::Propose(c) => ActionKey(c.mask() as u32),
            Action::Respond(Reply::Accept) => ActionKey(RESPOND_BASE),
            Action::Respond(Reply::Reject) => ActionKey(RESPOND_BASE + 1),
        }
    }

    pub fn from_key(key: ActionKey) -> Option<Action> {
        match key.0 {
            RESPOND_BASE => Some(Action::Respond(Reply::Accept)),
            k if k == RESPOND_BASE + 1 => Some(Action::Respond(Reply::Reject)),
            k if k < RESPOND_BASE => Coalition::from_mask(k as u16).map(Action::Propose),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for QParams {
    fn default() -> Self {
        QParams { alpha: 0.1, gamma: 0.95, epsilon: 0.1 }
    }
}

impl QParams {
    pub fn validate(&self) -> Result<(), PolicyError> {
        for (name, value) in [("alpha", self.alpha), ("gamma", self.gamma), ("epsilon", self.epsilon)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(PolicyError::Hyperparameter { name, value });
            }
        }
        Ok(())
    }
}

/// Successor of a transition for the temporal-difference target.
pub enum Next<'a> {
    Terminal,
    State { obs: &'a StateKey, legal: &'a [Action] },
}

/// Sparse action-value table; absent entries read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    entries: HashMap<StateKey, HashMap<ActionKey, f64>>,
    pub params: QParams,
}

impl QTable {
    pub fn new(params: QParams) -> Result<Self, PolicyError> {
        params.validate()?;
        Ok(QTable { entries: HashMap::new(), params })
    }

    pub fn get(&self, obs: &StateKey, action: Action) -> f64 {
        self.entries
            .get(obs)
            .and_then(|row| row.get(&action.key()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn set(&mut self, obs: &StateKey, action: Action, value: f64) {
        self.entries.entry(obs.clone()).or_default().insert(action.key(), value);
    }

    /// Number of stored `(observation, action)` entries.
    pub fn len(&self) -> usize {
        self.entries.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().flat_map(|r| r.values()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Highest value over `legal`, ties to the smallest action key.
    pub fn greedy(&self, obs: &StateKey, legal: &[Action]) -> Option<Action> {
        let row = self.entries.get(obs);
        let value = |a: &Action| row.and_then(|r| r.get(&a.key())).copied().unwrap_or(0.0);
        legal.iter().copied().fold(None, |best: Option<(Action, f64)>, a| {
            let v = value(&a);
            match best {
                Some((b, bv)) if bv > v || (bv == v && b.key() < a.key()) => Some((b, bv)),
                _ => Some((a, v)),
            }
        })
        .map(|(a, _)| a)
    }

    fn max_value(&self, obs: &StateKey, legal: &[Action]) -> f64 {
        self.greedy(obs, legal).map_or(0.0, |a| self.get(obs, a))
    }

    /// With probability epsilon a uniform legal action, otherwise the greedy one.
    pub fn epsilon_greedy_action(
        &self,
        obs: &StateKey,
        legal: &[Action],
        rng: &mut dyn RngCore,
    ) -> Result<Action, PolicyError> {
        if legal.is_empty() {
            return Err(PolicyError::EmptyLegalSet);
        }
        if self.params.epsilon > 0.0 && rng.gen_bool(self.params.epsilon) {
            return Ok(legal[rng.gen_range(0..legal.len())]);
        }
        Ok(self.greedy(obs, legal).expect("legal set is nonempty"))
    }

    /// One-step TD update: `Q += alpha * (r + gamma * max Q(next) - Q)`.
    pub fn update(&mut self, obs: &StateKey, action: Action, reward: f64, next: Next<'_>) {
        if self.params.alpha == 0.0 {
            return;
        }
        let bootstrap = match next {
            Next::Terminal => 0.0,
            Next::State { obs, legal } => self.max_value(obs, legal),
        };
        let current = self.get(obs, action);
        let target = reward + self.params.gamma * bootstrap;
        self.set(obs, action, current + self.params.alpha * (target - current));
    }

    /// One line per entry, sorted: hex observation key, action key, value.
    pub fn write_export<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut rows: Vec<(&StateKey, ActionKey, f64)> = self
            .entries
            .iter()
            .flat_map(|(k, row)| row.iter().map(move |(a, v)| (k, *a, *v)))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
        for (k, a, v) in rows {
            writeln!(w, "{}\t{:05x}\t{:.16e}", k.to_hex(), a.0, v)?;
        }
        Ok(())
    }

    /// Reads entries written by [`QTable::write_export`].
    pub fn read_export<R: BufRead>(r: R, params: QParams) -> Result<Self, io::Error> {
        let bad = |line: usize| io::Error::new(io::ErrorKind::InvalidData, format!("malformed Q-table line {line}"));
        let mut q = QTable::new(params).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let mut parts = line.split('\t');
            let (Some(k), Some(a), Some(v), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad(i + 1));
            };
            let key = StateKey::from_hex(k).map_err(|_| bad(i + 1))?;
            let action = u32::from_str_radix(a, 16)
                .ok()
                .and_then(|a| Action::from_key(ActionKey(a)))
                .ok_or_else(|| bad(i + 1))?;
            let value: f64 = v.parse().map_err(|_| bad(i + 1))?;
            q.set(&key, action, value);
        }
        Ok(q)
    }
}
