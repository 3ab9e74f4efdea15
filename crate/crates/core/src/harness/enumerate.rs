//! Exact expansion of small games under random play.
//!
//! This is deliberately written against raw bitmasks rather than the engine
//! so that it can serve as an independent check on it. Proposers are drawn
//! uniformly from the eligible agents that have a legal proposal, proposals
//! uniformly from the legal coalitions, and each responder accepts with a
//! fixed probability until the first rejection.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use super::HarnessError;
use crate::engine::{EligibilityRule, GameSpec, Regime};

pub const MAX_ENUMERATION_AGENTS: usize = 3;

/// One proposal round; `replies[i]` is true when the i-th responder accepted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub proposer: u8,
    pub mask: u16,
    pub replies: Vec<bool>,
}

impl Step {
    pub fn accepted(&self) -> bool {
        self.replies.iter().all(|&r| r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ending {
    Agreement,
    Exhausted,
    RoundLimit,
    /// Cut off by the depth limit.
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NextState {
    Proposal { proposer: u8, mask: u16 },
    End,
}

/// The part of the history a classifier keeps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HistoryClass {
    Full(Vec<Step>),
    /// Ascending masks of rejected coalitions.
    Rejected(Vec<u16>),
    Previous(Option<(u8, u16)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub history: Vec<Step>,
    pub probability: f64,
    pub ending: Ending,
}

/// `(proposer, mask)` of the proposal being answered.
pub type Proposal = (u8, u16);

/// Joint masses `P(state, class, next)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransitionMasses {
    pub entries: BTreeMap<Proposal, BTreeMap<HistoryClass, BTreeMap<NextState, f64>>>,
}

impl TransitionMasses {
    fn add(&mut self, state: Proposal, class: HistoryClass, next: NextState, mass: f64) {
        *self.entries.entry(state).or_default().entry(class).or_default().entry(next).or_default() += mass;
    }

    /// Exact `P(next | state, class)`.
    pub fn conditional(&self, state: Proposal, class: &HistoryClass) -> Option<BTreeMap<NextState, f64>> {
        let row = self.entries.get(&state)?.get(class)?;
        let total: f64 = row.values().sum();
        Some(row.iter().map(|(k, v)| (*k, v / total)).collect())
    }

    /// Exact `P(next | state)` with the history marginalized out.
    pub fn marginal(&self, state: Proposal) -> Option<BTreeMap<NextState, f64>> {
        let mut out: BTreeMap<NextState, f64> = BTreeMap::new();
        for row in self.entries.get(&state)?.values() {
            for (k, v) in row {
                *out.entry(*k).or_default() += v;
            }
        }
        let total: f64 = out.values().sum();
        Some(out.into_iter().map(|(k, v)| (k, v / total)).collect())
    }

    /// States whose conditional distribution differs between two classes by
    /// more than `tol` in total variation.
    pub fn history_dependent_states(&self, tol: f64) -> Vec<Proposal> {
        let mut out = Vec::new();
        for (&state, classes) in &self.entries {
            let dists: Vec<_> = classes.keys().filter_map(|c| self.conditional(state, c)).collect();
            let differs = dists.iter().any(|a| dists.iter().any(|b| total_variation(a, b) > tol));
            if differs {
                out.push(state);
            }
        }
        out
    }
}

pub fn total_variation<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactModel {
    pub n: usize,
    pub regime: Regime,
    pub eligibility: EligibilityRule,
    pub p_accept: f64,
    pub max_rounds: Option<u32>,
    /// Depth cutoff actually applied; `None` when the tree is finite.
    pub max_depth: Option<usize>,
    pub leaves: Vec<Leaf>,
    pub full_history: TransitionMasses,
    pub rejected_set: TransitionMasses,
    pub previous_state: TransitionMasses,
    /// `P(event at round t = step)`.
    pub events: BTreeMap<(usize, Step), f64>,
    /// `P(rounds, ending)`.
    pub lengths: BTreeMap<(usize, Ending), f64>,
}

impl ExactModel {
    pub fn total_probability(&self) -> f64 {
        self.leaves.iter().map(|l| l.probability).sum()
    }

    pub fn truncated_probability(&self) -> f64 {
        self.leaves.iter().filter(|l| l.ending == Ending::Truncated).map(|l| l.probability).sum()
    }

    /// The embedded-state table: the full history plus the current proposal
    /// identifies the state, so it coincides with the full-history classes.
    pub fn embedded(&self) -> &TransitionMasses {
        &self.full_history
    }

    /// Distribution of the round-`t` event, conditioned on reaching round `t`.
    pub fn event_distribution(&self, round: usize) -> BTreeMap<Step, f64> {
        let row: Vec<_> = self.events.iter().filter(|((t, _), _)| *t == round).collect();
        let total: f64 = row.iter().map(|(_, p)| **p).sum();
        row.into_iter().map(|((_, s), p)| (s.clone(), p / total)).collect()
    }
}

struct Walker<'a> {
    model: &'a mut ExactModel,
    n: usize,
    full: u16,
    depth_limit: Option<usize>,
}

/// Previous proposal and its history class, waiting to learn what follows.
struct Pending {
    state: Proposal,
    history: Vec<Step>,
}

pub fn enumerate(spec: &GameSpec, p_accept: f64, max_depth: usize) -> Result<ExactModel, HarnessError> {
    let n = spec.n();
    if n > MAX_ENUMERATION_AGENTS {
        return Err(HarnessError::Refused(format!(
            "exact enumeration supports at most {MAX_ENUMERATION_AGENTS} agents (got {n}): the game tree grows doubly exponentially"
        )));
    }
    if !(0.0..=1.0).contains(&p_accept) {
        return Err(HarnessError::Config(format!("p-accept must lie in [0, 1], got {p_accept}")));
    }
    // Only the no-repeat tree is finite; a round cap also bounds it.
    let bounded = spec.regime == Regime::NoRepeat || spec.max_rounds.is_some();
    let depth_limit = (!bounded).then_some(max_depth);
    let mut model = ExactModel {
        n,
        regime: spec.regime,
        eligibility: spec.eligibility,
        p_accept,
        max_rounds: spec.max_rounds,
        max_depth: depth_limit,
        leaves: Vec::new(),
        full_history: TransitionMasses::default(),
        rejected_set: TransitionMasses::default(),
        previous_state: TransitionMasses::default(),
        events: BTreeMap::new(),
        lengths: BTreeMap::new(),
    };
    let mut w = Walker { model: &mut model, n, full: ((1u32 << n) - 1) as u16, depth_limit };
    w.expand(&mut Vec::new(), 1.0, None);
    Ok(model)
}

impl Walker<'_> {
    fn rejected(&self, history: &[Step]) -> Vec<u16> {
        let mut r: Vec<u16> = history.iter().filter(|s| !s.accepted()).map(|s| s.mask).collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    fn legal_for(&self, agent: u8, rejected: &[u16]) -> Vec<u16> {
        let bit = 1u16 << agent;
        (1..=self.full)
            .filter(|m| m & bit != 0)
            .filter(|m| self.model.regime != Regime::NoRepeat || !rejected.contains(m))
            .collect()
    }

    fn candidates(&self, history: &[Step], rejected: &[u16]) -> Vec<(u8, Vec<u16>)> {
        (0..self.n as u8)
            .filter(|a| {
                self.model.eligibility == EligibilityRule::AllAgents || history.iter().all(|s| s.proposer != *a)
            })
            .map(|a| (a, self.legal_for(a, rejected)))
            .filter(|(_, legal)| !legal.is_empty())
            .collect()
    }

    fn record(&mut self, p: &Pending, next: NextState, mass: f64) {
        let m = &mut *self.model;
        let h = &p.history;
        m.full_history.add(p.state, HistoryClass::Full(h.clone()), next, mass);
        let mut rejected: Vec<u16> = h.iter().filter(|s| !s.accepted()).map(|s| s.mask).collect();
        rejected.sort_unstable();
        rejected.dedup();
        m.rejected_set.add(p.state, HistoryClass::Rejected(rejected), next, mass);
        let prev = h.last().map(|s| (s.proposer, s.mask));
        m.previous_state.add(p.state, HistoryClass::Previous(prev), next, mass);
    }

    fn leaf(&mut self, history: &[Step], probability: f64, ending: Ending) {
        *self.model.lengths.entry((history.len(), ending)).or_default() += probability;
        self.model.leaves.push(Leaf { history: history.to_vec(), probability, ending });
    }

    /// Expands the start of a round reached with probability `prob`.
    fn expand(&mut self, history: &mut Vec<Step>, prob: f64, pending: Option<Pending>) {
        if let Some(limit) = self.model.max_rounds {
            if history.len() >= limit as usize {
                if let Some(p) = &pending {
                    self.record(p, NextState::End, prob);
                }
                self.leaf(history, prob, Ending::RoundLimit);
                return;
            }
        }
        let rejected = self.rejected(history);
        let candidates = self.candidates(history, &rejected);
        if candidates.is_empty() {
            if let Some(p) = &pending {
                self.record(p, NextState::End, prob);
            }
            self.leaf(history, prob, Ending::Exhausted);
            return;
        }
        let truncate = self.depth_limit.is_some_and(|d| history.len() >= d);
        let per_proposer = prob / candidates.len() as f64;
        for (proposer, legal) in &candidates {
            let per_coalition = per_proposer / legal.len() as f64;
            for &mask in legal {
                if let Some(p) = &pending {
                    self.record(p, NextState::Proposal { proposer: *proposer, mask }, per_coalition);
                }
                if truncate {
                    continue;
                }
                self.answer(history, per_coalition, *proposer, mask);
            }
        }
        if truncate {
            self.leaf(history, prob, Ending::Truncated);
        }
    }

    /// Branches over the responders' replies to one proposal.
    fn answer(&mut self, history: &mut Vec<Step>, prob: f64, proposer: u8, mask: u16) {
        let responders = (mask & !(1u16 << proposer)).count_ones() as usize;
        let q = self.model.p_accept;
        let state = (proposer, mask);
        for accepts in 0..=responders {
            let all = accepts == responders;
            let p_replies = q.powi(accepts as i32) * if all { 1.0 } else { 1.0 - q };
            if p_replies == 0.0 {
                continue;
            }
            let mut replies = vec![true; accepts];
            if !all {
                replies.push(false);
            }
            let step = Step { proposer, mask, replies };
            let mass = prob * p_replies;
            *self.model.events.entry((history.len(), step.clone())).or_default() += mass;
            let pending = Pending { state, history: history.clone() };
            history.push(step);
            if all {
                self.record(&pending, NextState::End, mass);
                self.leaf(history, mass, Ending::Agreement);
            } else {
                self.expand(history, mass, Some(pending));
            }
            history.pop();
        }
    }
}

fn mask_hex(m: u16) -> String {
    format!("0x{m:04x}")
}

fn step_json(s: &Step) -> Value {
    json!({
        "proposer": s.proposer,
        "coalition": mask_hex(s.mask),
        "replies": s.replies.iter().map(|&r| if r { "accept" } else { "reject" }).collect::<Vec<_>>(),
    })
}

fn class_json(c: &HistoryClass) -> Value {
    match c {
        HistoryClass::Full(h) => Value::Array(h.iter().map(step_json).collect()),
        HistoryClass::Rejected(r) => Value::Array(r.iter().map(|&m| mask_hex(m).into()).collect()),
        HistoryClass::Previous(None) => Value::Null,
        HistoryClass::Previous(Some((p, m))) => json!({"proposer": p, "coalition": mask_hex(*m)}),
    }
}

fn next_json(n: &NextState) -> Value {
    match n {
        NextState::Proposal { proposer, mask } => json!({"proposer": proposer, "coalition": mask_hex(*mask)}),
        NextState::End => "end".into(),
    }
}

fn table_json(t: &TransitionMasses) -> Value {
    let mut rows = Vec::new();
    for (&(proposer, mask), classes) in &t.entries {
        for class in classes.keys() {
            let mass: f64 = classes[class].values().sum();
            let dist = t.conditional((proposer, mask), class).unwrap_or_default();
            rows.push(json!({
                "state": {"proposer": proposer, "coalition": mask_hex(mask)},
                "class": class_json(class),
                "mass": mass,
                "next": dist.iter().map(|(k, p)| json!({"state": next_json(k), "p": p})).collect::<Vec<_>>(),
            }));
        }
    }
    Value::Array(rows)
}

impl ExactModel {
    pub fn to_json(&self, with_leaves: bool) -> Value {
        let mut v = json!({
            "agents": self.n,
            "regime": self.regime,
            "eligibility": self.eligibility,
            "p_accept": self.p_accept,
            "max_rounds": self.max_rounds,
            "max_depth": self.max_depth,
            "leaf_count": self.leaves.len(),
            "total_probability": self.total_probability(),
            "truncated_probability": self.truncated_probability(),
            "lengths": self.lengths.iter().map(|((r, e), p)| json!({"rounds": r, "ending": e, "p": p})).collect::<Vec<_>>(),
            "tables": {
                "rejected-set": table_json(&self.rejected_set),
                "previous-state": table_json(&self.previous_state),
                "full-history": table_json(&self.full_history),
            },
        });
        if with_leaves {
            v["leaves"] = self
                .leaves
                .iter()
                .map(|l| {
                    json!({
                        "history": l.history.iter().map(step_json).collect::<Vec<_>>(),
                        "p": l.probability,
                        "ending": l.ending,
                    })
                })
                .collect();
        }
        v
    }

    pub fn write_json<W: Write>(&self, mut w: W, with_leaves: bool) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json(with_leaves))?;
        w.write_all(b"\n")?;
        w.flush()
    }
}
