//! Line-delimited trajectory logs.
//!
//! The first line is a [`LogHeader`]; every following line is one
//! [`TrajectoryRecord`], in episode then round order. Both are JSON objects
//! with a fixed field order.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{HarnessError, PolicySpec};
use crate::embedding::Filtration;
use crate::engine::{
    AgentId, Coalition, EligibilityRule, GameSpec, Outcome, ProposalEvent, Regime, Reply, TerminationReason,
    Trajectory,
};

pub const LOG_FORMAT: &str = "cbg-trajectories/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub format: String,
    pub agents: usize,
    pub regime: Regime,
    pub eligibility: EligibilityRule,
    pub max_rounds: Option<u32>,
    pub episodes: u64,
    pub seed: u64,
    pub policy: PolicySpec,
}

impl LogHeader {
    pub fn new(spec: &GameSpec, episodes: u64, seed: u64, policy: PolicySpec) -> Self {
        LogHeader {
            format: LOG_FORMAT.to_string(),
            agents: spec.n(),
            regime: spec.regime,
            eligibility: spec.eligibility,
            max_rounds: spec.max_rounds,
            episodes,
            seed,
            policy,
        }
    }

    pub fn spec(&self) -> Result<GameSpec, HarnessError> {
        Ok(GameSpec::new(self.agents, self.regime, self.eligibility)
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .with_max_rounds(self.max_rounds))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalTag {
    Agreement,
    Exhausted,
    RoundLimit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub episode: u64,
    pub round: u32,
    pub proposer: u8,
    /// `0x`-prefixed four-digit hex bitmask.
    pub coalition: String,
    pub replies: Vec<Reply>,
    pub outcome: Outcome,
    pub terminal: bool,
    pub reason: Option<TerminalTag>,
}

pub fn coalition_hex(c: Coalition) -> String {
    format!("0x{:04x}", c.mask())
}

fn parse_coalition(s: &str) -> Option<Coalition> {
    let digits = s.strip_prefix("0x")?;
    u16::from_str_radix(digits, 16).ok().and_then(Coalition::from_mask)
}

pub fn records_of(t: &Trajectory) -> Vec<TrajectoryRecord> {
    let last = t.rounds().saturating_sub(1);
    t.events()
        .iter()
        .enumerate()
        .map(|(i, e)| TrajectoryRecord {
            episode: t.episode,
            round: e.round,
            proposer: e.proposer.0,
            coalition: coalition_hex(e.coalition),
            replies: e.responses.iter().map(|r| r.reply).collect(),
            outcome: e.outcome,
            terminal: i == last,
            reason: (i == last).then_some(match t.termination {
                TerminationReason::Agreement(_) => TerminalTag::Agreement,
                TerminationReason::Exhausted => TerminalTag::Exhausted,
                TerminationReason::RoundLimit => TerminalTag::RoundLimit,
            }),
        })
        .collect()
}

pub fn write_log<W: Write>(mut w: W, header: &LogHeader, trajectories: &[Trajectory]) -> io::Result<()> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for t in trajectories {
        for r in records_of(t) {
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()
}

pub struct ParsedLog {
    pub header: LogHeader,
    pub records: Vec<TrajectoryRecord>,
}

pub fn parse_log<R: BufRead>(r: R) -> Result<ParsedLog, HarnessError> {
    let mut lines = r.lines().enumerate();
    let (_, first) = lines.next().ok_or(HarnessError::Log { line: 1, message: "empty log".into() })?;
    let header: LogHeader =
        serde_json::from_str(&first?).map_err(|e| HarnessError::Log { line: 1, message: e.to_string() })?;
    if header.format != LOG_FORMAT {
        return Err(HarnessError::Log { line: 1, message: format!("unsupported format {}", header.format) });
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| HarnessError::Log { line: i + 1, message: e.to_string() })?;
        records.push(rec);
    }
    Ok(ParsedLog { header, records })
}

/// Rebuilds trajectories, checking round contiguity and terminal flags.
pub fn trajectories_from_records(spec: GameSpec, records: &[TrajectoryRecord]) -> Result<Vec<Trajectory>, HarnessError> {
    let bad = |episode: u64, message: &str| HarnessError::Log { line: 0, message: format!("episode {episode}: {message}") };
    let mut by_episode: BTreeMap<u64, Vec<&TrajectoryRecord>> = BTreeMap::new();
    for r in records {
        by_episode.entry(r.episode).or_default().push(r);
    }
    let mut out = Vec::with_capacity(by_episode.len());
    for (episode, recs) in by_episode {
        let mut filtration = Filtration::new();
        for (i, r) in recs.iter().enumerate() {
            if r.round as usize != i {
                return Err(bad(episode, "rounds are not contiguous"));
            }
            if r.terminal != (i + 1 == recs.len()) || r.terminal != r.reason.is_some() {
                return Err(bad(episode, "terminal flag must be set on exactly the last record"));
            }
            let coalition = parse_coalition(&r.coalition).ok_or_else(|| bad(episode, "bad coalition"))?;
            if r.proposer as usize >= spec.n() || !coalition.is_within(spec.n()) {
                return Err(bad(episode, "agent outside the agent set"));
            }
            let event = ProposalEvent::from_replies(r.round, AgentId(r.proposer), coalition, &r.replies)
                .map_err(|e| bad(episode, &e.to_string()))?;
            if event.outcome != r.outcome {
                return Err(bad(episode, "outcome disagrees with replies"));
            }
            filtration.push(event).map_err(|e| bad(episode, &e.to_string()))?;
        }
        let last = filtration.events().last().ok_or_else(|| bad(episode, "no records"))?;
        let termination = match (recs.last().and_then(|r| r.reason), last.outcome) {
            (Some(TerminalTag::Agreement), Outcome::Accepted) => TerminationReason::Agreement(last.coalition),
            (Some(TerminalTag::Exhausted), Outcome::Rejected) => TerminationReason::Exhausted,
            (Some(TerminalTag::RoundLimit), Outcome::Rejected) => TerminationReason::RoundLimit,
            _ => return Err(bad(episode, "terminal reason disagrees with the last outcome")),
        };
        out.push(Trajectory { episode, spec, filtration, termination });
    }
    Ok(out)
}

pub fn read_log<R: BufRead>(r: R) -> Result<(LogHeader, Vec<Trajectory>), HarnessError> {
    let parsed = parse_log(r)?;
    let spec = parsed.header.spec()?;
    let trajectories = trajectories_from_records(spec, &parsed.records)?;
    Ok((parsed.header, trajectories))
}
