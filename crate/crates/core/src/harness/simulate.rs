//! Parallel simulation of random-policy episodes.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::log::{records_of, LogHeader};
use super::seeds::{stream_seed, Lane};
use super::HarnessError;
use crate::agents::{play_episode, RandomResponder, UniformProposer};
use crate::engine::{GameSpec, TerminationReason, Trajectory};

/// Episodes simulated per parallel batch when streaming to a log.
const BATCH: u64 = 8192;

pub fn simulate_episode(spec: GameSpec, seed: u64, episode: u64, p_accept: f64) -> Result<Trajectory, HarnessError> {
    let mut responder = RandomResponder::new(p_accept)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, episode, Lane::Policy));
    let game_seed = stream_seed(seed, episode, Lane::Game);
    Ok(play_episode(spec, episode, game_seed, &mut UniformProposer, &mut responder, &mut rng)?)
}

/// Episodes `start..end` in episode order.
pub fn simulate_range(spec: GameSpec, seed: u64, start: u64, end: u64, p_accept: f64) -> Result<Vec<Trajectory>, HarnessError> {
    RandomResponder::new(p_accept)?;
    (start..end).into_par_iter().map(|ep| simulate_episode(spec, seed, ep, p_accept)).collect()
}

pub fn simulate(spec: GameSpec, episodes: u64, seed: u64, p_accept: f64) -> Result<Vec<Trajectory>, HarnessError> {
    simulate_range(spec, seed, 0, episodes, p_accept)
}

/// Simulates in batches, writing each batch to `w` as it completes.
pub fn simulate_to_log<W: Write>(
    mut w: W,
    spec: GameSpec,
    episodes: u64,
    seed: u64,
    p_accept: f64,
) -> Result<SimulationSummary, HarnessError> {
    let header = LogHeader::new(&spec, episodes, seed, super::PolicySpec::Random { p_accept });
    serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    let mut summary = SimulationSummary::default();
    let mut start = 0;
    while start < episodes {
        let end = episodes.min(start + BATCH);
        let batch = simulate_range(spec, seed, start, end, p_accept)?;
        for t in &batch {
            summary.add(t);
            for r in records_of(t) {
                serde_json::to_writer(&mut w, &r).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
        start = end;
    }
    w.flush()?;
    Ok(summary)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimulationSummary {
    pub episodes: u64,
    pub total_rounds: u64,
    pub max_rounds: u32,
    pub agreements: u64,
    pub exhausted: u64,
    pub round_limited: u64,
}

impl SimulationSummary {
    pub fn of(trajectories: &[Trajectory]) -> Self {
        let mut s = SimulationSummary::default();
        for t in trajectories {
            s.add(t);
        }
        s
    }

    pub fn add(&mut self, t: &Trajectory) {
        let rounds = t.rounds() as u32;
        self.episodes += 1;
        self.total_rounds += rounds as u64;
        self.max_rounds = self.max_rounds.max(rounds);
        match t.termination {
            TerminationReason::Agreement(_) => self.agreements += 1,
            TerminationReason::Exhausted => self.exhausted += 1,
            TerminationReason::RoundLimit => self.round_limited += 1,
        }
    }

    fn rate(&self, count: u64) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            count as f64 / self.episodes as f64
        }
    }

    pub fn mean_rounds(&self) -> f64 {
        self.rate(self.total_rounds)
    }

    pub fn agreement_rate(&self) -> f64 {
        self.rate(self.agreements)
    }

    pub fn exhaustion_rate(&self) -> f64 {
        self.rate(self.exhausted)
    }

    pub fn to_text(&self) -> String {
        format!(
            "episodes = {}\nmean_rounds = {:.6}\nmax_rounds = {}\nagreements = {}\nexhausted = {}\nround_limited = {}\nagreement_rate = {:.6}\nexhaustion_rate = {:.6}\n",
            self.episodes,
            self.mean_rounds(),
            self.max_rounds,
            self.agreements,
            self.exhausted,
            self.round_limited,
            self.agreement_rate(),
            self.exhaustion_rate(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{EligibilityRule, Regime};
    use crate::harness::log::read_log;

    fn spec(n: usize) -> GameSpec {
        GameSpec::new(n, Regime::NoRepeat, EligibilityRule::AllAgents).unwrap()
    }

    #[test]
    fn zero_episodes() {
        let mut buf = Vec::new();
        let s = simulate_to_log(&mut buf, spec(3), 0, 1, 0.5).unwrap();
        assert_eq!(s, SimulationSummary::default());
        assert_eq!(s.agreement_rate(), 0.0);
        let (h, t) = read_log(buf.as_slice()).unwrap();
        assert_eq!(h.episodes, 0);
        assert!(t.is_empty());
    }

    #[test]
    fn streamed_log_matches_in_memory_run() {
        let mut buf = Vec::new();
        let s = simulate_to_log(&mut buf, spec(3), 20_000, 9, 0.5).unwrap();
        let mem = simulate(spec(3), 20_000, 9, 0.5).unwrap();
        let (_, parsed) = read_log(buf.as_slice()).unwrap();
        assert_eq!(parsed, mem);
        assert_eq!(s, SimulationSummary::of(&mem));
        assert_eq!(s.agreements + s.exhausted, 20_000);
    }

    #[test]
    fn bad_probability_is_an_error() {
        assert!(simulate(spec(2), 5, 0, -0.1).is_err());
    }
}
