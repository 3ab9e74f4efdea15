//! Empirical Markov-property audit.
//!
//! Transitions are tallied per `(state, history class)`. If the process is
//! Markov in the chosen state representation, every history class of a state
//! shares one next-state distribution; a per-state G-test of homogeneity
//! across classes, Bonferroni-corrected over states, checks that.
//!
//! States are observed when the proposal of a round is made. The successor of
//! the last round of an episode is the absorbing key.
//!
//! Only logs from stationary, memoryless policies are meaningful inputs:
//! learning agents change the transition kernel while the data is collected.

pub mod stats;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{canonical_key, history_class_key, AnyState, ClassKey, EmbeddedState, HistoryClassifier, StateKey};
use crate::engine::{GameSpec, Regime, Trajectory};
use stats::g_test;

pub const DEFAULT_MIN_SAMPLES: u64 = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateMapper {
    /// `(proposer, coalition)` only.
    Naive,
    /// `(coalition, proposer, history)`.
    Embedded,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("trajectories come from different game configurations")]
    MixedConfiguration,
    #[error("cannot merge tables built with different state mappers")]
    MapperMismatch,
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
}

/// Next-state counts keyed by state and history class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionTable {
    pub mapper: StateMapper,
    counts: BTreeMap<StateKey, BTreeMap<ClassKey, BTreeMap<StateKey, u64>>>,
}

impl TransitionTable {
    pub fn new(mapper: StateMapper) -> Self {
        TransitionTable { mapper, counts: BTreeMap::new() }
    }

    pub fn record(&mut self, state: StateKey, class: ClassKey, next: StateKey) {
        self.record_n(state, class, next, 1);
    }

    fn record_n(&mut self, state: StateKey, class: ClassKey, next: StateKey, count: u64) {
        if count == 0 {
            return;
        }
        *self
            .counts
            .entry(state)
            .or_default()
            .entry(class)
            .or_default()
            .entry(next)
            .or_default() += count;
    }

    /// Pointwise sum; the result does not depend on merge order.
    pub fn merge(&mut self, other: &TransitionTable) -> Result<(), AuditError> {
        if self.mapper != other.mapper {
            return Err(AuditError::MapperMismatch);
        }
        for (s, classes) in &other.counts {
            for (c, nexts) in classes {
                for (nx, &k) in nexts {
                    self.record_n(s.clone(), c.clone(), nx.clone(), k);
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flat_map(|c| c.values()).flat_map(|n| n.values()).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = &StateKey> {
        self.counts.keys()
    }

    pub fn classes(&self, state: &StateKey) -> Option<&BTreeMap<ClassKey, BTreeMap<StateKey, u64>>> {
        self.counts.get(state)
    }

    /// States seen under at least two history classes.
    pub fn multi_class_states(&self) -> usize {
        self.counts.values().filter(|c| c.len() >= 2).count()
    }
}

pub fn state_key(trajectory: &Trajectory, round: usize, mapper: StateMapper) -> StateKey {
    let n = trajectory.spec.n();
    match mapper {
        StateMapper::Naive => canonical_key(n, &AnyState::Naive(trajectory.events()[round].naive_state())),
        StateMapper::Embedded => {
            canonical_key(n, &AnyState::Embedded(EmbeddedState::at_round(&trajectory.filtration, round)))
        }
    }
}

fn check_uniform(trajectories: &[Trajectory]) -> Result<Option<GameSpec>, AuditError> {
    let Some(first) = trajectories.first() else { return Ok(None) };
    if trajectories.iter().any(|t| t.spec != first.spec) {
        return Err(AuditError::MixedConfiguration);
    }
    Ok(Some(first.spec))
}

/// Tallies every transition with a caller-supplied history class.
pub fn collect_by<F>(trajectories: &[Trajectory], mapper: StateMapper, class_of: F) -> Result<TransitionTable, AuditError>
where
    F: Fn(&Trajectory, usize) -> ClassKey,
{
    check_uniform(trajectories)?;
    let mut table = TransitionTable::new(mapper);
    for t in trajectories {
        let rounds = t.rounds();
        let mut current = (rounds > 0).then(|| state_key(t, 0, mapper));
        for round in 0..rounds {
            let next = if round + 1 < rounds { state_key(t, round + 1, mapper) } else { StateKey::absorbing() };
            let state = current.replace(next.clone()).expect("state present for every round");
            table.record(state, class_of(t, round), next);
        }
    }
    Ok(table)
}

pub fn collect(
    trajectories: &[Trajectory],
    mapper: StateMapper,
    classifier: HistoryClassifier,
) -> Result<TransitionTable, AuditError> {
    collect_by(trajectories, mapper, |t, round| history_class_key(&t.filtration.prefix(round), classifier))
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateVerdict {
    Tested { g: f64, dof: usize, p_value: f64, p_adjusted: f64 },
    /// Fewer than two classes met the sample floor.
    Untestable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateRecord {
    pub state: StateKey,
    /// All classes seen, including those below the sample floor.
    pub classes: usize,
    /// Sample size of each class, in class-key order.
    pub sample_sizes: Vec<u64>,
    pub verdict: StateVerdict,
}

impl StateRecord {
    pub fn p_value(&self) -> Option<f64> {
        match self.verdict {
            StateVerdict::Tested { p_value, .. } => Some(p_value),
            StateVerdict::Untestable => None,
        }
    }

    pub fn p_adjusted(&self) -> Option<f64> {
        match self.verdict {
            StateVerdict::Tested { p_adjusted, .. } => Some(p_adjusted),
            StateVerdict::Untestable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditSummary {
    pub states_total: usize,
    pub states_tested: usize,
    pub states_untestable: usize,
    pub multi_class_states: usize,
    /// Tested states with an unadjusted p-value below alpha.
    pub rejected_raw: usize,
    /// Tested states with a Bonferroni-adjusted p-value below alpha.
    pub rejected_corrected: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub mapper: StateMapper,
    pub classifier: Option<HistoryClassifier>,
    pub alpha: f64,
    pub min_samples: u64,
    pub policy: Option<String>,
    pub records: Vec<StateRecord>,
    pub summary: AuditSummary,
}

impl AuditReport {
    /// No state could be tested.
    pub fn low_power(&self) -> bool {
        self.summary.states_tested == 0
    }

    pub fn rejected_fraction(&self) -> f64 {
        if self.summary.states_tested == 0 {
            0.0
        } else {
            self.summary.rejected_raw as f64 / self.summary.states_tested as f64
        }
    }

    /// Tested states in ascending order of adjusted p-value.
    pub fn most_significant(&self) -> Vec<&StateRecord> {
        let mut tested: Vec<&StateRecord> = self.records.iter().filter(|r| r.p_value().is_some()).collect();
        tested.sort_by(|a, b| a.p_value().unwrap().total_cmp(&b.p_value().unwrap()).then(a.state.cmp(&b.state)));
        tested
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let name = |m: StateMapper| match m {
            StateMapper::Naive => "naive",
            StateMapper::Embedded => "embedded",
        };
        let classifier = match self.classifier {
            Some(HistoryClassifier::FullHistory) => "full",
            Some(HistoryClassifier::RejectedSet) => "rejected-set",
            Some(HistoryClassifier::PreviousState) => "prev-state",
            None => "custom",
        };
        let _ = writeln!(s, "# markov audit report");
        let _ = writeln!(s, "mapper = {}", name(self.mapper));
        let _ = writeln!(s, "classifier = {classifier}");
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "min_samples = {}", self.min_samples);
        let _ = writeln!(s, "correction = bonferroni");
        let _ = writeln!(s, "policy = {}", self.policy.as_deref().unwrap_or("unknown"));
        let m = &self.summary;
        let _ = writeln!(s, "\n[summary]");
        let _ = writeln!(s, "states_total = {}", m.states_total);
        let _ = writeln!(s, "states_tested = {}", m.states_tested);
        let _ = writeln!(s, "states_untestable = {}", m.states_untestable);
        let _ = writeln!(s, "multi_class_states = {}", m.multi_class_states);
        let _ = writeln!(s, "rejected_raw = {}", m.rejected_raw);
        let _ = writeln!(s, "rejected_corrected = {}", m.rejected_corrected);
        let _ = writeln!(s, "low_power = {}", self.low_power());
        for r in &self.records {
            let _ = writeln!(s, "\n[[state]]");
            let _ = writeln!(s, "key = {}", r.state);
            let _ = writeln!(s, "classes = {}", r.classes);
            let sizes: Vec<String> = r.sample_sizes.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "samples = {}", sizes.join(","));
            match &r.verdict {
                StateVerdict::Tested { g, dof, p_value, p_adjusted } => {
                    let verdict = if *p_adjusted < self.alpha { "rejected" } else { "homogeneous" };
                    let _ = writeln!(s, "g = {}", sig6(*g));
                    let _ = writeln!(s, "dof = {dof}");
                    let _ = writeln!(s, "p_value = {p_value:.6e}");
                    let _ = writeln!(s, "p_adjusted = {p_adjusted:.6e}");
                    let _ = writeln!(s, "verdict = {verdict}");
                }
                StateVerdict::Untestable => {
                    let _ = writeln!(s, "verdict = untestable");
                }
            }
        }
        s
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_text().as_bytes())
    }
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

/// Per-state G-test of homogeneity across history classes.
pub fn independence_test(table: &TransitionTable, alpha: f64, min_samples: u64) -> AuditReport {
    independence_test_with(table, None, alpha, min_samples)
}

fn independence_test_with(
    table: &TransitionTable,
    classifier: Option<HistoryClassifier>,
    alpha: f64,
    min_samples: u64,
) -> AuditReport {
    let mut records = Vec::new();
    for (state, classes) in &table.counts {
        let sample_sizes: Vec<u64> = classes.values().map(|n| n.values().sum()).collect();
        let eligible: Vec<&BTreeMap<StateKey, u64>> = classes
            .values()
            .zip(&sample_sizes)
            .filter(|(_, &k)| k >= min_samples.max(1))
            .map(|(n, _)| n)
            .collect();
        let verdict = if eligible.len() < 2 {
            StateVerdict::Untestable
        } else {
            let mut columns: Vec<&StateKey> = eligible.iter().flat_map(|n| n.keys()).collect();
            columns.sort();
            columns.dedup();
            let rows: Vec<Vec<u64>> = eligible
                .iter()
                .map(|n| columns.iter().map(|c| n.get(*c).copied().unwrap_or(0)).collect())
                .collect();
            let t = g_test(&rows);
            StateVerdict::Tested { g: t.g, dof: t.dof, p_value: t.p_value, p_adjusted: f64::NAN }
        };
        records.push(StateRecord { state: state.clone(), classes: classes.len(), sample_sizes, verdict });
    }
    let tested = records.iter().filter(|r| r.p_value().is_some()).count();
    let mut rejected_raw = 0;
    let mut rejected_corrected = 0;
    for r in &mut records {
        if let StateVerdict::Tested { p_value, p_adjusted, .. } = &mut r.verdict {
            *p_adjusted = (*p_value * tested as f64).min(1.0);
            if *p_value < alpha {
                rejected_raw += 1;
            }
            if *p_adjusted < alpha {
                rejected_corrected += 1;
            }
        }
    }
    let summary = AuditSummary {
        states_total: records.len(),
        states_tested: tested,
        states_untestable: records.len() - tested,
        multi_class_states: table.multi_class_states(),
        rejected_raw,
        rejected_corrected,
    };
    AuditReport { mapper: table.mapper, classifier, alpha, min_samples, policy: None, records, summary }
}

/// Collects and tests in one step.
pub fn audit(
    trajectories: &[Trajectory],
    mapper: StateMapper,
    classifier: HistoryClassifier,
    alpha: f64,
    min_samples: u64,
) -> Result<AuditReport, AuditError> {
    let table = collect(trajectories, mapper, classifier)?;
    Ok(independence_test_with(&table, Some(classifier), alpha, min_samples))
}

#[derive(Clone, Debug, PartialEq)]
pub enum CounterexampleKind {
    /// One embedded state reached through two different histories.
    MultipleHistories,
    /// Next-state frequencies of one embedded state differ between halves of the data.
    Heterogeneous,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddingVerdict {
    Holds {
        /// Homogeneity check of repeated visits; `low_power()` when nothing was testable.
        report: AuditReport,
    },
    CounterexampleState { state: StateKey, kind: CounterexampleKind },
}

impl EmbeddingVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, EmbeddingVerdict::Holds { .. })
    }
}

/// Checks that embedded states behave as Markov states on recorded data.
///
/// Every embedded state must be reached by a single full history, and visits
/// to one state from even and odd episodes must share a next-state
/// distribution.
pub fn verify_embedding(trajectories: &[Trajectory], alpha: f64, min_samples: u64) -> Result<EmbeddingVerdict, AuditError> {
    let by_history = collect(trajectories, StateMapper::Embedded, HistoryClassifier::FullHistory)?;
    let by_half = collect_by(trajectories, StateMapper::Embedded, |t, _| {
        ClassKey::from_bytes(&[0xe0, (t.episode % 2) as u8])
    })?;
    verify_embedding_tables(&by_history, &by_half, alpha, min_samples)
}

/// Table-level form of [`verify_embedding`].
pub fn verify_embedding_tables(
    by_history: &TransitionTable,
    by_half: &TransitionTable,
    alpha: f64,
    min_samples: u64,
) -> Result<EmbeddingVerdict, AuditError> {
    if by_history.mapper != StateMapper::Embedded || by_half.mapper != StateMapper::Embedded {
        return Err(AuditError::Precondition("embedding checks need embedded-state tables"));
    }
    if let Some((state, _)) = by_history.counts.iter().find(|(_, c)| c.len() >= 2) {
        return Ok(EmbeddingVerdict::CounterexampleState {
            state: state.clone(),
            kind: CounterexampleKind::MultipleHistories,
        });
    }
    let report = independence_test(by_half, alpha, min_samples);
    if let Some(r) = report.most_significant().first().filter(|r| r.p_adjusted().unwrap() < alpha) {
        return Ok(EmbeddingVerdict::CounterexampleState { state: r.state.clone(), kind: CounterexampleKind::Heterogeneous });
    }
    Ok(EmbeddingVerdict::Holds { report })
}

/// Naive-state audit of repeat-allowed play, where the naive process is Markov.
pub fn negative_control(
    trajectories: &[Trajectory],
    classifier: HistoryClassifier,
    alpha: f64,
    min_samples: u64,
) -> Result<AuditReport, AuditError> {
    if trajectories.iter().any(|t| t.spec.regime != Regime::RepeatAllowed) {
        return Err(AuditError::Precondition("negative control needs repeat-allowed trajectories"));
    }
    audit(trajectories, StateMapper::Naive, classifier, alpha, min_samples)
}

/// Largest rejected fraction consistent with `m` independent tests at level `alpha`
/// (mean plus three binomial standard deviations).
pub fn false_positive_bound(alpha: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    alpha + 3.0 * (alpha * (1.0 - alpha) / m as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{play_episode, RandomResponder, UniformProposer};
    use crate::engine::{AgentId, Coalition, EligibilityRule, ProposalEvent, Reply, TerminationReason};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn key(b: u8) -> StateKey {
        StateKey::from_bytes(&[1, 3, 0, b])
    }

    fn class(b: u8) -> ClassKey {
        ClassKey::from_bytes(&[9, b])
    }

    fn simulate(regime: Regime, episodes: u64, seed: u64) -> Vec<Trajectory> {
        let spec = GameSpec::new(3, regime, EligibilityRule::AllAgents).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..episodes)
            .map(|ep| {
                play_episode(spec, ep, seed ^ ep.wrapping_mul(0x9e37), &mut UniformProposer, &mut RandomResponder::new(0.5).unwrap(), &mut rng)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_input() {
        let t = collect(&[], StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap();
        assert!(t.is_empty());
        let v = verify_embedding(&[], 0.01, 25).unwrap();
        match v {
            EmbeddingVerdict::Holds { report } => assert!(report.low_power()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_round_episode_goes_to_absorbing() {
        let spec = GameSpec::new(2, Regime::NoRepeat, EligibilityRule::AllAgents).unwrap();
        let c = Coalition::from_members([0, 1]).unwrap();
        let e = ProposalEvent::from_replies(0, AgentId(0), c, &[Reply::Accept]).unwrap();
        let f = Result::from_iter([e]).unwrap();
        let t = Trajectory { episode: 0, spec, filtration: f, termination: TerminationReason::Agreement(c) };
        let table = collect(&[t], StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap();
        assert_eq!(table.total(), 1);
        let (_, classes) = table.counts.iter().next().unwrap();
        let nexts = classes.values().next().unwrap();
        assert_eq!(nexts.get(&StateKey::absorbing()), Some(&1));
    }

    #[test]
    fn mixed_configurations_rejected() {
        let mut a = simulate(Regime::NoRepeat, 3, 1);
        a.extend(simulate(Regime::RepeatAllowed, 3, 2));
        assert_eq!(collect(&a, StateMapper::Naive, HistoryClassifier::FullHistory), Err(AuditError::MixedConfiguration));
    }

    #[test]
    fn merge_matches_union() {
        let all = simulate(Regime::NoRepeat, 400, 3);
        let whole = collect(&all, StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap();
        let mut left = collect(&all[..150], StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap();
        let right = collect(&all[150..], StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap();
        let mut right_first = right.clone();
        left.merge(&right).unwrap();
        right_first.merge(&collect(&all[..150], StateMapper::Naive, HistoryClassifier::RejectedSet).unwrap()).unwrap();
        assert_eq!(left, whole);
        assert_eq!(right_first, whole);
        assert_eq!(left.merge(&TransitionTable::new(StateMapper::Embedded)), Err(AuditError::MapperMismatch));
    }

    #[test]
    fn identical_classes_are_homogeneous() {
        let mut t = TransitionTable::new(StateMapper::Naive);
        for c in [class(0), class(1)] {
            for (nx, k) in [(key(1), 40), (key(2), 60)] {
                t.record_n(key(0), c.clone(), nx, k);
            }
        }
        let r = independence_test(&t, 0.05, 25);
        let StateVerdict::Tested { g, p_value, .. } = r.records[0].verdict else { panic!() };
        assert_eq!(g, 0.0);
        assert_eq!(p_value, 1.0);
    }

    #[test]
    fn disjoint_classes_rejected() {
        let mut t = TransitionTable::new(StateMapper::Naive);
        t.record_n(key(0), class(0), key(1), 250);
        t.record_n(key(0), class(0), key(2), 250);
        t.record_n(key(0), class(1), key(3), 250);
        t.record_n(key(0), class(1), key(4), 250);
        let r = independence_test(&t, 0.01, 25);
        assert!(r.records[0].p_value().unwrap() < 1e-6);
        assert_eq!(r.summary.rejected_corrected, 1);
        let zero = independence_test(&t, 0.0, 25);
        assert_eq!(zero.summary.rejected_raw, 0);
        assert_eq!(zero.summary.rejected_corrected, 0);
    }

    #[test]
    fn sample_floor_marks_untestable() {
        let mut t = TransitionTable::new(StateMapper::Naive);
        t.record_n(key(0), class(0), key(1), 100);
        t.record_n(key(0), class(1), key(2), 24);
        t.record_n(key(5), class(0), key(1), 100);
        let r = independence_test(&t, 0.01, 25);
        assert!(r.records.iter().all(|r| r.verdict == StateVerdict::Untestable));
        assert_eq!(r.summary.states_tested, 0);
        assert_eq!(r.summary.multi_class_states, 1);
        assert!(r.low_power());
    }

    #[test]
    fn embedded_full_history_has_single_classes() {
        let trajectories = simulate(Regime::NoRepeat, 3000, 4);
        let r = audit(&trajectories, StateMapper::Embedded, HistoryClassifier::FullHistory, 0.01, 25).unwrap();
        assert_eq!(r.summary.multi_class_states, 0);
        assert_eq!(r.summary.states_tested, 0);
        assert_eq!(r.summary.rejected_corrected, 0);
        assert!(verify_embedding(&trajectories, 0.01, 25).unwrap().holds());
    }

    #[test]
    fn forged_histories_detected() {
        let mut by_history = TransitionTable::new(StateMapper::Embedded);
        by_history.record(key(0), class(0), key(1));
        by_history.record(key(0), class(1), key(1));
        let by_half = TransitionTable::new(StateMapper::Embedded);
        let v = verify_embedding_tables(&by_history, &by_half, 0.01, 25).unwrap();
        assert_eq!(v, EmbeddingVerdict::CounterexampleState { state: key(0), kind: CounterexampleKind::MultipleHistories });
    }

    #[test]
    fn heterogeneous_halves_detected() {
        let mut by_history = TransitionTable::new(StateMapper::Embedded);
        by_history.record(key(0), class(0), key(1));
        let mut by_half = TransitionTable::new(StateMapper::Embedded);
        by_half.record_n(key(0), class(0), key(1), 300);
        by_half.record_n(key(0), class(1), key(2), 300);
        let v = verify_embedding_tables(&by_history, &by_half, 0.01, 25).unwrap();
        assert_eq!(v, EmbeddingVerdict::CounterexampleState { state: key(0), kind: CounterexampleKind::Heterogeneous });
    }

    #[test]
    fn negative_control_requires_repeat_allowed() {
        let t = simulate(Regime::NoRepeat, 10, 5);
        assert!(negative_control(&t, HistoryClassifier::RejectedSet, 0.01, 25).is_err());
    }

    #[test]
    fn no_repeat_naive_state_depends_on_history() {
        let t = simulate(Regime::NoRepeat, 20_000, 6);
        let r = audit(&t, StateMapper::Naive, HistoryClassifier::RejectedSet, 0.01, 25).unwrap();
        assert!(r.summary.rejected_corrected >= 1, "{:?}", r.summary);
    }

    #[test]
    fn report_text_has_six_significant_digits() {
        assert_eq!(sig6(1386.2943611198906), "1.38629e3");
        let mut t = TransitionTable::new(StateMapper::Naive);
        t.record_n(key(0), class(0), key(1), 250);
        t.record_n(key(0), class(1), key(2), 250);
        let text = independence_test(&t, 0.01, 25).to_text();
        assert!(text.contains("g = 6.93147e2"), "{text}");
        assert!(text.contains("verdict = rejected"));
    }

    #[test]
    fn false_positive_bound_values() {
        assert!((false_positive_bound(0.01, 100) - (0.01 + 3.0 * (0.0099f64 / 100.0).sqrt())).abs() < 1e-15);
        assert_eq!(false_positive_bound(0.0, 10), 0.0);
    }
}
