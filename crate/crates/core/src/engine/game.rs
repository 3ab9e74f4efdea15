use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    full_mask, AgentId, Coalition, EligibilityRule, GameSpec, IllegalReason, NaiveState, Outcome,
    ProposalEvent, ProtocolError, Regime, Reply, Response, TerminationReason,
};
use crate::embedding::{EmbeddedState, Filtration};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GamePhase {
    AwaitingProposal { proposer: AgentId },
    AwaitingResponses {
        state: NaiveState,
        /// Members still to reply, in query order.
        pending: Vec<AgentId>,
        replies: Vec<Response>,
    },
    Terminated(TerminationReason),
}

impl GamePhase {
    fn name(&self) -> &'static str {
        match self {
            GamePhase::AwaitingProposal { .. } => "AwaitingProposal",
            GamePhase::AwaitingResponses { .. } => "AwaitingResponses",
            GamePhase::Terminated(_) => "Terminated",
        }
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self, GamePhase::Terminated(_))
    }
}

/// All coalitions `proposer` may name, in ascending mask order.
pub fn legal_proposals(
    n: usize,
    proposer: AgentId,
    filtration: &Filtration,
    regime: Regime,
) -> Vec<Coalition> {
    let bit = 1u16 << proposer.0;
    let rest = full_mask(n) & !bit;
    let rejected = match regime {
        Regime::NoRepeat => filtration.rejected_coalitions(),
        Regime::RepeatAllowed | Regime::LearnedAvoidance => BTreeSet::new(),
    };
    let mut out = Vec::with_capacity(1 << rest.count_ones());
    let mut sub = rest;
    loop {
        let c = Coalition(sub | bit);
        if !rejected.contains(&c) {
            out.push(c);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    out.reverse();
    out
}

/// Size of [`legal_proposals`] without materializing it.
pub fn legal_proposal_count(
    n: usize,
    proposer: AgentId,
    rejected: &BTreeSet<Coalition>,
    regime: Regime,
) -> usize {
    let total = 1usize << (n - 1);
    match regime {
        Regime::NoRepeat => total - rejected.iter().filter(|c| c.contains(proposer)).count(),
        Regime::RepeatAllowed | Regime::LearnedAvoidance => total,
    }
}

/// Draws the next proposer uniformly among eligible agents that still have a
/// legal proposal. `None` means the game is exhausted.
pub fn choose_proposer<R: Rng + ?Sized>(
    spec: &GameSpec,
    filtration: &Filtration,
    rng: &mut R,
) -> Option<AgentId> {
    let candidates = proposer_candidates(spec, filtration);
    if candidates.is_empty() {
        return None;
    }
    Some(candidates[rng.gen_range(0..candidates.len())])
}

/// Agents [`choose_proposer`] draws from, ascending.
pub(crate) fn proposer_candidates(spec: &GameSpec, filtration: &Filtration) -> Vec<AgentId> {
    let rejected = match spec.regime {
        Regime::NoRepeat => filtration.rejected_coalitions(),
        _ => BTreeSet::new(),
    };
    let proposed: u16 = filtration.events().iter().fold(0, |m, e| m | (1 << e.proposer.0));
    spec.agents()
        .filter(|a| match spec.eligibility {
            EligibilityRule::AllAgents => true,
            EligibilityRule::EachProposesOnce => proposed & (1 << a.0) == 0,
        })
        .filter(|&a| legal_proposal_count(spec.n(), a, &rejected, spec.regime) > 0)
        .collect()
}

/// Single-threaded handle on one running game.
#[derive(Clone, Debug)]
pub struct Game {
    spec: GameSpec,
    rng: ChaCha8Rng,
    filtration: Filtration,
    phase: GamePhase,
    current: Option<NaiveState>,
}

impl Game {
    /// Starts a game; the first proposer is drawn from the seeded generator.
    pub fn new(spec: GameSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filtration = Filtration::new();
        // Round 0: every agent holds at least its singleton, so this never fails.
        let proposer = choose_proposer(&spec, &filtration, &mut rng)
            .expect("round 0 always has an eligible proposer");
        Game {
            spec,
            rng,
            filtration,
            phase: GamePhase::AwaitingProposal { proposer },
            current: None,
        }
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn phase(&self) -> &GamePhase {
        &self.phase
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn round(&self) -> u32 {
        self.filtration.len() as u32
    }

    /// The agent expected to act next, if any.
    pub fn current_actor(&self) -> Option<AgentId> {
        match &self.phase {
            GamePhase::AwaitingProposal { proposer } => Some(*proposer),
            GamePhase::AwaitingResponses { pending, .. } => pending.first().copied(),
            GamePhase::Terminated(_) => None,
        }
    }

    /// Legal proposals for the current proposer; empty unless awaiting a proposal.
    pub fn legal_proposals(&self) -> Vec<Coalition> {
        match self.phase {
            GamePhase::AwaitingProposal { proposer } => {
                legal_proposals(self.spec.n(), proposer, &self.filtration, self.spec.regime)
            }
            _ => Vec::new(),
        }
    }

    pub fn check_proposal(&self, proposer: AgentId, coalition: Coalition) -> Result<(), IllegalReason> {
        if coalition.mask() == 0 {
            return Err(IllegalReason::Empty);
        }
        if !coalition.is_within(self.spec.n()) {
            return Err(IllegalReason::OutsideAgentSet);
        }
        if !coalition.contains(proposer) {
            return Err(IllegalReason::NotContainingProposer);
        }
        if self.spec.regime == Regime::NoRepeat && self.filtration.has_rejected(coalition) {
            return Err(IllegalReason::AlreadyRejected);
        }
        Ok(())
    }

    pub fn submit_proposal(&mut self, coalition: Coalition) -> Result<&GamePhase, ProtocolError> {
        let proposer = match self.phase {
            GamePhase::AwaitingProposal { proposer } => proposer,
            ref other => {
                return Err(ProtocolError::WrongPhase { expected: "AwaitingProposal", actual: other.name() })
            }
        };
        self.check_proposal(proposer, coalition)
            .map_err(|reason| ProtocolError::IllegalProposal { coalition: coalition.mask(), reason })?;
        let state = NaiveState { proposer, coalition };
        self.current = Some(state);
        let pending = coalition.responders(proposer);
        if pending.is_empty() {
            self.record(state, Vec::new(), Outcome::Accepted);
            self.phase = GamePhase::Terminated(TerminationReason::Agreement(coalition));
        } else {
            self.phase = GamePhase::AwaitingResponses { state, pending, replies: Vec::new() };
        }
        Ok(&self.phase)
    }

    pub fn submit_response(&mut self, reply: Reply) -> Result<&GamePhase, ProtocolError> {
        let GamePhase::AwaitingResponses { state, pending, replies } = &mut self.phase else {
            return Err(ProtocolError::WrongPhase {
                expected: "AwaitingResponses",
                actual: self.phase.name(),
            });
        };
        let state = *state;
        let responder = pending.remove(0);
        replies.push(Response { responder, reply });
        match reply {
            Reply::Reject => {
                let replies = std::mem::take(replies);
                self.record(state, replies, Outcome::Rejected);
                self.start_round();
            }
            Reply::Accept if pending.is_empty() => {
                let replies = std::mem::take(replies);
                self.record(state, replies, Outcome::Accepted);
                self.phase = GamePhase::Terminated(TerminationReason::Agreement(state.coalition));
            }
            Reply::Accept => {}
        }
        Ok(&self.phase)
    }

    fn record(&mut self, state: NaiveState, responses: Vec<Response>, outcome: Outcome) {
        let event = ProposalEvent {
            round: self.round(),
            proposer: state.proposer,
            coalition: state.coalition,
            responses,
            outcome,
        };
        self.filtration
            .push(event)
            .expect("engine keeps rounds contiguous");
    }

    fn start_round(&mut self) {
        self.current = None;
        if let Some(limit) = self.spec.max_rounds {
            if self.filtration.len() >= limit as usize {
                self.phase = GamePhase::Terminated(TerminationReason::RoundLimit);
                return;
            }
        }
        self.phase = match choose_proposer(&self.spec, &self.filtration, &mut self.rng) {
            Some(proposer) => GamePhase::AwaitingProposal { proposer },
            None => GamePhase::Terminated(TerminationReason::Exhausted),
        };
    }

    /// `(proposer, coalition)` of this round's proposal.
    pub fn naive_state(&self) -> Result<NaiveState, ProtocolError> {
        self.current.ok_or(ProtocolError::NoProposal)
    }

    /// This round's proposal together with the history recorded so far. Once
    /// the round has completed, its own event is the last one in the history.
    pub fn embedded_state(&self) -> Result<EmbeddedState, ProtocolError> {
        let s = self.naive_state()?;
        Ok(EmbeddedState {
            coalition: s.coalition,
            proposer: s.proposer,
            filtration: self.filtration.clone(),
        })
    }

    pub fn termination(&self) -> Option<TerminationReason> {
        match self.phase {
            GamePhase::Terminated(r) => Some(r),
            _ => None,
        }
    }

    /// Consumes a finished game. Panics if the game has not terminated.
    pub fn into_trajectory(self, episode: u64) -> super::Trajectory {
        let termination = self.termination().expect("game has not terminated");
        super::Trajectory { episode, spec: self.spec, filtration: self.filtration, termination }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(members: &[u8]) -> Coalition {
        Coalition::from_members(members.iter().copied()).unwrap()
    }

    fn rejected(round: u32, proposer: u8, members: &[u8]) -> ProposalEvent {
        let coalition = c(members);
        ProposalEvent::from_replies(round, AgentId(proposer), coalition, &[Reply::Reject]).unwrap()
    }

    fn filtration_of(events: Vec<ProposalEvent>) -> Filtration {
        let mut f = Filtration::new();
        for e in events {
            f.push(e).unwrap();
        }
        f
    }

    fn spec(n: usize, regime: Regime, eligibility: EligibilityRule) -> GameSpec {
        GameSpec::new(n, regime, eligibility).unwrap()
    }

    #[test]
    fn legal_sets_for_three_agents() {
        let empty = Filtration::new();
        assert_eq!(
            legal_proposals(3, AgentId(0), &empty, Regime::NoRepeat),
            vec![c(&[0]), c(&[0, 1]), c(&[0, 2]), c(&[0, 1, 2])]
        );
        let f = filtration_of(vec![rejected(0, 0, &[0, 1])]);
        assert_eq!(
            legal_proposals(3, AgentId(0), &f, Regime::NoRepeat),
            vec![c(&[0]), c(&[0, 2]), c(&[0, 1, 2])]
        );
    }

    #[test]
    fn repeat_allowed_ignores_rejections() {
        let f = filtration_of(vec![rejected(0, 0, &[0, 1])]);
        assert_eq!(legal_proposals(2, AgentId(0), &f, Regime::RepeatAllowed), vec![c(&[0]), c(&[0, 1])]);
        assert_eq!(legal_proposals(2, AgentId(0), &f, Regime::LearnedAvoidance), vec![c(&[0]), c(&[0, 1])]);
    }

    #[test]
    fn rejection_set_is_global_across_proposers() {
        let f = filtration_of(vec![rejected(0, 0, &[0, 1])]);
        assert_eq!(legal_proposals(2, AgentId(1), &f, Regime::NoRepeat), vec![c(&[1])]);
    }

    #[test]
    fn legal_count_matches_enumeration() {
        let f = filtration_of(vec![rejected(0, 0, &[0, 1]), rejected(1, 2, &[0, 1, 2]), rejected(2, 1, &[1, 3])]);
        let rej = f.rejected_coalitions();
        for regime in [Regime::NoRepeat, Regime::RepeatAllowed] {
            for a in 0..4 {
                assert_eq!(
                    legal_proposal_count(4, AgentId(a), &rej, regime),
                    legal_proposals(4, AgentId(a), &f, regime).len()
                );
            }
        }
    }

    #[test]
    fn once_eligibility_leaves_single_agent() {
        let s = spec(3, Regime::NoRepeat, EligibilityRule::EachProposesOnce);
        let f = filtration_of(vec![rejected(0, 0, &[0, 1]), rejected(1, 1, &[1, 2])]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            assert_eq!(choose_proposer(&s, &f, &mut rng), Some(AgentId(2)));
        }
    }

    #[test]
    fn exhausted_agent_excluded_from_draw() {
        // Constructed history; the engine itself never rejects a singleton.
        let singleton_rejected = ProposalEvent {
            round: 1,
            proposer: AgentId(0),
            coalition: c(&[0]),
            responses: vec![],
            outcome: Outcome::Rejected,
        };
        let mut f = filtration_of(vec![rejected(0, 0, &[0, 1])]);
        f.push(singleton_rejected).unwrap();
        let s = spec(2, Regime::NoRepeat, EligibilityRule::AllAgents);
        assert_eq!(proposer_candidates(&s, &f), vec![AgentId(1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(choose_proposer(&s, &f, &mut rng), Some(AgentId(1)));
        }
    }

    #[test]
    fn single_agent_game() {
        for seed in 0..20 {
            let mut g = Game::new(spec(1, Regime::NoRepeat, EligibilityRule::AllAgents), seed);
            assert_eq!(g.current_actor(), Some(AgentId(0)));
            assert_eq!(g.legal_proposals(), vec![c(&[0])]);
            let phase = g.submit_proposal(c(&[0])).unwrap().clone();
            assert_eq!(phase, GamePhase::Terminated(TerminationReason::Agreement(c(&[0]))));
        }
    }

    #[test]
    fn initial_proposer_roughly_uniform() {
        let s = spec(4, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut counts = [0usize; 4];
        for seed in 0..8000 {
            let g = Game::new(s, seed);
            counts[g.current_actor().unwrap().index()] += 1;
        }
        // 4 sigma of Binomial(8000, 1/4) is about 155.
        for k in counts {
            assert!((k as i64 - 2000).abs() < 155, "{counts:?}");
        }
    }

    fn game_with_proposer(s: GameSpec, want: u8) -> Game {
        (0..).map(|seed| Game::new(s, seed)).find(|g| g.current_actor() == Some(AgentId(want))).unwrap()
    }

    #[test]
    fn proposal_flow_and_early_stop() {
        let s = spec(3, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut g = game_with_proposer(s, 0);
        assert_eq!(g.naive_state(), Err(ProtocolError::NoProposal));
        assert!(g.embedded_state().is_err());
        let phase = g.submit_proposal(c(&[0, 1, 2])).unwrap().clone();
        match phase {
            GamePhase::AwaitingResponses { pending, .. } => assert_eq!(pending, vec![AgentId(1), AgentId(2)]),
            other => panic!("{other:?}"),
        }
        assert_eq!(g.naive_state().unwrap(), NaiveState { proposer: AgentId(0), coalition: c(&[0, 1, 2]) });
        let emb = g.embedded_state().unwrap();
        assert!(emb.filtration.is_empty());
        g.submit_response(Reply::Reject).unwrap();
        let e = &g.filtration().events()[0];
        assert_eq!(e.responses, vec![Response { responder: AgentId(1), reply: Reply::Reject }]);
        assert_eq!(e.outcome, Outcome::Rejected);
        assert!(matches!(g.phase(), GamePhase::AwaitingProposal { .. }));
        assert_eq!(g.naive_state(), Err(ProtocolError::NoProposal));
    }

    #[test]
    fn unanimous_acceptance_terminates() {
        let s = spec(3, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut g = game_with_proposer(s, 0);
        g.submit_proposal(c(&[0, 1, 2])).unwrap();
        assert!(matches!(g.submit_response(Reply::Accept).unwrap(), GamePhase::AwaitingResponses { .. }));
        let phase = g.submit_response(Reply::Accept).unwrap().clone();
        assert_eq!(phase, GamePhase::Terminated(TerminationReason::Agreement(c(&[0, 1, 2]))));
        assert_eq!(g.filtration().len(), 1);
        assert_eq!(g.filtration().events()[0].outcome, Outcome::Accepted);
        // Completed round: the history now ends with this proposal.
        let emb = g.embedded_state().unwrap();
        assert_eq!(emb.filtration.events().last().unwrap().naive_state(), g.naive_state().unwrap());
        assert!(matches!(g.submit_response(Reply::Accept), Err(ProtocolError::WrongPhase { .. })));
        assert!(matches!(g.submit_proposal(c(&[0])), Err(ProtocolError::WrongPhase { .. })));
    }

    #[test]
    fn single_responder_accept() {
        let s = spec(2, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut g = game_with_proposer(s, 1);
        g.submit_proposal(c(&[0, 1])).unwrap();
        let phase = g.submit_response(Reply::Accept).unwrap().clone();
        assert!(phase.is_terminated());
        assert_eq!(g.filtration().len(), 1);
    }

    #[test]
    fn singleton_auto_accepts() {
        let s = spec(3, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut g = game_with_proposer(s, 0);
        let phase = g.submit_proposal(c(&[0])).unwrap().clone();
        assert_eq!(phase, GamePhase::Terminated(TerminationReason::Agreement(c(&[0]))));
        assert!(g.filtration().events()[0].responses.is_empty());
    }

    #[test]
    fn illegal_proposals_name_the_rule() {
        let s = spec(3, Regime::NoRepeat, EligibilityRule::AllAgents);
        let mut g = game_with_proposer(s, 0);
        assert_eq!(
            g.submit_proposal(c(&[1, 2])).unwrap_err(),
            ProtocolError::IllegalProposal { coalition: 0b110, reason: IllegalReason::NotContainingProposer }
        );
        assert_eq!(
            g.submit_proposal(c(&[0, 3])).unwrap_err(),
            ProtocolError::IllegalProposal { coalition: 0b1001, reason: IllegalReason::OutsideAgentSet }
        );
        g.submit_proposal(c(&[0, 1])).unwrap();
        g.submit_response(Reply::Reject).unwrap();
        assert!(matches!(g.phase(), GamePhase::AwaitingProposal { .. }));
        let err = g.submit_proposal(c(&[0, 1])).unwrap_err();
        assert_eq!(
            err,
            ProtocolError::IllegalProposal { coalition: 0b11, reason: IllegalReason::AlreadyRejected }
        );
        assert!(matches!(g.submit_response(Reply::Accept), Err(ProtocolError::WrongPhase { .. })));
    }

    #[test]
    fn round_limit_stops_repeat_allowed() {
        let s = spec(2, Regime::RepeatAllowed, EligibilityRule::AllAgents).with_max_rounds(Some(3));
        let mut g = Game::new(s, 4);
        while !g.phase().is_terminated() {
            g.submit_proposal(Coalition::grand(2)).unwrap();
            g.submit_response(Reply::Reject).unwrap();
        }
        assert_eq!(g.termination(), Some(TerminationReason::RoundLimit));
        assert_eq!(g.filtration().len(), 3);
    }

    #[test]
    fn each_proposes_once_exhausts() {
        let s = spec(2, Regime::RepeatAllowed, EligibilityRule::EachProposesOnce);
        let mut g = Game::new(s, 11);
        for _ in 0..2 {
            g.submit_proposal(Coalition::grand(2)).unwrap();
            g.submit_response(Reply::Reject).unwrap();
        }
        assert_eq!(g.termination(), Some(TerminationReason::Exhausted));
    }
}
