use proptest::prelude::*;

use cbg_core::embedding::{
    canonical_key, decode_key, history_class_key, AnyState, EmbeddedState, HistoryClassifier, StateKey,
};
use cbg_core::engine::{EligibilityRule, GameSpec, Outcome, Regime, TerminationReason};
use cbg_core::harness::log::{records_of, trajectories_from_records, LogHeader};
use cbg_core::harness::simulate::simulate_episode;
use cbg_core::harness::{read_log, write_log, PolicySpec};

fn regime() -> impl Strategy<Value = Regime> {
    prop_oneof![Just(Regime::RepeatAllowed), Just(Regime::LearnedAvoidance), Just(Regime::NoRepeat)]
}

fn eligibility() -> impl Strategy<Value = EligibilityRule> {
    prop_oneof![Just(EligibilityRule::AllAgents), Just(EligibilityRule::EachProposesOnce)]
}

prop_compose! {
    fn spec()(n in 1usize..=6, r in regime(), e in eligibility(), cap in 1u32..60) -> GameSpec {
        GameSpec::new(n, r, e).unwrap().with_max_rounds(Some(cap))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn filtrations_are_strictly_nested(spec in spec(), seed: u64, ep in 0u64..1000, p in 0.0f64..=1.0) {
        let t = simulate_episode(spec, seed, ep, p).unwrap();
        for k in 0..t.rounds() {
            let (a, b) = (t.filtration.prefix(k), t.filtration.prefix(k + 1));
            prop_assert!(a.is_prefix_of(&b));
            prop_assert!(!b.is_prefix_of(&a));
            prop_assert_eq!(b.len(), a.len() + 1);
        }
    }

    #[test]
    fn protocol_invariants(spec in spec(), seed: u64, ep in 0u64..1000, p in 0.0f64..=1.0) {
        let t = simulate_episode(spec, seed, ep, p).unwrap();
        let n = spec.n();
        prop_assert!(t.rounds() >= 1);
        let events = t.events();
        for (i, e) in events.iter().enumerate() {
            prop_assert_eq!(e.round as usize, i);
            prop_assert!(e.coalition.contains(e.proposer));
            prop_assert!(e.coalition.is_within(n));
            prop_assert!(e.is_well_formed());
            prop_assert_eq!(e.outcome == Outcome::Accepted, i + 1 == events.len() && matches!(t.termination, TerminationReason::Agreement(_)));
            if spec.regime == Regime::NoRepeat {
                prop_assert!(!events[..i].iter().any(|d| d.outcome == Outcome::Rejected && d.coalition == e.coalition));
            }
        }
        if spec.eligibility == EligibilityRule::EachProposesOnce {
            prop_assert!(t.rounds() <= n);
        }
        if t.termination == TerminationReason::RoundLimit {
            prop_assert_eq!(t.rounds(), spec.max_rounds.unwrap() as usize);
        }
    }

    #[test]
    fn state_keys_round_trip(spec in spec(), seed: u64, ep in 0u64..1000, p in 0.0f64..=1.0) {
        let t = simulate_episode(spec, seed, ep, p).unwrap();
        let n = spec.n();
        for round in 0..t.rounds() {
            let s = EmbeddedState::at_round(&t.filtration, round);
            for state in [AnyState::Naive(s.naive()), AnyState::Embedded(s)] {
                let key = canonical_key(n, &state);
                prop_assert_eq!(decode_key(&key).unwrap(), (n, state));
                prop_assert_eq!(StateKey::from_hex(&key.to_hex()).unwrap(), key);
            }
        }
    }

    #[test]
    fn class_keys_separate_distinct_histories(spec in spec(), seed: u64, p in 0.0f64..=1.0) {
        let a = simulate_episode(spec, seed, 0, p).unwrap();
        let b = simulate_episode(spec, seed, 1, p).unwrap();
        for (i, j) in (0..a.rounds()).zip(0..b.rounds()) {
            let (fa, fb) = (a.filtration.prefix(i), b.filtration.prefix(j));
            let same = history_class_key(&fa, HistoryClassifier::FullHistory) == history_class_key(&fb, HistoryClassifier::FullHistory);
            prop_assert_eq!(same, fa == fb);
        }
    }

    #[test]
    fn log_round_trip(spec in spec(), seed: u64, count in 0u64..20, p in 0.0f64..=1.0) {
        let trajs: Vec<_> = (0..count).map(|ep| simulate_episode(spec, seed, ep, p).unwrap()).collect();
        let header = LogHeader::new(&spec, count, seed, PolicySpec::Random { p_accept: p });
        let mut buf = Vec::new();
        write_log(&mut buf, &header, &trajs).unwrap();
        let (h, parsed) = read_log(buf.as_slice()).unwrap();
        prop_assert_eq!(&h, &header);
        prop_assert_eq!(&parsed, &trajs);
        let records: Vec<_> = trajs.iter().flat_map(records_of).collect();
        let again: Vec<_> = trajectories_from_records(spec, &records).unwrap().iter().flat_map(records_of).collect();
        prop_assert_eq!(again, records);
        let mut rewritten = Vec::new();
        write_log(&mut rewritten, &h, &parsed).unwrap();
        prop_assert_eq!(rewritten, buf);
    }
}
