#![allow(dead_code)]

use std::collections::BTreeMap;

use cbg_core::audit::TransitionTable;
use cbg_core::embedding::{decode_key, AnyState, ClassKey, StateKey};
use cbg_core::harness::enumerate::{HistoryClass, NextState, Proposal, TransitionMasses};

pub fn proposal_of(key: &StateKey) -> Proposal {
    match decode_key(key).expect("audit keys decode") {
        (_, AnyState::Naive(s)) => (s.proposer.0, s.coalition.mask()),
        (_, AnyState::Embedded(s)) => (s.proposer.0, s.coalition.mask()),
    }
}

pub fn next_of(key: &StateKey) -> NextState {
    if key.is_absorbing() {
        NextState::End
    } else {
        let (proposer, mask) = proposal_of(key);
        NextState::Proposal { proposer, mask }
    }
}

/// Rejected-set class keys: tag 1 followed by ascending little-endian masks.
pub fn rejected_class_of(key: &ClassKey) -> HistoryClass {
    let b = key.as_bytes();
    assert_eq!(b[0], 1, "not a rejected-set class key");
    HistoryClass::Rejected(b[1..].chunks(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
}

/// Previous-state class keys: tag 2, then `[0]` or `[1, proposer, mask_le]`.
pub fn previous_class_of(key: &ClassKey) -> HistoryClass {
    let b = key.as_bytes();
    assert_eq!(b[0], 2, "not a previous-state class key");
    match b[1] {
        0 => HistoryClass::Previous(None),
        _ => HistoryClass::Previous(Some((b[2], u16::from_le_bytes([b[3], b[4]])))),
    }
}

pub fn empirical(counts: &BTreeMap<StateKey, u64>) -> (BTreeMap<NextState, f64>, u64) {
    let total: u64 = counts.values().sum();
    let dist = counts.iter().map(|(k, &c)| (next_of(k), c as f64 / total as f64)).collect();
    (dist, total)
}

/// For each class of `state` with at least `min` samples: (class, samples, TV to the exact law).
pub fn class_distances(
    table: &TransitionTable,
    state: &StateKey,
    exact: &TransitionMasses,
    class_of: fn(&ClassKey) -> HistoryClass,
    min: u64,
) -> Vec<(HistoryClass, u64, f64)> {
    let proposal = proposal_of(state);
    let mut out = Vec::new();
    for (class, counts) in table.classes(state).expect("state present") {
        let (dist, n) = empirical(counts);
        if n < min {
            continue;
        }
        let c = class_of(class);
        let truth = exact.conditional(proposal, &c).expect("class reachable in the exact model");
        out.push((c, n, cbg_core::harness::enumerate::total_variation(&dist, &truth)));
    }
    out
}

/// Upper `q` quantile of the TV distance between `truth` and the empirical
/// law of `n` draws from it, by parametric bootstrap.
pub fn tv_sampling_quantile(truth: &BTreeMap<NextState, f64>, n: u64, q: f64, reps: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<NextState> = truth.keys().copied().collect();
    let cdf: Vec<f64> = truth.values().scan(0.0, |acc, p| {
        *acc += p;
        Some(*acc)
    }).collect();
    let mut tvs: Vec<f64> = (0..reps)
        .map(|_| {
            let mut counts = vec![0u64; keys.len()];
            for _ in 0..n {
                let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
                counts[cdf.partition_point(|&c| c <= u).min(keys.len() - 1)] += 1;
            }
            let emp: BTreeMap<NextState, f64> = keys.iter().zip(&counts).map(|(k, &c)| (*k, c as f64 / n as f64)).collect();
            cbg_core::harness::enumerate::total_variation(&emp, truth)
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    tvs[((reps as f64 * q).ceil() as usize).min(reps - 1)]
}
