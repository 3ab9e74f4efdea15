//! Per-episode random streams.
//!
//! Episode `i` of a run with master seed `s` draws from independent streams
//! seeded with `stream_seed(s, i, lane)`:
//!
//! ```text
//! stream_seed(s, i, lane) = mix(mix(mix(s) ^ i) ^ lane)
//! ```
//!
//! where `mix` is the SplitMix64 output function and `lane` is 0 for the
//! engine (proposer draws) and 1 for the policies. Each stream seeds a
//! ChaCha8 generator.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lane {
    Game = 0,
    Policy = 1,
}

pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(master: u64, episode: u64, lane: Lane) -> u64 {
    mix(mix(mix(master) ^ episode) ^ lane as u64)
}
