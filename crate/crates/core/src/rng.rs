//! Counter-based random streams.
//!
//! Every sequence draws from its own ChaCha8 stream keyed by
//! `(seed, trial, generation, start)`, so results do not depend on the order
//! or thread in which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::sim::SequenceStart;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_bytes(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Stream for one sequence of one trial. The seed sets the key; the
/// remaining coordinates pick the ChaCha stream id.
pub fn sequence_stream(
    seed: u64,
    trial: u64,
    generation: usize,
    start: SequenceStart,
) -> ChaCha8Rng {
    let flag = match start {
        SequenceStart::FromZero => 0u64,
        SequenceStart::FromPlus => 1,
    };
    let mut rng = ChaCha8Rng::from_seed(key_bytes(seed));
    rng.set_stream(mix(trial ^ mix(((generation as u64) << 1) | flag)));
    rng
}
