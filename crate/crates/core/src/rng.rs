//! Deterministic random streams.
//!
//! Every replicate or audit trial draws from its own ChaCha stream keyed by
//! the master seed and selected by the replicate index, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn seeded_substream(master_seed: u64, replicate_index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate_index);
    rng
}
