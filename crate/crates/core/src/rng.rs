//! Counter-based child streams: stream `index` of the ChaCha8 generator keyed
//! by `master_seed`. Every replication owns its stream, so results do not
//! depend on which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when neither a flag nor the environment provides one.
pub const DEFAULT_SEED: u64 = 7;

pub fn child_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
