//! Counter-based random substreams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream keyed by the
//! master seed, an experiment-point label and the trial index, so results do
//! not depend on how trials are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Default master seed used when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 0x5EED_C0DE_2018;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a key for one experiment point (one row of a sweep).
pub fn point_key(master_seed: u64, point: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(point.wrapping_add(0xA5A5_A5A5)))
}

/// The random stream for `trial` of the experiment point identified by `key`.
pub fn substream(key: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

/// Order-sensitive digest of the per-trial seeds; lets two reports be
/// checked for identical randomness without storing every seed.
pub fn seeds_digest(key: u64, trials: u64) -> u64 {
    (0..trials).fold(splitmix64(key), |acc, t| {
        splitmix64(acc ^ splitmix64(key ^ t))
    })
}
