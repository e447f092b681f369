use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose-keyed RNG stream ids. Every consumer of randomness in the
/// workspace draws from its own stream of the run seed, so adding draws to
/// one phase never perturbs another.
pub mod stream {
    pub const DATASET: u64 = 1;
    pub const BC: u64 = 2;
    pub const Q_FIT: u64 = 3;
    pub const V_FIT: u64 = 4;
    pub const POLICY_INIT: u64 = 5;
    pub const TRAIN: u64 = 6;
    pub const EVAL: u64 = 7;
    pub const RATIO: u64 = 8;
    pub const ENV: u64 = 9;
    pub const VERIFY: u64 = 10;
}

/// A ChaCha8 generator seeded by `seed` and positioned on `stream`.
///
/// Identical (seed, stream) pairs always yield identical draws, which is what
/// makes whole runs reproducible byte for byte.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
