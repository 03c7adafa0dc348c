//! Deterministic random number streams.
//!
//! One PRNG family (ChaCha12) everywhere. Experiments key their streams by
//! `(seed, trial)`: the seed picks the key, the trial index picks the
//! stream, so parallel trials are independent and reproducible regardless
//! of scheduling. Within a trial the single stream is consumed in a fixed
//! phase order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The PRNG used throughout.
pub type Prng = ChaCha12Rng;

/// Stream for trial `trial` of an experiment with base seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> Prng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

/// Stream for one-shot draws (state generators and the like).
pub fn seeded_rng(seed: u64) -> Prng {
    ChaCha12Rng::seed_from_u64(seed)
}
