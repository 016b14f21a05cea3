use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const TOPOLOGY: u64 = 0;
pub(crate) const PRIORITY: u64 = 1;
pub(crate) const BASELINE_CHANNEL: u64 = 2;
pub(crate) const RECOVERY: u64 = 3;
pub(crate) const TRAFFIC_PAIRS: u64 = 4;
/// Hop-distance pair samples use `HOP_PAIRS + h`.
pub(crate) const HOP_PAIRS: u64 = 64;

/// Independent deterministic stream `stream` of the generator seeded by `seed`.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in (0, 1].
pub(crate) fn unit_open_closed<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}
