//! Deterministic random streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent stream `index` of the family `name` under `root`.
pub fn substream(root: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root ^ fnv1a(name));
    rng.set_stream(index);
    rng
}

/// A derived seed, for APIs that take a root seed rather than a stream.
pub fn mix(root: u64, name: &str, index: u64) -> u64 {
    use rand::Rng;
    substream(root, name, index).random()
}
