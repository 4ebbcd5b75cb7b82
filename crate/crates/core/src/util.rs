use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rounds half away from zero (`f64::round` semantics), saturating into `u8`.
pub(crate) fn round_to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Deterministic RNG for a `(seed, stream)` pair. Streams let independent
/// consumers (particles, classes, restarts) draw without sharing state.
pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from a master seed.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
