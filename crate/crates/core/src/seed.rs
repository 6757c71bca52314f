//! Deterministic seed derivation for independent work units.

/// SplitMix64 finaliser.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for frame `frame` of sweep point `point`.
pub(crate) fn derive(base: u64, point: u64, frame: u64) -> u64 {
    mix(base ^ mix(point.wrapping_mul(0xD6E8_FEB8_6659_FD93)) ^ mix(frame ^ 0xA076_1D64_78BD_642F))
}

/// Sub-stream seed within one frame (bits, phase, noise, ...).
pub(crate) fn substream(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(0x5851_F42D_4C95_7F2D)))
}
