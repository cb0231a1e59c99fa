//! Counter-based uniform streams.
//!
//! Every random quantity in the crate is a pure function of a seed and a
//! small set of integer coordinates, so realizations are reproducible across
//! runs, evaluation orders, and thread schedules. No generator state exists.

/// Stream tag for environment proportions.
pub const STREAM_ENV: u64 = 0x9E6C_63D1_7C4D_F2A1;
/// Stream tag for walk-step uniforms.
pub const STREAM_WALK: u64 = 0x51ED_270B_8A43_55C7;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit hash of a (seed, stream, a, b) coordinate tuple.
#[inline]
pub fn counter_bits(seed: u64, stream: u64, a: u64, b: u64) -> u64 {
    let mut h = mix64(seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F));
    h = mix64(h.wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    mix64(h.wrapping_add(b.wrapping_mul(0xD134_2543_DE82_EF95)))
}

/// Per-row hash; combine with [`row_unit`] to draw many entries of one row
/// without rehashing the row coordinate.
#[inline]
pub fn row_state(seed: u64, stream: u64, a: u64) -> u64 {
    let h = mix64(seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F));
    mix64(h.wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[inline]
pub fn row_unit(state: u64, b: u64) -> f64 {
    to_unit_open(mix64(state.wrapping_add(b.wrapping_mul(0xD134_2543_DE82_EF95))))
}

/// Map 64 random bits to the open interval (0,1); never returns 0 or 1, so
/// log-domain consumers are safe pathwise. 52 bits keep the +0.5 offset
/// exact, bounding the result away from both endpoints by 2^-53.
#[inline]
pub fn to_unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4503599627370496.0)
}

/// Uniform in (0,1) at a coordinate tuple.
#[inline]
pub fn unit_open(seed: u64, stream: u64, a: u64, b: u64) -> f64 {
    to_unit_open(counter_bits(seed, stream, a, b))
}
