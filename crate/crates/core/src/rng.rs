//! Seedable shift-register generator used by every Monte Carlo routine.
//!
//! The generator is xoshiro256** (Blackman & Vigna), state seeded by four
//! consecutive outputs of SplitMix64 started at the user seed. Both
//! algorithms are fixed here so that a seed reproduces the same stream in
//! any implementation:
//!
//! ```text
//! splitmix64:  s += 0x9E3779B97F4A7C15
//!              z = s
//!              z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!              return z ^ (z >> 31)
//!
//! xoshiro256**: result = rotl(s1 * 5, 7) * 9
//!              t = s1 << 17
//!              s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
//!              s2 ^= t;  s3 = rotl(s3, 45)
//! ```
//!
//! Uniforms are drawn from the open interval (0, 1) as
//! `((next >> 11) + 0.5) · 2⁻⁵³`, so inverse-CDF transforms never see 0 or 1.

#[derive(Debug, Clone)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Xoshiro256 {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Xoshiro256 { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw from the open interval (0, 1).
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}
