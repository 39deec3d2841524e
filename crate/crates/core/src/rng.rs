//! Deterministic pseudo-random stream used for all seeded draws.
//!
//! The generator is xoshiro256** seeded through splitmix64, so any
//! reimplementation that follows the same two published algorithms
//! reproduces every dataset and initialization bit for bit.

/// Name advertised by the CLI so artifacts record the exact generator.
pub const PRNG_NAME: &str = "xoshiro256**";

/// xoshiro256** with splitmix64 seed expansion.
#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    state: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for s in &mut state {
            *s = splitmix64(&mut sm);
        }
        Xoshiro256StarStar { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
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

    /// Uniform on [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [-half_width, +half_width).
    pub fn uniform_symmetric(&mut self, half_width: f64) -> f64 {
        -half_width + 2.0 * half_width * self.next_f64()
    }

    /// Uniform index below `bound` (modulo reduction; bound must be > 0).
    pub fn next_index(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    #[cfg(test)]
    fn from_state(state: [u64; 4]) -> Self {
        Xoshiro256StarStar { state }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
