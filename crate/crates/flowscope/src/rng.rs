//! Deterministic 64-bit generator used everywhere randomness is needed.
//!
//! SplitMix64 (Steele, Lea & Flood 2014): a counter mixed through a fixed
//! finaliser. Chosen because identical seeds give identical streams on every
//! platform (pure integer arithmetic), and independent streams can be derived
//! by mixing a stream index into the seed, so parallel workers never share
//! state.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derives the seed for an independent substream. Substream `k` of seed
    /// `s` is `mix(s ^ mix(k + 1))`; distinct `k` give decorrelated streams.
    pub fn stream_seed(base_seed: u64, stream: u64) -> u64 {
        mix(base_seed ^ mix(stream.wrapping_add(1)))
    }

    pub fn split(&self, stream: u64) -> SplitMix64 {
        SplitMix64::new(Self::stream_seed(self.state, stream))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound. Modulo bias is below 2^-52 for desk-scale bounds.
    #[inline]
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Bernoulli(p) by integer threshold comparison; exact for p = 0 and 1.
    #[inline]
    pub fn next_bernoulli(&mut self, p: f64) -> bool {
        let threshold = (p * 18_446_744_073_709_551_616.0) as u128; // p * 2^64
        (self.next_u64() as u128) < threshold
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}
