//! Deterministic random number generation with named streams.
//!
//! The generator is xoshiro256++ seeded through SplitMix64. For a given
//! `(seed, stream)` pair the four state words are outputs `4*stream` through
//! `4*stream + 3` of the SplitMix64 sequence started at `seed` (a SplitMix64
//! step advances its state by a fixed odd constant, so jumping to position
//! `4*stream` is a single wrapping multiply-add). Streams therefore never
//! share state words and can be handed to independent consumers: weight
//! initialization, batch shuffling, jitter draws, and data synthesis each own
//! a stream, so adding draws to one never perturbs the others.
//!
//! Floating-point helpers are built only from integer output, `libm`, and
//! exact dyadic scaling, which keeps every sequence bit-identical across
//! platforms:
//!
//! * `uniform01` maps the top 53 bits onto `[0, 1)`,
//! * `standard_normal` is the cosine branch of the Box-Muller transform
//!   (each call consumes exactly two uniforms; the sine branch is discarded
//!   rather than cached so call counts stay predictable),
//! * `u64_below` rejects the partial final copy of `[0, n)` so results are
//!   exactly uniform.

/// Fixed stream ids used by the rest of the crate.
pub mod streams {
    /// Model weight initialization.
    pub const WEIGHT_INIT: u64 = 0;
    /// Mini-batch shuffling inside the trainer.
    pub const BATCH_SHUFFLE: u64 = 1;
    /// Per-batch jitter draws.
    pub const JITTER: u64 = 2;
    /// Synthetic dataset generation and subsampling.
    pub const DATA: u64 = 3;
    /// First id of the block reserved for Monte Carlo experiments.
    pub const MC_BASE: u64 = 16;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic xoshiro256++ stream identified by `(seed, stream)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    s: [u64; 4],
}

impl RngStream {
    /// Creates the stream `stream` of the generator family keyed by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut state = seed.wrapping_add(stream.wrapping_mul(4).wrapping_mul(GOLDEN));
        let mut s = [0u64; 4];
        for word in &mut s {
            *word = splitmix_next(&mut state);
        }
        if s == [0, 0, 0, 0] {
            s[0] = GOLDEN;
        }
        RngStream { s }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw from `[0, 1)` with 53-bit resolution.
    pub fn uniform01(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    /// Standard normal draw via the Box-Muller cosine branch.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        r * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Normal draw with the given mean and standard deviation.
    pub fn normal(&mut self, mu: f64, sigma: f64) -> f64 {
        mu + sigma * self.standard_normal()
    }

    /// Uniform draw from `{0, 1, ..., n-1}` by rejection.
    pub fn u64_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// Uniformly shuffles `items` in place (Fisher-Yates).
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let n = items.len();
        for i in (1..n).rev() {
            let j = self.u64_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
