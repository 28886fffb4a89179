//! Portable deterministic 64-bit PRNG (splitmix64).
//!
//! Traces, synthesized tensors, and stub-model weights must be reproducible
//! bit-for-bit across platforms and releases, so everything random in this
//! crate draws from this generator rather than an external RNG whose stream
//! may change between versions.
//!
//! Reference: Steele, Lea & Flood, "Fast Splittable Pseudorandom Number
//! Generators", OOPSLA 2014 (the finalizer used by `SplittableRandom`).

/// splitmix64 generator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform f64 in [0, 1): top 53 bits over 2^53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform f32 in [-1, 1): top 24 bits over 2^23, shifted.
    pub fn next_f32_signed(&mut self) -> f32 {
        (self.next_u64() >> 40) as f32 / (1u32 << 23) as f32 - 1.0
    }

    /// Standard normal deviate via Box-Muller on two uniform draws.
    pub fn next_gaussian(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n).
    pub fn next_below(&mut self, n: u64) -> u64 {
        // Modulo bias is negligible for the small n used here.
        self.next_u64() % n
    }
}

/// Mixes a stream index into a base seed so derived streams are independent.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut rng = SplitMix64::new(base ^ stream.wrapping_mul(GOLDEN_GAMMA));
    rng.next_u64()
}
