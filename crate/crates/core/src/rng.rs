//! Seeded, portable randomness.
//!
//! Every random choice in the engine flows through [`SplitMix64`] so that
//! identical seeds reproduce identical bytes on any platform. The generator
//! and the shuffle are pinned algorithms, not re-exported library internals,
//! so orderings stay stable across dependency upgrades.

/// SplitMix64 generator (Steele, Lea & Flood 2014). 64 bits of state,
/// full-period, trivially portable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derive an independent stream from a seed and a label, so per-class or
    /// per-split streams never overlap by accident.
    pub fn derived(seed: u64, label: u64) -> Self {
        let mut base = Self::new(seed);
        let a = base.next_u64();
        Self::new(a ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)` via rejection sampling (unbiased).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller, one value per call).
    pub fn next_gaussian(&mut self) -> f64 {
        // u ∈ (0, 1] so ln(u) is finite.
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
}

/// In-place seeded Fisher-Yates shuffle.
pub fn fisher_yates<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Shuffled `[0, n)` index vector for a given seed.
pub fn shuffled_indices(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    fisher_yates(&mut idx, rng);
    idx
}
