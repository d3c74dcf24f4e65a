//! SplitMix64 stream and Fisher-Yates shuffling.
//!
//! Fully specified so any implementation reproduces the same update orders:
//! bounded draws take the top `ceil(log2(bound))` bits of the next output and
//! reject values `>= bound`, with no modulo reduction.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound`. `bound == 1` consumes nothing.
    pub fn next_bounded(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        if bound == 1 {
            return 0;
        }
        let bits = 64 - (bound - 1).leading_zeros();
        let shift = 64 - bits;
        loop {
            let x = self.next_u64() >> shift;
            if x < bound {
                return x;
            }
        }
    }

    /// Overwrites `order` with a uniformly random permutation of `0..len`.
    pub fn shuffle_into(&mut self, order: &mut [u32]) {
        for (i, slot) in order.iter_mut().enumerate() {
            *slot = i as u32;
        }
        for i in (1..order.len()).rev() {
            let j = self.next_bounded(i as u64 + 1) as usize;
            order.swap(i, j);
        }
    }
}

pub fn next_random(rng: &mut SplitMix64) -> u64 {
    rng.next_u64()
}

/// Random permutation of `0..n`.
pub fn shuffle(rng: &mut SplitMix64, n: usize) -> Vec<u32> {
    let mut order = vec![0u32; n];
    rng.shuffle_into(&mut order);
    order
}
