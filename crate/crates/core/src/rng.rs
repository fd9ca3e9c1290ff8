//! Keyed counter-based pseudo-random generator.
//!
//! Every random decision in this crate (parameter init, batch sampling,
//! Rademacher probes) flows through [`CounterRng`] so that a run is a pure
//! function of its seed. The generator is deliberately tiny and fully
//! specified so it can be reproduced bit-exactly in any language:
//!
//! * state is `(key, counter)`, two `u64` words;
//! * the i-th output is `mix64(key + i * GOLDEN_GAMMA)` (wrapping
//!   arithmetic), where `mix64` is the SplitMix64 finalizer;
//! * named streams are derived as `key = mix64(seed ^ fnv1a64(label))`;
//! * indexed substreams split off as
//!   `key' = mix64(key ^ mix64((index + 1) * GOLDEN_GAMMA))`.
//!
//! Because outputs depend only on `(key, counter)`, the generator is
//! counter-based: saving and restoring the two words resumes the exact
//! output sequence.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

/// SplitMix64 output mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a byte string, used to turn stream labels into keys.
#[inline]
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Counter-based generator with splittable streams. See the module docs
/// for the exact algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    /// Stream derived from a master seed and a textual label
    /// (e.g. `"train/pre"`).
    pub fn from_seed_label(seed: u64, label: &str) -> Self {
        CounterRng {
            key: mix64(seed ^ fnv1a64(label.as_bytes())),
            counter: 0,
        }
    }

    /// Restore a generator from its two state words.
    pub fn from_state(key: u64, counter: u64) -> Self {
        CounterRng { key, counter }
    }

    /// The two state words `(key, counter)`.
    pub fn state(&self) -> (u64, u64) {
        (self.key, self.counter)
    }

    /// Independent substream for `index`. Does not advance `self`.
    pub fn split(&self, index: u64) -> Self {
        CounterRng {
            key: mix64(self.key ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` via the 128-bit multiply-shift map.
    /// The bias of this map is below `n / 2^64`, negligible for every `n`
    /// used here.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Uniform in `[-half_width, half_width)`.
    pub fn next_symmetric(&mut self, half_width: f64) -> f64 {
        half_width * (2.0 * self.next_f64() - 1.0)
    }

    /// Standard normal via Box-Muller (two uniform draws per value).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
