//! Small shared utilities: growable bitsets, FNV hashing, float shims.
//!
//! The crate is `no_std`, so float transcendentals go through [`libm`] and
//! all set/map containers are B-trees for deterministic iteration order.

use alloc::vec;
use alloc::vec::Vec;

/// A growable bitset used for ground-fact sets.
///
/// Fact universes in this artifact are tiny (tens of atoms), so states clone
/// cheaply and compare with plain word-wise equality, which also gives a
/// canonical ordering for use as search keys.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits {
    words: Vec<u64>,
}

impl Bits {
    /// Empty set.
    pub fn new() -> Self {
        Bits::default()
    }

    /// Empty set sized for `n` bits.
    pub fn with_capacity(n: usize) -> Self {
        Bits {
            words: vec![0; n.div_ceil(64)],
        }
    }

    /// Sets bit `i` (grows as needed).
    pub fn set(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    /// Clears bit `i`.
    pub fn clear(&mut self, i: usize) {
        let w = i / 64;
        if w < self.words.len() {
            self.words[w] &= !(1 << (i % 64));
        }
    }

    /// Tests bit `i`.
    pub fn get(&self, i: usize) -> bool {
        let w = i / 64;
        w < self.words.len() && self.words[w] & (1 << (i % 64)) != 0
    }

    /// True if every bit of `other` is also set in `self`.
    pub fn contains_all(&self, other: &Bits) -> bool {
        for (i, &ow) in other.words.iter().enumerate() {
            let sw = self.words.get(i).copied().unwrap_or(0);
            if ow & !sw != 0 {
                return false;
            }
        }
        true
    }

    /// True if the two sets share at least one bit.
    pub fn intersects(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Iterator over set bit indices, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }

    /// True if no bit is set.
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self ∪ other` in place.
    pub fn union_with(&mut self, other: &Bits) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (i, &ow) in other.words.iter().enumerate() {
            self.words[i] |= ow;
        }
    }

    /// `self \ other` in place.
    pub fn subtract(&mut self, other: &Bits) {
        for (i, &ow) in other.words.iter().enumerate() {
            if i < self.words.len() {
                self.words[i] &= !ow;
            }
        }
    }

    /// Normalizes by dropping trailing zero words so that equal sets compare
    /// equal regardless of construction history.
    pub fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

/// FNV-1a 64-bit hash; used to fingerprint entity lexicons and action tables
/// so serialized executors refuse to run against a mismatched world.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Float helpers routed through `libm` (f64 methods like `sqrt` are std-only).
pub mod fmath {
    /// Natural logarithm.
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    /// Square root.
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }

    /// Exponential.
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    /// Hyperbolic tangent.
    pub fn tanh(x: f64) -> f64 {
        libm::tanh(x)
    }

    /// Absolute value.
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }

    /// Maximum of two floats (NaN-free inputs assumed).
    pub fn max(a: f64, b: f64) -> f64 {
        if a > b {
            a
        } else {
            b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_roundtrip() {
        let mut b = Bits::with_capacity(100);
        b.set(3);
        b.set(77);
        assert!(b.get(3) && b.get(77) && !b.get(4));
        b.clear(3);
        assert!(!b.get(3));
        assert_eq!(b.iter().collect::<alloc::vec::Vec<_>>(), alloc::vec![77]);
    }

    #[test]
    fn bits_set_algebra() {
        let mut a = Bits::with_capacity(8);
        let mut b = Bits::with_capacity(8);
        a.set(1);
        a.set(2);
        b.set(2);
        assert!(a.contains_all(&b));
        assert!(!b.contains_all(&a));
        assert!(a.intersects(&b));
        a.subtract(&b);
        assert!(!a.get(2) && a.get(1));
    }

    #[test]
    fn fnv_is_stable() {
        // Reference value for "abc" from the FNV-1a specification.
        assert_eq!(fnv1a64(b"abc"), 0xe71fa2190541574b);
    }
}
