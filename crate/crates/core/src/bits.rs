//! Exact-length bit sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

/// An ordered sequence of bits, one `u8` (0 or 1) per bit, first bit first.
///
/// The length is exact: padding never appears implicitly.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitStream {
    bits: Vec<u8>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stream from 0/1 values. Any non-zero byte is read as a 1.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        Self {
            bits: bits.into_iter().map(|b| (b != 0) as u8).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: u8) {
        self.bits.push((bit != 0) as u8);
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.bits.get(index).copied()
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] ^= 1;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    pub fn extend_from_slice(&mut self, bits: &[u8]) {
        self.bits.extend(bits.iter().map(|&b| (b != 0) as u8));
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream[{}](", self.bits.len())?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u8>> for BitStream {
    fn from(bits: Vec<u8>) -> Self {
        Self::from_bits(bits)
    }
}

impl FromIterator<u8> for BitStream {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}

/// Number of positions where `a` and `b` differ. Panics on length mismatch.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance over unequal lengths");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_to_zero_one() {
        let s = BitStream::from_bits([0, 2, 1, 0]);
        assert_eq!(s.as_slice(), &[0, 1, 1, 0]);
        assert_eq!(format!("{s:?}"), "BitStream[4](0110)");
    }

    #[test]
    fn hamming_counts_differences() {
        assert_eq!(hamming(&[0, 1, 1], &[1, 1, 0]), 2);
        assert_eq!(hamming(&[], &[]), 0);
    }
}
