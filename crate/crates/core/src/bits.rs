use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A measurement record, qubit 0 first when printed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut out = Self::zeros(bits.len());
        for (q, b) in bits.into_iter().enumerate() {
            out.set(q, b);
        }
        out
    }

    pub(crate) fn from_words(n: usize, words: &[u64]) -> Self {
        let mut words = words[..n.div_ceil(64)].to_vec();
        if n % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        BitString { n, words }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, q: usize) -> bool {
        (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, q: usize, b: bool) {
        assert!(q < self.n);
        let mask = 1u64 << (q % 64);
        if b {
            self.words[q / 64] |= mask;
        } else {
            self.words[q / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        assert!(q < self.n);
        self.words[q / 64] ^= 1u64 << (q % 64);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn xor_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Little-endian integer value (qubit 0 is the least significant bit). Only for n <= 64.
    pub fn to_index(&self) -> usize {
        assert!(self.n <= 64);
        self.words.first().copied().unwrap_or(0) as usize
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        assert!(n <= 64);
        let mut out = Self::zeros(n);
        if n > 0 {
            out.words[0] = index as u64;
        }
        Self::from_words(n, &out.words)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            f.write_str(if self.get(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse { line: 0, msg: format!("bad bit {c:?} in {s:?}") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let b: BitString = "0110".parse().unwrap();
        assert!(!b.get(0) && b.get(1) && b.get(2) && !b.get(3));
        assert_eq!(b.to_string(), "0110");
        assert_eq!(b.to_index(), 0b0110);
        assert_eq!(BitString::from_index(4, 6), b);
        assert!("01a".parse::<BitString>().is_err());
    }

    #[test]
    fn hamming() {
        let a: BitString = "0000".parse().unwrap();
        let b: BitString = "1011".parse().unwrap();
        assert_eq!(a.hamming_distance(&b).unwrap(), 3);
        assert!(a.hamming_distance(&"00".parse().unwrap()).is_err());
    }
}
