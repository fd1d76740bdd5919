use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DistError;

const WORD: usize = 64;

/// A fixed-length binary string, stored packed.
///
/// Bits are addressed 0-based through [`BitString::bit`]. Textual form is a
/// `0`/`1` string whose first character is the first coordinate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.mask_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        s
    }

    /// The indicator string of a set of 1-based coordinates.
    pub fn indicator<I: IntoIterator<Item = usize>>(len: usize, coords: I) -> Result<Self, DistError> {
        let mut s = Self::zeros(len);
        for c in coords {
            if c == 0 || c > len {
                return Err(DistError::CoordinateOutOfRange { coord: c, len });
            }
            s.words[(c - 1) / WORD] |= 1 << ((c - 1) % WORD);
        }
        Ok(s)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = rng.gen();
        }
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based position `i`.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        assert!(i < self.len);
        let mut s = self.clone();
        if value {
            s.words[i / WORD] |= 1 << (i % WORD);
        } else {
            s.words[i / WORD] &= !(1 << (i % WORD));
        }
        s
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Number of positions at which the two strings differ.
    pub fn hamming_count(&self, other: &BitString) -> Result<usize, DistError> {
        if self.len != other.len {
            return Err(DistError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, DistError> {
        if self.len != other.len {
            return Err(DistError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(BitString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// The `times`-fold concatenation of this string with itself.
    pub fn repeat(&self, times: usize) -> BitString {
        let mut bits = Vec::with_capacity(self.len * times);
        for _ in 0..times {
            bits.extend(self.iter());
        }
        BitString::from_bits(&bits)
    }

    /// Restriction to the given 0-based positions, in the given order.
    pub fn restrict(&self, positions: &[usize]) -> Vec<bool> {
        positions.iter().map(|&p| self.bit(p)).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

impl FromStr for BitString {
    type Err = DistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(DistError::BadBitChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitString::from_bits(&bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip_across_word_boundary() {
        let text: String = (0..130).map(|i| if i % 3 == 0 { '1' } else { '0' }).collect();
        let s = bs(&text);
        assert_eq!(s.len(), 130);
        assert_eq!(s.to_string(), text);
        assert_eq!(s.count_ones(), 44);
    }

    #[test]
    fn indicator_is_one_based() {
        let s = BitString::indicator(3, [2]).unwrap();
        assert_eq!(s.to_string(), "010");
        assert!(BitString::indicator(3, [0]).is_err());
        assert!(BitString::indicator(3, [4]).is_err());
    }

    #[test]
    fn ones_masks_tail() {
        let s = BitString::ones(70);
        assert_eq!(s.count_ones(), 70);
        assert_eq!(s.hamming_count(&BitString::zeros(70)).unwrap(), 70);
    }

    #[test]
    fn repeat_concatenates() {
        assert_eq!(bs("011").repeat(3).to_string(), "011011011");
    }

    #[test]
    fn rejects_bad_chars() {
        assert!("01x".parse::<BitString>().is_err());
    }
}
