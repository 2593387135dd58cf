//! Bit strings and prefix handling.

use std::fmt;
use std::str::FromStr;

use crate::Error;

/// A single bit. `false` is 0, `true` is 1.
pub type Bit = bool;

/// A finite sequence of bits, indexed from 1 in the coding logic (position
/// `i` has prefix `x[..i-1]`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<Bit>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<Bit>) -> Self {
        BitString(bits)
    }

    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: Bit) {
        self.0.push(bit);
    }

    /// Bit at 1-based position `i`.
    pub fn bit(&self, i: usize) -> Bit {
        self.0[i - 1]
    }

    /// The prefix consisting of the first `len` bits (`len = 0` gives the
    /// empty string).
    pub fn prefix(&self, len: usize) -> &[Bit] {
        &self.0[..len]
    }

    /// The suffix starting at 1-based position `from` (`from = len+1` gives
    /// the empty string).
    pub fn suffix(&self, from: usize) -> BitString {
        BitString(self.0[from - 1..].to_vec())
    }

    pub fn as_bits(&self) -> &[Bit] {
        &self.0
    }

    /// Interprets the lowest `len` bits of `value` as a string, most
    /// significant bit first.
    pub fn from_uint(value: u64, len: usize) -> Self {
        let mut bits = Vec::with_capacity(len);
        for i in (0..len).rev() {
            bits.push((value >> i) & 1 == 1);
        }
        BitString(bits)
    }
}

impl From<Vec<Bit>> for BitString {
    fn from(bits: Vec<Bit>) -> Self {
        BitString(bits)
    }
}

impl From<&[Bit]> for BitString {
    fn from(bits: &[Bit]) -> Self {
        BitString(bits.to_vec())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "(empty)");
        }
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (pos, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::InvalidArgument {
                        detail: format!("bit string has non-bit character {other:?} at {pos}"),
                    })
                }
            }
        }
        Ok(BitString(bits))
    }
}
