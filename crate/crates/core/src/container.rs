//! Bit-exact self-delimiting container format.
//!
//! Layout (bit 0 is the most significant bit of the first byte; `g(m)`
//! is the Elias gamma code of `m >= 1`):
//!
//! ```text
//! bit 0: fallback flag
//! fallback = 1:  g(raw_len + 1), raw bits, zero padding to a byte
//! fallback = 0:  g(n + 1), g(k), g(q), g(alpha + 1), g(|L| + 1),
//!                per L entry: g(index), 1 data bit,
//!                g(|v| + 1), the |v| payload bits, zero padding to a byte
//! ```
//!
//! The robustified container prepends one more flag bit: `1` followed by
//! `g(|x| + 1)` and `x` verbatim, or `0` followed by the inner container
//! bits.
//!
//! Deserialization is canonical: padding must be zero, the input must be
//! consumed exactly, and light indices must be strictly increasing and at
//! least `k`. Any accepted byte string re-serializes to itself.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bits::{Bit, BitString};
use crate::codec::{Encoding, RobustEncoding};
use crate::{Error, Result};

fn malformed(detail: impl Into<String>) -> Error {
    Error::MalformedEncoding {
        detail: detail.into(),
    }
}

/// MSB-first bit accumulator.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn push_bit(&mut self, bit: Bit) {
        let offset = self.bit_len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.last_mut().expect("just pushed");
            *last |= 0x80 >> offset;
        }
        self.bit_len += 1;
    }

    pub fn push_bits(&mut self, bits: &[Bit]) {
        for &b in bits {
            self.push_bit(b);
        }
    }

    /// Elias gamma code of a positive integer: `floor(log2 m)` zeros, then
    /// the binary digits of `m` from the most significant bit.
    pub fn gamma_big(&mut self, value: &BigUint) {
        assert!(!value.is_zero(), "gamma code has no zero");
        let bits = value.bits();
        for _ in 0..bits - 1 {
            self.push_bit(false);
        }
        for i in (0..bits).rev() {
            self.push_bit(value.bit(i));
        }
    }

    pub fn gamma_u64(&mut self, value: u64) {
        self.gamma_big(&BigUint::from(value));
    }

    /// Zero-pads to a byte boundary and returns the bytes.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// MSB-first bit cursor over a byte slice.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn total_bits(&self) -> usize {
        self.bytes.len() * 8
    }

    pub fn remaining(&self) -> usize {
        self.total_bits() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<Bit> {
        if self.pos >= self.total_bits() {
            return Err(malformed("truncated: ran out of bits"));
        }
        let byte = self.bytes[self.pos / 8];
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: usize) -> Result<BitString> {
        if count > self.remaining() {
            return Err(malformed(format!(
                "truncated: wanted {count} bits, have {}",
                self.remaining()
            )));
        }
        let mut bits = Vec::with_capacity(count);
        for _ in 0..count {
            bits.push(self.read_bit()?);
        }
        Ok(BitString::from_bits(bits))
    }

    pub fn gamma_big(&mut self) -> Result<BigUint> {
        let mut zeros: u64 = 0;
        loop {
            if self.read_bit()? {
                break;
            }
            zeros += 1;
        }
        // The leading 1 already read; pull the remaining `zeros` bits.
        let mut value = BigUint::one();
        for _ in 0..zeros {
            value <<= 1u32;
            if self.read_bit()? {
                value += BigUint::one();
            }
        }
        Ok(value)
    }

    pub fn gamma_u64(&mut self) -> Result<u64> {
        let v = self.gamma_big()?;
        v.to_u64()
            .ok_or_else(|| malformed("gamma-coded value exceeds 64 bits"))
    }

    /// Verifies the remainder is sub-byte zero padding and nothing else.
    pub fn expect_zero_padding(&mut self) -> Result<()> {
        if self.remaining() >= 8 {
            return Err(malformed(format!(
                "{} trailing bits beyond the container",
                self.remaining()
            )));
        }
        while self.remaining() > 0 {
            if self.read_bit()? {
                return Err(malformed("nonzero padding bit"));
            }
        }
        Ok(())
    }
}

fn write_encoding(w: &mut BitWriter, enc: &Encoding) {
    match enc {
        Encoding::Fallback { raw } => {
            w.push_bit(true);
            w.gamma_u64(raw.len() as u64 + 1);
            w.push_bits(raw.as_bits());
        }
        Encoding::Arithmetic {
            v,
            light,
            alpha,
            n,
            k,
            q,
        } => {
            w.push_bit(false);
            w.gamma_big(&(BigUint::from(*n) + BigUint::one()));
            w.gamma_u64(*k as u64);
            w.gamma_u64(*q);
            w.gamma_big(&(alpha + BigUint::one()));
            w.gamma_u64(light.len() as u64 + 1);
            for (index, bit) in light {
                w.gamma_u64(*index as u64);
                w.push_bit(*bit);
            }
            w.gamma_u64(v.len() as u64 + 1);
            w.push_bits(v.as_bits());
        }
    }
}

fn read_encoding(r: &mut BitReader) -> Result<Encoding> {
    if r.read_bit()? {
        let raw_len = r.gamma_u64()? - 1;
        let raw = r.read_bits(usize::try_from(raw_len).map_err(|_| malformed("raw length"))?)?;
        return Ok(Encoding::Fallback { raw });
    }
    let n = (r.gamma_big()? - BigUint::one())
        .to_u64()
        .ok_or_else(|| malformed("instance index exceeds 64 bits"))?;
    let k_raw = r.gamma_u64()?;
    let k = u32::try_from(k_raw).map_err(|_| malformed("start index exceeds 32 bits"))?;
    let q = r.gamma_u64()?;
    let alpha = r.gamma_big()? - BigUint::one();
    let light_len = r.gamma_u64()? - 1;
    let mut light = Vec::new();
    let mut prev: u64 = 0;
    for _ in 0..light_len {
        let index = r.gamma_u64()?;
        if index <= prev {
            return Err(malformed("light indices not strictly increasing"));
        }
        if index < k as u64 {
            return Err(malformed("light index below start index"));
        }
        let bit = r.read_bit()?;
        light.push((
            u32::try_from(index).map_err(|_| malformed("light index exceeds 32 bits"))?,
            bit,
        ));
        prev = index;
    }
    let v_len = r.gamma_u64()? - 1;
    let v = r.read_bits(usize::try_from(v_len).map_err(|_| malformed("payload length"))?)?;
    Ok(Encoding::Arithmetic {
        v,
        light,
        alpha,
        n,
        k,
        q,
    })
}

/// Serializes an encoding to its canonical byte form.
pub fn serialize(enc: &Encoding) -> Vec<u8> {
    let mut w = BitWriter::new();
    write_encoding(&mut w, enc);
    w.finish()
}

/// Parses a canonical container; rejects anything that would not
/// re-serialize to the same bytes.
pub fn deserialize(bytes: &[u8]) -> Result<Encoding> {
    let mut r = BitReader::new(bytes);
    let enc = read_encoding(&mut r)?;
    r.expect_zero_padding()?;
    Ok(enc)
}

/// Serializes a robustified encoding: a verbatim flag bit, then either the
/// raw string or the inner container bits.
pub fn serialize_robust(enc: &RobustEncoding) -> Vec<u8> {
    let mut w = BitWriter::new();
    match enc {
        RobustEncoding::Verbatim(x) => {
            w.push_bit(true);
            w.gamma_u64(x.len() as u64 + 1);
            w.push_bits(x.as_bits());
        }
        RobustEncoding::Coded(inner) => {
            w.push_bit(false);
            write_encoding(&mut w, inner);
        }
    }
    w.finish()
}

pub fn deserialize_robust(bytes: &[u8]) -> Result<RobustEncoding> {
    let mut r = BitReader::new(bytes);
    let enc = if r.read_bit()? {
        let len = r.gamma_u64()? - 1;
        let x = r.read_bits(usize::try_from(len).map_err(|_| malformed("verbatim length"))?)?;
        RobustEncoding::Verbatim(x)
    } else {
        RobustEncoding::Coded(read_encoding(&mut r)?)
    };
    r.expect_zero_padding()?;
    Ok(enc)
}

/// Serialized size in bits (whole bytes, including padding).
pub fn serialized_bits(bytes: &[u8]) -> u64 {
    bytes.len() as u64 * 8
}
