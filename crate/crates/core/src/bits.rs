//! Bit strings used as message payloads.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Number of bits needed to write any value in `0..=max`, at least one.
pub fn width_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}

/// Append-only bit string, most significant bit first.
///
/// Bits past `len` in the last word are always zero, so derived equality
/// and ordering are bitwise.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            let last = self.words.len() - 1;
            self.words[last] |= 1 << (63 - self.len % 64);
        }
        self.len += 1;
    }

    /// Appends `value` as a `width`-bit unsigned field.
    pub fn push_uint(&mut self, value: u64, width: u32) -> Result<()> {
        if width < 64 && value >> width != 0 {
            return Err(Error::ValueOverflow { value, width });
        }
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
        Ok(())
    }

    pub fn push_bits(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push_bit(other.get(i));
        }
    }

    /// Copies out bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Bits {
        assert!(start <= end && end <= self.len);
        let mut out = Bits::new();
        for i in start..end {
            out.push_bit(self.get(i));
        }
        out
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }

    /// Hex digits of the bits, zero-padded on the right to a nibble boundary.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut out = String::new();
        let mut i = 0;
        while i < self.len {
            let mut nibble = 0u8;
            for j in 0..4 {
                nibble <<= 1;
                if i + j < self.len && self.get(i + j) {
                    nibble |= 1;
                }
            }
            out.push(DIGITS[nibble as usize] as char);
            i += 4;
        }
        out
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Bits {
        let mut out = Bits::new();
        for b in bits {
            out.push_bit(b);
        }
        out
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({}:", self.len)?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

/// Sequential reader over a [`Bits`].
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl BitReader<'_> {
    pub fn remaining(&self) -> usize {
        self.bits.len - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len {
            return Err(Error::Decode("truncated payload"));
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64> {
        if self.remaining() < width as usize {
            return Err(Error::Decode("truncated payload"));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_bits(&mut self, count: usize) -> Result<Bits> {
        if self.remaining() < count {
            return Err(Error::Decode("truncated payload"));
        }
        let out = self.bits.slice(self.pos, self.pos + count);
        self.pos += count;
        Ok(out)
    }
}
