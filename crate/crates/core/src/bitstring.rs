//! Fixed-length binary words, most significant bit first.
//!
//! A [`BitString`] of length `n` is a point on the ring of `2^n` residues.
//! [`BitString::distance`] is the cyclic distance on that ring and
//! [`BitString::add`] moves along it by a signed [`Offset`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest supported string.
pub const MAX_LEN: u32 = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: u64,
    len: u32,
}

/// Signed shift applied by [`BitString::add`]. Valid for an `n`-bit operand
/// when `|value| < 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Offset(pub i128);

impl Offset {
    pub const ZERO: Offset = Offset(0);

    pub fn value(self) -> i128 {
        self.0
    }

    pub fn magnitude(self) -> u128 {
        self.0.unsigned_abs()
    }
}

impl From<i64> for Offset {
    fn from(v: i64) -> Self {
        Offset(v as i128)
    }
}

impl From<i32> for Offset {
    fn from(v: i32) -> Self {
        Offset(v as i128)
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 > 0 {
            write!(f, "+{}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[inline]
fn modulus(len: u32) -> u128 {
    1u128 << len
}

#[inline]
fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_len(len: u32) -> Result<()> {
    if len == 0 {
        Err(Error::Empty)
    } else if len > MAX_LEN {
        Err(Error::TooLong { len, max: MAX_LEN })
    } else {
        Ok(())
    }
}

impl BitString {
    /// The `len`-bit string whose decimal value is `value`, zero-padded on the left.
    pub fn from_decimal(value: u64, len: u32) -> Result<Self> {
        check_len(len)?;
        if value & !mask(len) != 0 {
            return Err(Error::ValueOutOfRange {
                value: value as u128,
                len,
            });
        }
        Ok(BitString { value, len })
    }

    /// Builds from an iterator of bits, first item most significant.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let mut value = 0u64;
        let mut len = 0u32;
        for b in bits {
            len += 1;
            if len > MAX_LEN {
                return Err(Error::TooLong { len, max: MAX_LEN });
            }
            value = (value << 1) | b as u64;
        }
        check_len(len)?;
        Ok(BitString { value, len })
    }

    /// All-zero string of the given length.
    pub fn zeros(len: u32) -> Result<Self> {
        Self::from_decimal(0, len)
    }

    pub fn decimal(&self) -> u64 {
        self.value
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u32 {
        self.len
    }

    /// Symbol at 1-based position `i` (position 1 is the most significant).
    pub fn bit(&self, i: u32) -> Option<bool> {
        if i == 0 || i > self.len {
            return None;
        }
        Some((self.value >> (self.len - i)) & 1 == 1)
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |i| (self.value >> (self.len - i)) & 1 == 1)
    }

    /// First `k` symbols.
    pub fn prefix(&self, k: u32) -> Result<Self> {
        self.check_take(k)?;
        Ok(BitString {
            value: self.value >> (self.len - k),
            len: k,
        })
    }

    /// Last `k` symbols.
    pub fn suffix(&self, k: u32) -> Result<Self> {
        self.check_take(k)?;
        Ok(BitString {
            value: self.value & mask(k),
            len: k,
        })
    }

    /// Symbols `start..start+len` (1-based start).
    pub fn slice(&self, start: u32, len: u32) -> Result<Self> {
        check_len(len)?;
        if start == 0 || start + len - 1 > self.len {
            return Err(Error::LengthExceeded {
                requested: start.saturating_sub(1) + len,
                len: self.len,
            });
        }
        let shift = self.len - (start + len - 1);
        Ok(BitString {
            value: (self.value >> shift) & mask(len),
            len,
        })
    }

    fn check_take(&self, k: u32) -> Result<()> {
        if k == 0 {
            return Err(Error::Empty);
        }
        if k > self.len {
            return Err(Error::LengthExceeded {
                requested: k,
                len: self.len,
            });
        }
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn catenate(&self, other: &BitString) -> Result<Self> {
        let len = self.len + other.len;
        check_len(len)?;
        let high = if other.len >= 64 {
            0
        } else {
            self.value << other.len
        };
        Ok(BitString {
            value: high | other.value,
            len,
        })
    }

    /// Cyclic distance `min(|d[x]-d[y]|, 2^n - |d[x]-d[y]|)`.
    pub fn distance(&self, other: &BitString) -> Result<u64> {
        self.same_len(other)?;
        Ok(cyclic_distance(self.value, other.value, self.len))
    }

    /// `b[(d[x] + c) mod 2^n]` with the non-negative residue.
    pub fn add(&self, c: Offset) -> Result<Self> {
        let m = modulus(self.len);
        if c.magnitude() >= m {
            return Err(Error::OffsetOutOfRange {
                offset: c.0,
                len: self.len,
            });
        }
        Ok(self.add_unchecked(c.0))
    }

    /// Modular add for offsets already known to be in range.
    pub(crate) fn add_unchecked(&self, c: i128) -> Self {
        let m = modulus(self.len) as i128;
        let v = (self.value as i128 + c).rem_euclid(m);
        BitString {
            value: v as u64,
            len: self.len,
        }
    }

    /// Signed offset of least magnitude taking `self` to `other`. The tie at
    /// exactly `2^(n-1)` resolves to the positive offset.
    pub fn min_offset(&self, other: &BitString) -> Result<Offset> {
        self.same_len(other)?;
        let m = modulus(self.len);
        let up = (other.value as u128 + m - self.value as u128) % m;
        if up <= m / 2 {
            Ok(Offset(up as i128))
        } else {
            Ok(Offset(-((m - up) as i128)))
        }
    }

    fn same_len(&self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }
}

/// Cyclic distance between two `len`-bit values.
#[inline]
pub(crate) fn cyclic_distance(a: u64, b: u64, len: u32) -> u64 {
    let diff = a.abs_diff(b) as u128;
    let other = modulus(len) - diff;
    diff.min(other) as u64
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
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
        if s.is_empty() || !s.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(Error::Parse(s.to_string()));
        }
        Self::from_bits(s.bytes().map(|c| c == b'1'))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
