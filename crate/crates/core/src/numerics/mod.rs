//! Exact dyadic arithmetic on the circle `[0, 1)`.
//!
//! A [`DyadicPoint`] is `mantissa / 2^depth` with `mantissa < 2^depth`. Digits
//! are 1-indexed from the binary point, so digit `k` is bit `depth - k` of the
//! mantissa. Every dyadic rational is stored with its eventually-zero
//! expansion; digits beyond `depth` read as 0.

mod digits;
mod dyadic;

pub use digits::DigitView;
pub(crate) use digits::set_digit_range;
pub use dyadic::Dyadic;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A point `mantissa / 2^depth` of `[0, 1)`.
///
/// Equality, ordering and hashing compare values: `0.1` and `0.10` are equal
/// points even though they carry different depths.
#[derive(Clone, Debug)]
pub struct DyadicPoint {
    mantissa: BigUint,
    depth: u64,
}

/// `‖x‖`, the distance from a point to the nearest integer. Always in `[0, 1/2]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactDistance(DyadicPoint);

impl DyadicPoint {
    pub fn new(mantissa: BigUint, depth: u64) -> Result<Self> {
        if mantissa.bits() > depth {
            return Err(Error::MantissaOutOfRange { depth });
        }
        Ok(Self { mantissa, depth })
    }

    pub fn from_u64(mantissa: u64, depth: u64) -> Result<Self> {
        Self::new(BigUint::from(mantissa), depth)
    }

    pub(crate) fn from_parts_unchecked(mantissa: BigUint, depth: u64) -> Self {
        debug_assert!(mantissa.bits() <= depth);
        Self { mantissa, depth }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: BigUint::zero(),
            depth: 0,
        }
    }

    /// Builds a point from its digits `ξ_1 … ξ_n` (each 0 or 1).
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let mut mantissa = BigUint::zero();
        for (i, &d) in digits.iter().enumerate() {
            match d {
                0 => {}
                1 => mantissa.set_bit((digits.len() - 1 - i) as u64, true),
                _ => {
                    return Err(Error::Parse {
                        input: format!("{digits:?}"),
                        reason: format!("digit {d} is not binary"),
                    })
                }
            }
        }
        Ok(Self {
            mantissa,
            depth: digits.len() as u64,
        })
    }

    /// Parses a hexadecimal mantissa at the given depth.
    pub fn from_hex(hex: &str, depth: u64) -> Result<Self> {
        let mantissa = BigUint::parse_bytes(hex.as_bytes(), 16).ok_or_else(|| Error::Parse {
            input: hex.to_string(),
            reason: "not a hexadecimal integer".into(),
        })?;
        Self::new(mantissa, depth)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Digit `k` (1-indexed). Digits past the depth are 0.
    pub fn digit(&self, k: u64) -> u8 {
        assert!(k >= 1, "digits are 1-indexed");
        if k > self.depth {
            0
        } else {
            u8::from(self.mantissa.bit(self.depth - k))
        }
    }

    pub fn digits(&self) -> Vec<u8> {
        (1..=self.depth).map(|k| self.digit(k)).collect()
    }

    /// Hexadecimal mantissa paired with the depth.
    pub fn to_hex(&self) -> (String, u64) {
        (self.mantissa.to_str_radix(16), self.depth)
    }

    /// `2^n · x mod 1`: the digit stream shifted left by `n`.
    pub fn shift_mod1(&self, n: u64) -> Self {
        if n >= self.depth {
            return Self::zero();
        }
        let depth = self.depth - n;
        Self {
            mantissa: low_bits(&self.mantissa, depth),
            depth,
        }
    }

    /// `h · x mod 1` for a positive integer `h`. The depth is unchanged.
    pub fn dilate_mod1(&self, h: &BigUint) -> Result<Self> {
        if h.is_zero() {
            return Err(Error::ZeroDilation);
        }
        Ok(Self {
            mantissa: low_bits(&(&self.mantissa * h), self.depth),
            depth: self.depth,
        })
    }

    /// `x + y mod 1`, at the larger of the two depths.
    pub fn add_mod1(&self, other: &Self) -> Self {
        let depth = self.depth.max(other.depth);
        let sum = (&self.mantissa << (depth - self.depth)) + (&other.mantissa << (depth - other.depth));
        Self {
            mantissa: low_bits(&sum, depth),
            depth,
        }
    }

    /// `1 - x mod 1`.
    pub fn neg_mod1(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self {
            mantissa: (BigUint::one() << self.depth) - &self.mantissa,
            depth: self.depth,
        }
    }

    pub fn dist_nearest_int(&self) -> ExactDistance {
        // x <= 1/2  <=>  2m <= 2^depth
        if self.depth == 0 || self.mantissa.bits() < self.depth || self.mantissa == BigUint::one() << (self.depth - 1) {
            ExactDistance(self.clone())
        } else {
            ExactDistance(self.neg_mod1())
        }
    }

    /// Re-expresses the point with exactly `depth` digits, dropping digits past it.
    pub fn truncate(&self, depth: u64) -> Self {
        if depth >= self.depth {
            Self {
                mantissa: &self.mantissa << (depth - self.depth),
                depth,
            }
        } else {
            Self {
                mantissa: &self.mantissa >> (self.depth - depth),
                depth,
            }
        }
    }

    /// Drops trailing zero digits.
    pub fn normalized(&self) -> Self {
        match self.mantissa.trailing_zeros() {
            None => Self::zero(),
            Some(tz) => Self {
                mantissa: &self.mantissa >> tz,
                depth: self.depth - tz,
            },
        }
    }

    pub fn to_dyadic(&self) -> Dyadic {
        Dyadic::new(self.mantissa.clone(), self.depth)
    }

    /// Index `l` of the depth-`n` atom `[l/2^n, (l+1)/2^n)` containing the point.
    pub fn atom_index(&self, n: u64) -> BigUint {
        if n >= self.depth {
            &self.mantissa << (n - self.depth)
        } else {
            &self.mantissa >> (self.depth - n)
        }
    }

    /// Nearest `f64`; for reports only.
    pub fn to_f64(&self) -> f64 {
        self.to_dyadic().to_f64()
    }

    pub fn to_digit_string(&self) -> String {
        if self.depth == 0 {
            return "0".to_string();
        }
        let raw = self.mantissa.to_str_radix(2);
        let raw = if self.mantissa.is_zero() { String::new() } else { raw };
        let mut out = String::with_capacity(self.depth as usize + 2);
        out.push_str("0.");
        for _ in 0..(self.depth as usize - raw.len()) {
            out.push('0');
        }
        out.push_str(&raw);
        out
    }
}

pub(crate) fn low_bits(m: &BigUint, k: u64) -> BigUint {
    if m.bits() <= k {
        return m.clone();
    }
    if k == 0 {
        return BigUint::zero();
    }
    m & ((BigUint::one() << k) - 1u32)
}

impl PartialEq for DyadicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DyadicPoint {}

impl PartialOrd for DyadicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.depth.cmp(&other.depth) {
            Ordering::Equal => self.mantissa.cmp(&other.mantissa),
            Ordering::Less => (&self.mantissa << (other.depth - self.depth)).cmp(&other.mantissa),
            Ordering::Greater => self.mantissa.cmp(&(&other.mantissa << (self.depth - other.depth))),
        }
    }
}

impl Hash for DyadicPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.normalized();
        n.mantissa.hash(state);
        n.depth.hash(state);
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_digit_string())
    }
}

impl FromStr for DyadicPoint {
    type Err = Error;

    /// Accepts `0.b1b2…bn`, `0`, or `0x<hex>:<depth>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if let Some(rest) = s.strip_prefix("0x") {
            let (hex, depth) = rest.split_once(':').ok_or_else(|| bad("expected 0x<hex>:<depth>"))?;
            let depth: u64 = depth.parse().map_err(|_| bad("depth is not an integer"))?;
            return Self::from_hex(hex, depth);
        }
        if s == "0" {
            return Ok(Self::zero());
        }
        let body = s.strip_prefix("0.").ok_or_else(|| {
            if s.starts_with("1.") || s.contains('/') {
                bad("only dyadic points of [0, 1) written in binary are accepted")
            } else {
                bad("expected a binary digit string 0.b1b2…")
            }
        })?;
        let digits: Vec<u8> = body
            .bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(bad("digits must be 0 or 1")),
            })
            .collect::<Result<_>>()?;
        Self::from_digits(&digits)
    }
}

impl ExactDistance {
    pub fn value(&self) -> &DyadicPoint {
        &self.0
    }

    pub fn to_dyadic(&self) -> Dyadic {
        self.0.to_dyadic()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Smallest integer `e` with `‖x‖ <= 2^e`; `None` when the distance is 0.
    pub fn log2_ceil(&self) -> Option<i64> {
        let m = &self.0.mantissa;
        if m.is_zero() {
            return None;
        }
        let bits = m.bits() as i64;
        let exact_power = m.trailing_zeros() == Some(bits as u64 - 1);
        let ceil = if exact_power { bits - 1 } else { bits };
        Some(ceil - self.0.depth as i64)
    }

    /// `‖x‖ <= 2^{-k}`.
    pub fn le_pow2_neg(&self, k: u64) -> bool {
        match self.log2_ceil() {
            None => true,
            Some(e) => e <= -(k as i64),
        }
    }
}
