use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A non-negative dyadic rational `num / 2^exp`, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

impl Dyadic {
    pub fn new(num: BigUint, exp: u64) -> Self {
        match num.trailing_zeros() {
            None => Self::zero(),
            Some(tz) => {
                let shift = tz.min(exp);
                Self {
                    num: num >> shift,
                    exp: exp - shift,
                }
            }
        }
    }

    pub fn zero() -> Self {
        Self {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_integer(BigUint::one())
    }

    pub fn from_integer(n: BigUint) -> Self {
        Self { num: n, exp: 0 }
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u64) -> Self {
        Self {
            num: BigUint::one(),
            exp: k,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    /// The `e` in the reduced denominator `2^e`.
    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `self - other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        if a < b {
            None
        } else {
            Some(Self::new(a - b, exp))
        }
    }

    /// `self · 2^{-k}`.
    pub fn div_pow2(&self, k: u64) -> Self {
        Self::new(self.num.clone(), self.exp + k)
    }

    pub fn mul_int(&self, n: &BigUint) -> Self {
        Self::new(&self.num * n, self.exp)
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(BigUint::one() << self.exp))
    }

    /// Nearest `f64`; reports only.
    pub fn to_f64(&self) -> f64 {
        let bits = self.num.bits();
        if bits == 0 {
            return 0.0;
        }
        // keep the top 64 bits so huge mantissas do not overflow
        let drop = bits.saturating_sub(64);
        let top = (&self.num >> drop).to_f64().unwrap_or(f64::INFINITY);
        top * 2f64.powi((drop as i64 - self.exp as i64).clamp(-2000, 2000) as i32)
    }

    /// Smallest integer `e` with `self <= 2^e`; `None` for zero.
    pub fn log2_ceil(&self) -> Option<i64> {
        if self.num.is_zero() {
            return None;
        }
        let bits = self.num.bits() as i64;
        let power = self.num.trailing_zeros() == Some(bits as u64 - 1);
        Some(if power { bits - 1 } else { bits } - self.exp as i64)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let exp = self.exp.max(other.exp);
        (&self.num << (exp - self.exp)).cmp(&(&other.num << (exp - other.exp)))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new((&self.num << (exp - self.exp)) + (&rhs.num << (exp - rhs.exp)), exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for Dyadic {
    /// `p/q` with `q = 2^e`, or just `p` for integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::one() << self.exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_compares() {
        let a = Dyadic::new(BigUint::from(6u32), 4);
        assert_eq!(a, Dyadic::new(BigUint::from(3u32), 3));
        assert_eq!(a.to_string(), "3/8");
        assert!(Dyadic::pow2_neg(2) < a);
        assert_eq!(&a + &Dyadic::new(BigUint::from(5u32), 3), Dyadic::one());
        assert_eq!(Dyadic::one().checked_sub(&a), Some(Dyadic::new(BigUint::from(5u32), 3)));
        assert_eq!(a.checked_sub(&Dyadic::one()), None);
        assert_eq!(Dyadic::new(BigUint::from(8u32), 1).to_string(), "4");
        assert_eq!(a.log2_ceil(), Some(-1));
        assert_eq!(Dyadic::pow2_neg(3).log2_ceil(), Some(-3));
        assert!((a.to_f64() - 0.375).abs() < 1e-15);
    }
}
