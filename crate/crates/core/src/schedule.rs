//! Block schedules `0 = a_1 <= b_1 < a_2 < b_2 < …` and their ratio profiles.
//!
//! Block `i` is free on digits `a_i+1 ..= b_i`; the gap `b_i+1 ..= a_{i+1}`
//! is constrained. Entries are arbitrary-precision because synthesized
//! schedules grow factorially.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSchedule {
    a: Vec<BigUint>,
    b: Vec<BigUint>,
}

/// A schedule built by [`synthesize`], remembering its target and the next
/// left end `a_{K+1}` the recipe would produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesizedSchedule {
    pub base: BlockSchedule,
    pub target_d: BigRational,
    next_a: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// `Σ_{i<=k}(b_i - a_i) / a_{k+1}`
    FreeOverA,
    /// `Σ_{i<=k}(b_i - a_i) / b_k`
    FreeOverB,
    /// `Σ_{i<=k}(b_i - a_i + 1) / a_{k+1}`
    TiedOverA,
    /// `Σ_{i<=k}(b_i - a_i + 1) / b_k`
    TiedOverB,
    /// `|S ∩ [1, N]| / N`
    NaturalDensity,
}

impl ProfileKind {
    pub fn label(self) -> &'static str {
        match self {
            ProfileKind::FreeOverA => "d1",
            ProfileKind::FreeOverB => "d2",
            ProfileKind::TiedOverA => "d1_tied",
            ProfileKind::TiedOverB => "d2_tied",
            ProfileKind::NaturalDensity => "density",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileEntry {
    pub k: usize,
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ProfileEntry {
    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::from(self.denominator.clone()))
    }
}

/// Exact quotients indexed by block number `k` (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioProfile {
    pub kind: ProfileKind,
    pub entries: Vec<ProfileEntry>,
}

impl RatioProfile {
    pub fn value(&self, k: usize) -> Option<BigRational> {
        self.entries.iter().find(|e| e.k == k).map(ProfileEntry::value)
    }

    pub fn values(&self) -> Vec<BigRational> {
        self.entries.iter().map(ProfileEntry::value).collect()
    }

    fn in_window(&self, k_lo: usize, k_hi: usize) -> impl Iterator<Item = BigRational> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.k >= k_lo && e.k <= k_hi)
            .map(ProfileEntry::value)
    }

    /// Minimum over `k_lo ..= k_hi`, the finite stand-in for `liminf`.
    pub fn window_min(&self, k_lo: usize, k_hi: usize) -> Option<BigRational> {
        self.in_window(k_lo, k_hi).min()
    }

    /// Maximum over `k_lo ..= k_hi`, the finite stand-in for `limsup`.
    pub fn window_max(&self, k_lo: usize, k_hi: usize) -> Option<BigRational> {
        self.in_window(k_lo, k_hi).max()
    }

    /// CSV with columns `k,numerator,denominator,decimal`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,numerator,denominator,decimal\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{:.6}\n",
                e.k,
                e.numerator,
                e.denominator,
                ratio_to_f64(&e.value())
            ));
        }
        out
    }
}

/// Indices `(k_lo, k_hi)` of the last third of `1 ..= count`.
pub fn default_window(count: usize) -> (usize, usize) {
    if count == 0 {
        return (1, 0);
    }
    (count - count.div_ceil(3) + 1, count)
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(60);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or an integer literal.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = |reason: &str| Error::Parse {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad("numerator is not an integer"))?;
    let q: BigInt = q.parse().map_err(|_| bad("denominator is not an integer"))?;
    if q.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(p, q))
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

impl BlockSchedule {
    /// Checks `0 = a_1 <= b_1 < a_2 < b_2 < … < a_K < b_K`.
    pub fn validate(a: Vec<BigUint>, b: Vec<BigUint>) -> Result<Self> {
        if let Some(a1) = a.first() {
            if !a1.is_zero() {
                return Err(Error::FirstBlockNotAtZero { found: a1.to_string() });
            }
        }
        Self::validate_relaxed(a, b)
    }

    /// As [`validate`](Self::validate) but only requires `a_1 >= 0`. Digits
    /// `1 ..= a_1` then form a leading gap.
    pub fn validate_relaxed(a: Vec<BigUint>, b: Vec<BigUint>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::ScheduleShape { a: a.len(), b: b.len() });
        }
        if a[0] > b[0] {
            return Err(Error::Interleaving {
                violation: format!("a[1] = {} <= b[1] = {} fails", a[0], b[0]),
            });
        }
        for i in 1..a.len() {
            if b[i - 1] >= a[i] {
                return Err(Error::Interleaving {
                    violation: format!("b[{}] = {} < a[{}] = {} fails", i, b[i - 1], i + 1, a[i]),
                });
            }
            if a[i] >= b[i] {
                return Err(Error::Interleaving {
                    violation: format!("a[{}] = {} < b[{}] = {} fails", i + 1, a[i], i + 1, b[i]),
                });
            }
        }
        Ok(Self { a, b })
    }

    pub fn from_u64(a: &[u64], b: &[u64]) -> Result<Self> {
        Self::validate(a.iter().copied().map(big).collect(), b.iter().copied().map(big).collect())
    }

    /// Number of blocks `K`.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `a_i`, 1-indexed.
    pub fn a(&self, i: usize) -> &BigUint {
        &self.a[i - 1]
    }

    /// `b_i`, 1-indexed.
    pub fn b(&self, i: usize) -> &BigUint {
        &self.b[i - 1]
    }

    pub fn a_values(&self) -> &[BigUint] {
        &self.a
    }

    pub fn b_values(&self) -> &[BigUint] {
        &self.b
    }

    /// The schedule as machine-sized digit positions.
    pub fn positions(&self) -> Result<Vec<(u64, u64)>> {
        let conv = |v: &BigUint| v.to_u64().ok_or_else(|| Error::ScheduleTooDeep { value: v.to_string() });
        self.a.iter().zip(&self.b).map(|(a, b)| Ok((conv(a)?, conv(b)?))).collect()
    }

    /// `Σ_{i<=k}(b_i - a_i + extra)` for `k = 1 ..= K`.
    fn partial_sums(&self, extra: u64) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| {
                acc += b - a + extra;
                acc.clone()
            })
            .collect()
    }

    fn profiles(&self, extra: u64, over_a: ProfileKind, over_b: ProfileKind) -> Result<(RatioProfile, RatioProfile)> {
        if self.len() < 2 {
            return Err(Error::TooFewBlocks {
                needed: 2,
                found: self.len(),
            });
        }
        let sums = self.partial_sums(extra);
        let first = RatioProfile {
            kind: over_a,
            entries: (1..self.len())
                .map(|k| ProfileEntry {
                    k,
                    numerator: sums[k - 1].clone(),
                    denominator: self.a[k].clone(),
                })
                .collect(),
        };
        let second = RatioProfile {
            kind: over_b,
            entries: (1..=self.len())
                .filter(|&k| !self.b[k - 1].is_zero())
                .map(|k| ProfileEntry {
                    k,
                    numerator: sums[k - 1].clone(),
                    denominator: self.b[k - 1].clone(),
                })
                .collect(),
        };
        Ok((first, second))
    }

    /// The `d₁` and `d₂` profiles of the free-block set.
    pub fn free_ratio_profile(&self) -> Result<(RatioProfile, RatioProfile)> {
        self.profiles(0, ProfileKind::FreeOverA, ProfileKind::FreeOverB)
    }

    /// The `d₁′` and `d₂′` profiles of the tied-block set.
    pub fn tied_ratio_profile(&self) -> Result<(RatioProfile, RatioProfile)> {
        self.profiles(1, ProfileKind::TiedOverA, ProfileKind::TiedOverB)
    }

    /// `|S ∩ [1, N]| / N` for `S = ∪ [a_i + 1, b_i]`.
    pub fn natural_density(&self, n: &BigUint) -> Result<BigRational> {
        if n.is_zero() {
            return Err(Error::Empty { what: "density window [1, N] with N = 0" });
        }
        let mut count = BigUint::zero();
        for (a, b) in self.a.iter().zip(&self.b) {
            let hi = b.min(n);
            if hi > a {
                count += hi - a;
            }
        }
        Ok(BigRational::new(BigInt::from(count), BigInt::from(n.clone())))
    }

    /// `a′_i = a_i + i` with `b` unchanged.
    pub fn prime_shift(&self) -> Result<Self> {
        let a: Vec<BigUint> = self.a.iter().enumerate().map(|(i, a)| a + (i as u64 + 1)).collect();
        for (i, (a_shifted, b)) in a.iter().zip(&self.b).enumerate() {
            if a_shifted >= b {
                return Err(Error::ShiftCondition { block: i + 1 });
            }
        }
        Self::validate_relaxed(a, self.b.clone())
    }

    /// If every block from `from_k` on has the same width and the left ends
    /// advance by a constant step (at least three blocks), the exact limit of
    /// the ratio profiles along that periodic continuation: `(w + extra)/p`.
    pub fn periodic_tail_limit(&self, from_k: usize, extra: u64) -> Option<BigRational> {
        let k_max = self.len();
        if from_k == 0 || from_k + 2 > k_max {
            return None;
        }
        let width = &self.b[from_k - 1] - &self.a[from_k - 1];
        let step = &self.a[from_k] - &self.a[from_k - 1];
        for k in from_k..=k_max {
            if self.b[k - 1].clone() - &self.a[k - 1] != width {
                return None;
            }
            if k < k_max && self.a[k].clone() - &self.a[k - 1] != step {
                return None;
            }
        }
        Some(BigRational::new(BigInt::from(width + extra), BigInt::from(step)))
    }

    /// `{"a":[…],"b":[…]}` with integer literals of any size.
    pub fn to_json(&self) -> String {
        let join = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("{{\"a\":[{}],\"b\":[{}]}}", join(&self.a), join(&self.b))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            input: "schedule JSON".into(),
            reason: e.to_string(),
        })?;
        let field = |name: &str| -> Result<Vec<BigUint>> {
            let arr = value.get(name).and_then(|v| v.as_array()).ok_or_else(|| Error::Parse {
                input: "schedule JSON".into(),
                reason: format!("missing array `{name}`"),
            })?;
            arr.iter()
                .map(|v| {
                    let text = match v {
                        serde_json::Value::Number(n) => n.to_string(),
                        other => other.to_string(),
                    };
                    text.parse::<BigUint>().map_err(|_| Error::NonInteger { value: text })
                })
                .collect()
        };
        Self::validate(field("a")?, field("b")?)
    }

    /// A random valid schedule with `blocks` blocks and `b_K <= max_b`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, blocks: usize, max_b: u64) -> Result<Self> {
        assert!(blocks >= 1);
        let needed = 2 * blocks as u64 - 1;
        if max_b + 1 < needed {
            return Err(Error::TooFewBlocks {
                needed: blocks,
                found: (max_b as usize + 2) / 2,
            });
        }
        let mut picks: Vec<u64> = rand::seq::index::sample(rng, max_b as usize + 1, needed as usize)
            .into_iter()
            .map(|v| v as u64)
            .collect();
        picks.sort_unstable();
        let mut a = vec![0u64];
        let mut b = vec![picks[0]];
        for pair in picks[1..].chunks(2) {
            a.push(pair[0]);
            b.push(pair[1]);
        }
        Self::from_u64(&a, &b)
    }
}

impl fmt::Display for BlockSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

impl SynthesizedSchedule {
    /// The `a_{K+1}` the recipe would produce next.
    pub fn next_a(&self) -> &BigUint {
        &self.next_a
    }

    /// `b_k / a_{k+1}` for `k = 1 ..= K`, using [`next_a`](Self::next_a) at `k = K`.
    pub fn gap_quotients(&self) -> Vec<BigRational> {
        let s = &self.base;
        (1..=s.len())
            .map(|k| {
                let next = if k < s.len() { s.a(k + 1) } else { &self.next_a };
                BigRational::new(BigInt::from(s.b(k).clone()), BigInt::from(next.clone()))
            })
            .collect()
    }
}

/// Builds a `K`-block schedule with `a_i + i < b_i`, `b_i/a_i` increasing and
/// `b_k / a_{k+1} → d`.
///
/// Recipe: `a_1 = 0`, `b_1 = 2`; `a_{i+1} = ceil(b_i / d)` for `0 < d < 1`,
/// `b_i (i+1)` for `d = 0`, `b_i + 1` for `d = 1`; then
/// `b_{i+1} = (i+2) a_{i+1} + i + 2`.
pub fn synthesize(d: &BigRational, blocks: usize) -> Result<SynthesizedSchedule> {
    if d < &BigRational::zero() || d > &BigRational::one() {
        return Err(Error::DimensionOutOfRange { d: format_ratio(d) });
    }
    if blocks < 2 {
        return Err(Error::TooFewBlocks { needed: 2, found: blocks });
    }
    let next_left = |b: &BigUint, i: usize| -> BigUint {
        if d.is_zero() {
            b * (i as u64 + 1)
        } else if d.is_one() {
            b + 1u32
        } else {
            // ceil(b / (p/q)) = ceil(b q / p)
            let p = d.numer().magnitude();
            let q = d.denom().magnitude();
            Integer::div_ceil(&(b * q), p)
        }
    };
    let mut a = vec![BigUint::zero()];
    let mut b = vec![big(2)];
    for i in 1..blocks {
        let next_a = next_left(&b[i - 1], i);
        let next_b = &next_a * (i as u64 + 2) + (i as u64 + 2);
        a.push(next_a);
        b.push(next_b);
    }
    let next_a = next_left(&b[blocks - 1], blocks);
    Ok(SynthesizedSchedule {
        base: BlockSchedule::validate(a, b)?,
        target_d: d.clone(),
        next_a,
    })
}
