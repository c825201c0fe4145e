use num_bigint::BigUint;

use super::{Dyadic, DyadicPoint};

/// Word-level read access to the digits of a point.
///
/// Digit `k` (1-indexed) lives in mantissa bit `depth - k`; digits past the
/// depth read as 0. Queries that scan ranges work a machine word at a time.
#[derive(Clone, Debug)]
pub struct DigitView {
    words: Vec<u64>,
    depth: u64,
}

impl DigitView {
    pub fn new(p: &DyadicPoint) -> Self {
        Self {
            words: p.mantissa().to_u64_digits(),
            depth: p.depth(),
        }
    }

    pub(crate) fn from_words(mut words: Vec<u64>, depth: u64) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        debug_assert!(words.len() as u64 * 64 <= depth + 63);
        Self { words, depth }
    }

    pub fn to_point(&self) -> DyadicPoint {
        DyadicPoint::from_parts_unchecked(words_to_biguint(&self.words), self.depth)
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    fn bit(&self, i: u64) -> bool {
        let w = (i / 64) as usize;
        w < self.words.len() && (self.words[w] >> (i % 64)) & 1 == 1
    }

    /// Bits `lo .. lo + len` of the mantissa, `len <= 64`.
    fn bits_u64(&self, lo: u64, len: u32) -> u64 {
        if len == 0 {
            return 0;
        }
        let w = (lo / 64) as usize;
        let off = lo % 64;
        let a = self.words.get(w).copied().unwrap_or(0);
        let v = if off == 0 {
            a
        } else {
            let b = self.words.get(w + 1).copied().unwrap_or(0);
            (a >> off) | (b << (64 - off))
        };
        if len == 64 {
            v
        } else {
            v & ((1u64 << len) - 1)
        }
    }

    fn next_set_bit(&self, from: u64) -> Option<u64> {
        let mut w = (from / 64) as usize;
        if w >= self.words.len() {
            return None;
        }
        let mut word = self.words[w] & (u64::MAX << (from % 64));
        loop {
            if word != 0 {
                return Some(w as u64 * 64 + word.trailing_zeros() as u64);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    /// First clear bit at or above `from`, capped at `limit`.
    fn next_clear_bit(&self, from: u64, limit: u64) -> u64 {
        let mut pos = from;
        while pos < limit {
            let w = (pos / 64) as usize;
            let word = !self.words.get(w).copied().unwrap_or(0) & (u64::MAX << (pos % 64));
            if word != 0 {
                return (w as u64 * 64 + word.trailing_zeros() as u64).min(limit);
            }
            pos = (w as u64 + 1) * 64;
        }
        limit
    }

    fn count_bits(&self, lo: u64, hi: u64) -> u64 {
        let mut total = 0u64;
        let mut pos = lo;
        while pos < hi {
            let take = (64 - pos % 64).min(hi - pos) as u32;
            total += self.bits_u64(pos, take).count_ones() as u64;
            pos += take as u64;
        }
        total
    }

    pub fn digit(&self, k: u64) -> u8 {
        assert!(k >= 1, "digits are 1-indexed");
        if k > self.depth {
            0
        } else {
            u8::from(self.bit(self.depth - k))
        }
    }

    /// Digits `n+1 ..= n+m` read as an `m`-bit integer, digit `n+1` most significant.
    pub fn window(&self, n: u64, m: u32) -> u64 {
        assert!(m <= 64);
        if m == 0 || n >= self.depth {
            return 0;
        }
        let hi = self.depth - n;
        if hi >= m as u64 {
            self.bits_u64(hi - m as u64, m)
        } else {
            self.bits_u64(0, hi as u32) << (m as u64 - hi)
        }
    }

    /// Number of 1 digits among digits `lo ..= hi`.
    pub fn count_ones(&self, lo: u64, hi: u64) -> u64 {
        let lo = lo.max(1);
        let hi = hi.min(self.depth);
        if lo > hi {
            return 0;
        }
        self.count_bits(self.depth - hi, self.depth - lo + 1)
    }

    /// Length of the run of 0 digits ending at digit `e`, scanning towards digit 1.
    pub fn zero_run_back(&self, e: u64) -> u64 {
        if e == 0 {
            return 0;
        }
        let (virtual_zeros, e) = if e > self.depth { (e - self.depth, self.depth) } else { (0, e) };
        if e == 0 {
            return virtual_zeros;
        }
        let b0 = self.depth - e;
        let run = match self.next_set_bit(b0) {
            Some(q) if q < self.depth => q - b0,
            _ => e,
        };
        virtual_zeros + run
    }

    /// Length of the run of 1 digits ending at digit `e`, scanning towards digit 1.
    pub fn one_run_back(&self, e: u64) -> u64 {
        if e == 0 || e > self.depth {
            return 0;
        }
        let b0 = self.depth - e;
        self.next_clear_bit(b0, self.depth) - b0
    }

    /// Largest `k` with digit `k` equal to 1.
    pub fn last_one(&self) -> Option<u64> {
        self.next_set_bit(0).map(|tz| self.depth - tz)
    }

    /// Whether every digit after `e` is 0.
    pub fn suffix_is_zero(&self, e: u64) -> bool {
        match self.last_one() {
            None => true,
            Some(k) => k <= e,
        }
    }

    /// `floor(2^p · frac(2^e x))`, i.e. digits `e+1 ..= e+p` as an integer,
    /// together with whether that value is exact (no nonzero digit past `e+p`).
    pub fn suffix_floor(&self, e: u64, p: u64) -> (BigUint, bool) {
        let exact = self.suffix_is_zero(e + p);
        if e >= self.depth || p == 0 {
            return (BigUint::default(), exact);
        }
        let hi = self.depth - e;
        let value = if hi >= p {
            self.extract(hi - p, p)
        } else {
            self.extract(0, hi) << (p - hi)
        };
        (value, exact)
    }

    /// `frac(2^e x)` exactly.
    pub fn suffix_exact(&self, e: u64) -> Dyadic {
        if e >= self.depth {
            return Dyadic::zero();
        }
        let len = self.depth - e;
        Dyadic::new(self.extract(0, len), len)
    }

    /// Maximal runs `(first, last)` of 1 digits inside digits `lo ..= hi`.
    pub fn ones_runs(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let lo = lo.max(1);
        let hi = hi.min(self.depth);
        let mut runs = Vec::new();
        if lo > hi {
            return runs;
        }
        let (b_lo, b_end) = (self.depth - hi, self.depth - lo + 1);
        let mut pos = b_lo;
        while pos < b_end {
            let q = match self.next_set_bit(pos) {
                Some(q) if q < b_end => q,
                _ => break,
            };
            let r = self.next_clear_bit(q, b_end);
            runs.push((self.depth - (r - 1), self.depth - q));
            pos = r;
        }
        runs.reverse();
        runs
    }

    /// Whether digits `lo ..= hi` are all 0.
    pub fn all_zero(&self, lo: u64, hi: u64) -> bool {
        self.count_ones(lo, hi) == 0
    }

    fn extract(&self, lo: u64, len: u64) -> BigUint {
        let n = len.div_ceil(64) as usize;
        let mut out = Vec::with_capacity(n);
        let mut pos = lo;
        let end = lo + len;
        while pos < end {
            let take = (end - pos).min(64) as u32;
            out.push(self.bits_u64(pos, take));
            pos += take as u64;
        }
        words_to_biguint(&out)
    }
}

pub(crate) fn words_to_biguint(words: &[u64]) -> BigUint {
    let mut halves = Vec::with_capacity(words.len() * 2);
    for w in words {
        halves.push(*w as u32);
        halves.push((*w >> 32) as u32);
    }
    BigUint::new(halves)
}

/// Sets digits `lo ..= hi` (clipped to `1 ..= depth`) of a little-endian word
/// buffer to `value`.
pub(crate) fn set_digit_range(words: &mut [u64], depth: u64, lo: u64, hi: u64, value: bool) {
    let lo = lo.max(1);
    let hi = hi.min(depth);
    if lo > hi {
        return;
    }
    let (mut pos, end) = (depth - hi, depth - lo + 1);
    while pos < end {
        let w = (pos / 64) as usize;
        let off = pos % 64;
        let take = (64 - off).min(end - pos);
        let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << off };
        if value {
            words[w] |= mask;
        } else {
            words[w] &= !mask;
        }
        pos += take;
    }
}
