//! The digit-constrained sets `X(S)`, `X(a,b)` and `X'(a,b)`.
//!
//! All three are described by a block schedule: digits `a_i+1 ..= b_i` are
//! free, and each gap `b_i+1 ..= a_{i+1}` is either forced to 0
//! ([`SetKind::FreeBlocks`], [`SetKind::FreeAt`]) or forced to be constant
//! ([`SetKind::TiedBlocks`]). When `a_1 > 0` the digits `1 ..= a_1` are a
//! leading gap forced to 0 for every kind.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{set_digit_range, DigitView, DyadicPoint};
use crate::schedule::BlockSchedule;

/// Default refusal threshold for enumerations, as a power of two.
pub const DEFAULT_ENUMERATION_CAP_LOG2: u64 = 24;

/// Largest depth accepted by [`DigitSet::brute_cover_count`].
pub const BRUTE_DEPTH_LIMIT: u64 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetKind {
    /// `X(S)` with `S = ∪ [a_i+1, b_i]`.
    FreeAt,
    /// `X(a,b)`: gap digits are 0.
    FreeBlocks,
    /// `X'(a,b)`: each gap block is all 0 or all 1.
    TiedBlocks,
}

impl SetKind {
    pub fn is_tied(self) -> bool {
        self == SetKind::TiedBlocks
    }

    pub fn label(self) -> &'static str {
        match self {
            SetKind::FreeAt => "free-at",
            SetKind::FreeBlocks => "free",
            SetKind::TiedBlocks => "tied",
        }
    }
}

/// Digit constraints on depth-`n` atom indices, digit `k` at bit `n - k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixMasks {
    zero: u64,
    tied: Vec<u64>,
}

impl PrefixMasks {
    pub fn admits(&self, l: u64) -> bool {
        l & self.zero == 0 && self.tied.iter().all(|&m| l & m == 0 || l & m == m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    Yes,
    No,
    Undetermined,
}

/// Which of the finite cover sets to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoverKind {
    /// `D_k`: admissible prefixes of a free-block set at depth `b_k`.
    Free,
    /// `D′_k`: admissible prefixes of a tied set at depth `a_{k+1}`.
    TiedUpper,
    /// `D″_k`: admissible prefixes of a tied set at depth `b_k`.
    TiedLower,
}

/// The dyadic atom `[index/2^depth, (index+1)/2^depth)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverAtom {
    depth: u64,
    index: BigUint,
}

impl CoverAtom {
    pub fn new(index: BigUint, depth: u64) -> Result<Self> {
        if index.bits() > depth {
            return Err(Error::AtomOutOfRange {
                index: index.to_string(),
                depth,
            });
        }
        Ok(Self { depth, index })
    }

    /// The depth-`n` atom containing `x`.
    pub fn containing(x: &DyadicPoint, depth: u64) -> Self {
        Self {
            depth,
            index: x.atom_index(depth),
        }
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn index(&self) -> &BigUint {
        &self.index
    }

    pub fn left(&self) -> DyadicPoint {
        DyadicPoint::new(self.index.clone(), self.depth).expect("index checked at construction")
    }

    pub fn contains(&self, x: &DyadicPoint) -> bool {
        x.atom_index(self.depth) == self.index
    }

    /// The two depth `n+1` halves.
    pub fn children(&self) -> [CoverAtom; 2] {
        let l = &self.index << 1u32;
        [
            CoverAtom {
                depth: self.depth + 1,
                index: l.clone(),
            },
            CoverAtom {
                depth: self.depth + 1,
                index: l + 1u32,
            },
        ]
    }
}

/// `M_{2^{-n}}`, held as its exact base-2 logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverCount {
    pub n: u64,
    pub log2_count: u64,
}

impl CoverCount {
    pub fn count(&self) -> BigUint {
        BigUint::one() << self.log2_count
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSet {
    kind: SetKind,
    schedule: BlockSchedule,
    blocks: Vec<(u64, u64)>,
    /// `sums[k] = Σ_{i<=k}(b_i - a_i + t)`, `sums[0] = 0`.
    sums: Vec<u64>,
}

impl DigitSet {
    pub fn new(kind: SetKind, schedule: BlockSchedule) -> Result<Self> {
        let blocks = schedule.positions()?;
        let extra = u64::from(kind.is_tied());
        let mut sums = Vec::with_capacity(blocks.len() + 1);
        sums.push(0u64);
        for (a, b) in &blocks {
            sums.push(sums.last().unwrap() + (b - a) + extra);
        }
        Ok(Self {
            kind,
            schedule,
            blocks,
            sums,
        })
    }

    /// `X(S)` for a finite set `S` of free digit positions, normalized to
    /// block form. If `1 ∉ S` the first block is the empty block `a_1 = b_1 = 0`.
    pub fn free_at<I: IntoIterator<Item = u64>>(positions: I) -> Result<Self> {
        let mut pos: Vec<u64> = positions.into_iter().collect();
        pos.sort_unstable();
        pos.dedup();
        if pos.first() == Some(&0) {
            return Err(Error::Parse {
                input: "0".into(),
                reason: "digit positions start at 1".into(),
            });
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for p in pos {
            match b.last_mut() {
                Some(end) if *end + 1 == p => *end = p,
                _ => {
                    a.push(p - 1);
                    b.push(p);
                }
            }
        }
        if a.first() != Some(&0) {
            a.insert(0, 0);
            b.insert(0, 0);
        }
        Self::new(SetKind::FreeAt, BlockSchedule::from_u64(&a, &b)?)
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    /// `(a_i, b_i)` as digit positions.
    pub fn blocks(&self) -> &[(u64, u64)] {
        &self.blocks
    }

    /// `b_K`, the deepest digit the schedule prefix describes.
    pub fn max_depth(&self) -> u64 {
        self.blocks.last().map(|&(_, b)| b).unwrap_or(0)
    }

    fn check_depth(&self, n: u64) -> Result<()> {
        if n > self.max_depth() {
            return Err(Error::DepthBeyondSchedule {
                depth: n,
                limit: self.max_depth(),
            });
        }
        Ok(())
    }

    /// Every constrained range `(lo, hi, tied)` inside the schedule prefix.
    pub fn gaps(&self) -> Vec<(u64, u64, bool)> {
        let tied = self.kind.is_tied();
        let mut out = Vec::with_capacity(self.blocks.len());
        if self.blocks[0].0 >= 1 {
            out.push((1, self.blocks[0].0, false));
        }
        out.extend(self.blocks.windows(2).map(|w| (w[0].1 + 1, w[1].0, tied)));
        out
    }

    /// Constrained digit ranges clipped to `1 ..= n`.
    pub fn constrained_ranges(&self, n: u64) -> Vec<(u64, u64, bool)> {
        self.gaps()
            .into_iter()
            .take_while(|&(lo, _, _)| lo <= n)
            .map(|(lo, hi, tied)| (lo, hi.min(n), tied))
            .collect()
    }

    /// Exact `log₂ M_{2^{-n}}`.
    pub fn log2_cover_count(&self, n: u64) -> Result<u64> {
        self.check_depth(n)?;
        if n == 0 {
            return Ok(0);
        }
        let k = self.blocks.partition_point(|&(_, b)| b < n);
        let (a_k, _) = self.blocks[k];
        Ok(if n > a_k { self.sums[k] + (n - a_k) } else { self.sums[k] })
    }

    /// `M_{2^{-n}}`, the number of depth-`n` atoms meeting the set.
    pub fn exact_cover_count(&self, n: u64) -> Result<CoverCount> {
        Ok(CoverCount {
            n,
            log2_count: self.log2_cover_count(n)?,
        })
    }

    /// Counts admissible depth-`n` prefixes by testing every `l < 2^n`.
    pub fn brute_cover_count(&self, n: u64) -> Result<BigUint> {
        if n > BRUTE_DEPTH_LIMIT {
            return Err(Error::ExhaustiveLimit {
                depth: n,
                limit: BRUTE_DEPTH_LIMIT,
            });
        }
        let masks = self.prefix_masks(n)?;
        let count = (0u64..(1u64 << n)).filter(|&l| masks.admits(l)).count();
        Ok(BigUint::from(count))
    }

    /// Constraint masks over depth-`n` atom indices, `n <= 64`.
    pub fn prefix_masks(&self, n: u64) -> Result<PrefixMasks> {
        if n > 64 {
            return Err(Error::ExhaustiveLimit { depth: n, limit: 64 });
        }
        self.check_depth(n)?;
        let mask_of = |lo: u64, hi: u64| -> u64 { (lo..=hi).fold(0u64, |m, k| m | (1u64 << (n - k))) };
        let mut masks = PrefixMasks { zero: 0, tied: Vec::new() };
        for (lo, hi, tied) in self.constrained_ranges(n) {
            if tied {
                masks.tied.push(mask_of(lo, hi));
            } else {
                masks.zero |= mask_of(lo, hi);
            }
        }
        Ok(masks)
    }

    /// Whether digits `1 ..= n` of `view` satisfy every constraint up to depth `n`.
    pub fn admissible_prefix(&self, view: &DigitView, n: u64) -> Result<bool> {
        self.check_depth(n)?;
        Ok(self.constrained_ranges(n).into_iter().all(|(lo, hi, tied)| {
            let ones = view.count_ones(lo, hi);
            ones == 0 || (tied && ones == hi - lo + 1)
        }))
    }

    /// Whether the atom meets the set at its own depth.
    pub fn admissible_atom(&self, atom: &CoverAtom) -> Result<bool> {
        self.admissible_prefix(&DigitView::new(&atom.left()), atom.depth())
    }

    pub fn member(&self, x: &DyadicPoint) -> Membership {
        self.member_view(&DigitView::new(x))
    }

    /// Membership decided from the digits of `x` and the schedule prefix.
    ///
    /// A tied gap block that straddles the depth of `x` with all visible digits
    /// equal to 1, or a nonzero digit past `b_K` that the prefix does not rule
    /// out, gives [`Membership::Undetermined`].
    pub fn member_view(&self, view: &DigitView) -> Membership {
        let depth = view.depth();
        let b_k = self.max_depth();
        let mut verdict = Membership::Yes;
        for (lo, full_hi, tied) in self.gaps() {
            if lo > depth {
                break;
            }
            let hi = full_hi.min(depth);
            let ones = view.count_ones(lo, hi);
            if ones == 0 {
                continue;
            }
            if !tied || ones < hi - lo + 1 {
                return Membership::No;
            }
            if full_hi > depth {
                verdict = Membership::Undetermined;
            }
        }
        if depth > b_k && !view.all_zero(b_k + 1, depth) {
            if !self.kind.is_tied() && view.digit(b_k + 1) == 1 {
                return Membership::No;
            }
            verdict = Membership::Undetermined;
        }
        verdict
    }

    /// Depth at which the requested cover set lives.
    pub fn cover_depth(&self, k: usize, cover: CoverKind) -> Result<u64> {
        let kk = self.blocks.len();
        let wrong_kind = || Error::Parse {
            input: format!("{cover:?}"),
            reason: format!("cover kind does not apply to a {} set", self.kind.label()),
        };
        match cover {
            CoverKind::Free if self.kind.is_tied() => return Err(wrong_kind()),
            CoverKind::TiedUpper | CoverKind::TiedLower if !self.kind.is_tied() => return Err(wrong_kind()),
            _ => {}
        }
        let max = if cover == CoverKind::TiedUpper { kk - 1 } else { kk };
        if k == 0 || k > max {
            return Err(Error::BlockOutOfRange { k, max });
        }
        Ok(match cover {
            CoverKind::TiedUpper => self.blocks[k].0,
            _ => self.blocks[k - 1].1,
        })
    }

    /// The cover set `D_k`, `D′_k` or `D″_k` as points, in increasing order.
    pub fn enumerate_cover(&self, k: usize, cover: CoverKind, cap_log2: u64) -> Result<Vec<DyadicPoint>> {
        let n = self.cover_depth(k, cover)?;
        Ok(self
            .enumerate_atoms(n, cap_log2)?
            .into_iter()
            .map(|l| DyadicPoint::new(l, n).expect("atom index below 2^n"))
            .collect())
    }

    /// Independent digit choices up to depth `n`, most significant first:
    /// single free digits and whole tied ranges.
    fn choice_units(&self, n: u64) -> Vec<(u64, u64)> {
        let mut units: Vec<(u64, u64)> = Vec::new();
        let constrained = self.constrained_ranges(n);
        let mut c = constrained.iter().peekable();
        let mut k = 1u64;
        while k <= n {
            if let Some(&&(lo, hi, tied)) = c.peek() {
                if lo == k {
                    if tied {
                        units.push((lo, hi));
                    }
                    k = hi + 1;
                    c.next();
                    continue;
                }
            }
            units.push((k, k));
            k += 1;
        }
        units
    }

    /// Indices `l` of every admissible depth-`n` atom, in increasing order.
    pub fn enumerate_atoms(&self, n: u64, cap_log2: u64) -> Result<Vec<BigUint>> {
        let log2_size = self.log2_cover_count(n)?;
        if log2_size > cap_log2 {
            return Err(Error::EnumerationTooLarge {
                log2_size,
                log2_cap: cap_log2,
            });
        }
        if n <= 64 {
            return Ok(self.enumerate_atoms_u64(n, cap_log2)?.into_iter().map(BigUint::from).collect());
        }
        let units = self.choice_units(n);
        debug_assert_eq!(units.len() as u64, log2_size);
        let u = units.len();
        let mut out = Vec::with_capacity(1usize << u);
        let masks: Vec<BigUint> = units
            .iter()
            .map(|&(lo, hi)| ((BigUint::one() << (hi - lo + 1)) - 1u32) << (n - hi))
            .collect();
        for choice in 0u64..(1u64 << u) {
            let mut l = BigUint::zero();
            for (j, m) in masks.iter().enumerate() {
                if (choice >> (u - 1 - j)) & 1 == 1 {
                    l |= m;
                }
            }
            out.push(l);
        }
        Ok(out)
    }

    /// [`enumerate_atoms`](Self::enumerate_atoms) for `n <= 64`.
    pub fn enumerate_atoms_u64(&self, n: u64, cap_log2: u64) -> Result<Vec<u64>> {
        if n > 64 {
            return Err(Error::ExhaustiveLimit { depth: n, limit: 64 });
        }
        let log2_size = self.log2_cover_count(n)?;
        if log2_size > cap_log2 {
            return Err(Error::EnumerationTooLarge {
                log2_size,
                log2_cap: cap_log2,
            });
        }
        let units = self.choice_units(n);
        let u = units.len();
        let masks: Vec<u64> = units
            .iter()
            .map(|&(lo, hi)| (lo..=hi).fold(0u64, |m, d| m | (1u64 << (n - d))))
            .collect();
        let mut out = Vec::with_capacity(1usize << u);
        for choice in 0u64..(1u64 << u) {
            let mut l = 0u64;
            for (j, m) in masks.iter().enumerate() {
                if (choice >> (u - 1 - j)) & 1 == 1 {
                    l |= m;
                }
            }
            out.push(l);
        }
        Ok(out)
    }

    /// Uniform draw over the admissible depth-`n` atoms, as the atom's left end.
    pub fn sample_point(&self, depth: u64, seed: u64) -> Result<DyadicPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_digits_with(&mut rng, depth)?.to_point())
    }

    pub fn sample_point_with<R: Rng + ?Sized>(&self, rng: &mut R, depth: u64) -> Result<DyadicPoint> {
        Ok(self.sample_digits_with(rng, depth)?.to_point())
    }

    /// As [`sample_point_with`](Self::sample_point_with) but returns the digit
    /// view directly, which avoids a big-integer conversion at large depth.
    pub fn sample_digits_with<R: Rng + ?Sized>(&self, rng: &mut R, depth: u64) -> Result<DigitView> {
        self.check_depth(depth)?;
        let mut words = vec![0u64; depth.div_ceil(64) as usize];
        rng.fill(&mut words[..]);
        if !depth.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (depth % 64)) - 1;
            }
        }
        for (lo, hi, tied) in self.constrained_ranges(depth) {
            let value = tied && rng.gen::<bool>();
            set_digit_range(&mut words, depth, lo, hi, value);
        }
        Ok(DigitView::from_words(words, depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(kind: SetKind, a: &[u64], b: &[u64]) -> DigitSet {
        DigitSet::new(kind, BlockSchedule::from_u64(a, b).unwrap()).unwrap()
    }

    fn pt(s: &str) -> DyadicPoint {
        s.parse().unwrap()
    }

    #[test]
    fn membership_examples() {
        let free = set(SetKind::FreeBlocks, &[0, 4], &[2, 6]);
        assert_eq!(free.member(&pt("0.1100")), Membership::Yes);
        assert_eq!(free.member(&pt("0.1010")), Membership::No);
        let tied = set(SetKind::TiedBlocks, &[0, 4], &[2, 6]);
        assert_eq!(tied.member(&pt("0.101110")), Membership::Yes);
        assert_eq!(tied.member(&pt("0.101010")), Membership::No);
        assert_eq!(tied.member(&pt("0.011")), Membership::Undetermined);
        assert_eq!(tied.member(&pt("0.010")), Membership::Yes);
        // past b_K
        assert_eq!(free.member(&pt("0.1100001")), Membership::No);
        assert_eq!(free.member(&pt("0.11000001")), Membership::Undetermined);
        assert_eq!(tied.member(&pt("0.1111111")), Membership::Undetermined);
    }

    #[test]
    fn cover_enumeration_examples() {
        let free = set(SetKind::FreeBlocks, &[0, 4], &[2, 6]);
        let d1 = free.enumerate_cover(1, CoverKind::Free, 24).unwrap();
        let want: Vec<DyadicPoint> = ["0.00", "0.01", "0.10", "0.11"].iter().map(|s| pt(s)).collect();
        assert_eq!(d1, want);
        let three = set(SetKind::FreeBlocks, &[0, 4, 8], &[2, 6, 10]);
        assert_eq!(three.enumerate_cover(2, CoverKind::Free, 24).unwrap().len(), 16);
        let tied = set(SetKind::TiedBlocks, &[0, 4], &[2, 6]);
        let upper = tied.enumerate_cover(1, CoverKind::TiedUpper, 24).unwrap();
        assert_eq!(upper.len(), 8);
        assert!(upper.iter().all(|p| p.depth() == 4));
        assert!(matches!(
            tied.enumerate_cover(2, CoverKind::TiedUpper, 24),
            Err(Error::BlockOutOfRange { k: 2, max: 1 })
        ));
        assert!(free.enumerate_cover(1, CoverKind::TiedLower, 24).is_err());
        assert!(matches!(
            three.enumerate_cover(3, CoverKind::Free, 4),
            Err(Error::EnumerationTooLarge {
                log2_size: 6,
                log2_cap: 4
            })
        ));
    }

    #[test]
    fn count_examples() {
        let free = set(SetKind::FreeBlocks, &[0, 4], &[2, 6]);
        assert_eq!(free.exact_cover_count(2).unwrap().count(), BigUint::from(4u32));
        assert_eq!(free.exact_cover_count(3).unwrap().log2_count, 2);
        assert_eq!(free.brute_cover_count(3).unwrap(), BigUint::from(4u32));
        assert_eq!(free.brute_cover_count(6).unwrap(), BigUint::from(16u32));
        assert_eq!(free.brute_cover_count(0).unwrap(), BigUint::one());
        assert!(matches!(free.exact_cover_count(7), Err(Error::DepthBeyondSchedule { .. })));
        let tied = set(SetKind::TiedBlocks, &[0, 4], &[2, 6]);
        assert_eq!(tied.exact_cover_count(4).unwrap().log2_count, 3);
        let empty_first = set(SetKind::FreeBlocks, &[0, 1], &[0, 3]);
        assert_eq!(empty_first.brute_cover_count(1).unwrap(), BigUint::one());
        assert_eq!(empty_first.exact_cover_count(1).unwrap().log2_count, 0);
    }

    #[test]
    fn free_at_normalizes() {
        let s = DigitSet::free_at([3, 4, 7, 9, 10]).unwrap();
        assert_eq!(s.blocks(), &[(0, 0), (2, 4), (6, 7), (8, 10)]);
        let t = DigitSet::free_at([1, 2, 5]).unwrap();
        assert_eq!(t.blocks(), &[(0, 2), (4, 5)]);
        assert!(DigitSet::free_at([0, 1]).is_err());
        assert_eq!(s.member(&pt("0.0011001011")), Membership::Yes);
        assert_eq!(s.member(&pt("0.01")), Membership::No);
    }

    #[test]
    fn sampling_respects_constraints_and_is_fair() {
        let free = set(SetKind::FreeBlocks, &[0, 4, 9], &[2, 6, 12]);
        let tied = set(SetKind::TiedBlocks, &[0, 4, 9], &[2, 6, 12]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ones = 0u32;
        for _ in 0..10_000 {
            let x = free.sample_point_with(&mut rng, 8).unwrap();
            assert_eq!(x.digit(3), 0);
            assert_eq!(x.digit(4), 0);
            assert_eq!(x.digit(7), 0);
            assert_eq!(free.member(&x), Membership::Yes);
            ones += u32::from(x.digit(5));
            let y = tied.sample_point_with(&mut rng, 12).unwrap();
            assert_eq!(y.digit(3), y.digit(4));
            assert!((7..=9).all(|k| y.digit(k) == y.digit(7)));
            assert_eq!(tied.member(&y), Membership::Yes);
        }
        let freq = f64::from(ones) / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "digit frequency {freq}");
        assert_eq!(free.sample_point(12, 3).unwrap(), free.sample_point(12, 3).unwrap());
        assert!(free.sample_point(13, 3).is_err());
    }

    fn arb_set() -> impl Strategy<Value = (DigitSet, DigitSet)> {
        (1usize..6, any::<u64>()).prop_map(|(k, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = BlockSchedule::random(&mut rng, k, 20).unwrap();
            (
                DigitSet::new(SetKind::FreeBlocks, s.clone()).unwrap(),
                DigitSet::new(SetKind::TiedBlocks, s).unwrap(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn masks_match_views((free, tied) in arb_set(), seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for set in [&free, &tied] {
                let n = rand::Rng::gen_range(&mut rng, 0..=set.max_depth().min(20));
                let masks = set.prefix_masks(n).unwrap();
                for _ in 0..64 {
                    let l = rand::Rng::gen_range(&mut rng, 0..(1u64 << n));
                    let atom = CoverAtom::new(BigUint::from(l), n).unwrap();
                    prop_assert_eq!(masks.admits(l), set.admissible_atom(&atom).unwrap());
                }
                let listed = set.enumerate_atoms_u64(n, DEFAULT_ENUMERATION_CAP_LOG2).unwrap();
                prop_assert!(listed.iter().all(|&l| masks.admits(l)));
            }
        }

        #[test]
        fn formula_matches_brute((free, tied) in arb_set()) {
            for n in 0..=free.max_depth().min(16) {
                prop_assert_eq!(free.exact_cover_count(n).unwrap().count(), free.brute_cover_count(n).unwrap());
                prop_assert_eq!(tied.exact_cover_count(n).unwrap().count(), tied.brute_cover_count(n).unwrap());
            }
        }

        #[test]
        fn covers_are_members_and_separated((free, tied) in arb_set()) {
            for k in 1..=free.blocks().len() {
                let pts = free.enumerate_cover(k, CoverKind::Free, DEFAULT_ENUMERATION_CAP_LOG2).unwrap();
                let n = free.cover_depth(k, CoverKind::Free).unwrap();
                let gap = crate::numerics::Dyadic::pow2_neg(n);
                for w in pts.windows(2) {
                    prop_assert!(w[1].to_dyadic().checked_sub(&w[0].to_dyadic()).unwrap() >= gap);
                }
                for p in &pts {
                    prop_assert_eq!(free.member(p), Membership::Yes);
                    prop_assert!(tied.member(p) != Membership::No);
                }
                let lower = tied.enumerate_cover(k, CoverKind::TiedLower, DEFAULT_ENUMERATION_CAP_LOG2).unwrap();
                for p in &lower {
                    prop_assert!(tied.member(p) != Membership::No);
                }
            }
        }

        #[test]
        fn free_points_are_tied_members((free, tied) in arb_set(), seed: u64) {
            let depth = free.max_depth();
            let x = free.sample_point(depth, seed).unwrap();
            prop_assert_eq!(free.member(&x), Membership::Yes);
            prop_assert!(tied.member(&x) != Membership::No);
        }
    }
}
