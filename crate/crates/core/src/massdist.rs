//! The convolution measures `μ` on `X(a,b)` and `μ′` on `X'(a,b)`.
//!
//! Every atom of positive mass at depth `n` carries exactly `2^{-log₂ M(n)}`,
//! so masses are handled as non-negative base-2 exponents.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::digitsets::{CoverAtom, DigitSet, PrefixMasks, SetKind};
use crate::error::{Error, Result};
use crate::numerics::{DigitView, Dyadic, DyadicPoint};
use crate::schedule::{format_ratio, BlockSchedule};

/// Largest truncation depth accepted by [`BruteMeasure`].
pub const BRUTE_MEASURE_CAP: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// `μ`: fair coin on every free digit.
    Free,
    /// `μ′`: fair coin on every free digit and one per tied gap block.
    Tied,
}

impl MeasureKind {
    pub fn label(self) -> &'static str {
        match self {
            MeasureKind::Free => "mu",
            MeasureKind::Tied => "mu_tied",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMeasure {
    kind: MeasureKind,
    set: DigitSet,
}

impl BlockMeasure {
    pub fn new(kind: MeasureKind, schedule: BlockSchedule) -> Result<Self> {
        let set_kind = match kind {
            MeasureKind::Free => SetKind::FreeBlocks,
            MeasureKind::Tied => SetKind::TiedBlocks,
        };
        Ok(Self {
            kind,
            set: DigitSet::new(set_kind, schedule)?,
        })
    }

    /// The natural measure of a set: `μ` for free kinds, `μ′` for tied.
    pub fn for_set(set: &DigitSet) -> Self {
        let kind = if set.kind().is_tied() { MeasureKind::Tied } else { MeasureKind::Free };
        Self { kind, set: set.clone() }
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// The support set.
    pub fn set(&self) -> &DigitSet {
        &self.set
    }

    /// `-log₂ μ(atom)`, or `None` when the atom has zero mass.
    pub fn neg_log2_measure(&self, atom: &CoverAtom) -> Result<Option<u64>> {
        let n = atom.depth();
        let view = DigitView::new(&atom.left());
        self.neg_log2_measure_view(&view, n)
    }

    /// As [`neg_log2_measure`](Self::neg_log2_measure) for the depth-`n` atom
    /// whose left end has the digits of `view`.
    pub fn neg_log2_measure_view(&self, view: &DigitView, n: u64) -> Result<Option<u64>> {
        if !self.set.admissible_prefix(view, n)? {
            return Ok(None);
        }
        Ok(Some(self.set.log2_cover_count(n)?))
    }

    /// As [`neg_log2_measure`](Self::neg_log2_measure) for the depth-`n`
    /// atom with index `l`, using masks from [`DigitSet::prefix_masks`].
    pub fn neg_log2_measure_masked(&self, masks: &PrefixMasks, l: u64, n: u64) -> Result<Option<u64>> {
        if !masks.admits(l) {
            return Ok(None);
        }
        Ok(Some(self.set.log2_cover_count(n)?))
    }

    /// Exact `μ(atom)`.
    pub fn interval_measure(&self, atom: &CoverAtom) -> Result<Dyadic> {
        Ok(match self.neg_log2_measure(atom)? {
            None => Dyadic::zero(),
            Some(e) => Dyadic::pow2_neg(e),
        })
    }

    /// A draw from the measure, truncated to `depth` digits.
    pub fn sample(&self, depth: u64, seed: u64) -> Result<DyadicPoint> {
        self.set.sample_point(depth, seed)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, depth: u64) -> Result<DyadicPoint> {
        self.set.sample_point_with(rng, depth)
    }

    pub fn sample_digits_with<R: Rng + ?Sized>(&self, rng: &mut R, depth: u64) -> Result<DigitView> {
        self.set.sample_digits_with(rng, depth)
    }
}

/// `{"n":…, "l":…, "log2_measure":…}` with `null` for zero mass.
pub fn measure_json(atom: &CoverAtom, neg_log2: Option<u64>) -> Value {
    json!({
        "n": atom.depth(),
        "l": atom.index().to_string(),
        "log2_measure": neg_log2.map(|e| -(e as i128)).map(|v| Value::from(v as i64)),
    })
}

/// The product of the factor measures whose first digit is at most `cap`,
/// pushed forward to the first `cap` digits.
///
/// Each factor is `½δ_0 + ½δ_t`: `t = 2^{-n}` for a free digit `n`, and
/// `t = 2^{-b_k} - 2^{-a_{k+1}}` for the tied block after `b_k`. Factors
/// starting past `cap` only move mass by less than `2^{-cap}` inside digits
/// past `cap`, so every atom of depth at most `cap` gets its exact mass.
#[derive(Clone, Debug)]
pub struct BruteMeasure {
    cap: u64,
    factors: u64,
    points: Vec<u32>,
}

impl BruteMeasure {
    pub fn new(m: &BlockMeasure, cap: u64) -> Result<Self> {
        if cap > BRUTE_MEASURE_CAP {
            return Err(Error::ExhaustiveLimit {
                depth: cap,
                limit: BRUTE_MEASURE_CAP,
            });
        }
        let b_max = m.set.max_depth();
        if cap > b_max {
            return Err(Error::DepthBeyondSchedule { depth: cap, limit: b_max });
        }
        // value of digits lo..=hi truncated to the first `cap` digits
        let shifted = |lo: u64, hi: u64| -> u32 {
            let hi = hi.min(cap);
            if lo > hi {
                return 0;
            }
            let ones = (1u64 << (hi - lo + 1)) - 1;
            (ones << (cap - hi)) as u32
        };
        let mut offsets = Vec::new();
        let blocks = m.set.blocks();
        for (k, &(a, b)) in blocks.iter().enumerate() {
            for n in a + 1..=b.min(cap) {
                offsets.push(shifted(n, n));
            }
            if m.kind == MeasureKind::Tied && b < cap {
                if let Some(&(a_next, _)) = blocks.get(k + 1) {
                    offsets.push(shifted(b + 1, a_next));
                }
            }
        }
        let mut points = vec![0u32];
        for t in &offsets {
            let mut next = Vec::with_capacity(points.len() * 2);
            for &p in &points {
                next.push(p);
                next.push(p + t);
            }
            points = next;
        }
        Ok(Self {
            cap,
            factors: offsets.len() as u64,
            points,
        })
    }

    /// Mass of every depth-`n` atom, indexed by `l`.
    pub fn histogram(&self, n: u64) -> Result<Vec<Dyadic>> {
        if n > self.cap {
            return Err(Error::ExhaustiveLimit { depth: n, limit: self.cap });
        }
        let mut counts = vec![0u64; 1usize << n];
        for &p in &self.points {
            counts[(p >> (self.cap - n)) as usize] += 1;
        }
        Ok(counts
            .into_iter()
            .map(|c| Dyadic::new(BigUint::from(c), self.factors))
            .collect())
    }

    pub fn total_mass(&self) -> Dyadic {
        Dyadic::new(BigUint::from(self.points.len() as u64), self.factors)
    }

    pub fn measure(&self, atom: &CoverAtom) -> Result<Dyadic> {
        let n = atom.depth();
        if n > self.cap {
            return Err(Error::ExhaustiveLimit { depth: n, limit: self.cap });
        }
        let l: u64 = atom.index().try_into().expect("depth at most 20");
        let count = self
            .points
            .iter()
            .filter(|&&p| u64::from(p >> (self.cap - n)) == l)
            .count();
        Ok(Dyadic::new(BigUint::from(count), self.factors))
    }
}

/// One-off oracle query; build a [`BruteMeasure`] to answer many.
pub fn brute_force_measure(m: &BlockMeasure, atom: &CoverAtom, depth_cap: u64) -> Result<Dyadic> {
    BruteMeasure::new(m, depth_cap)?.measure(atom)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolderRow {
    pub n: u64,
    pub worst_l: BigUint,
    /// `log₂ μ(I) + n(d - eps)` for the worst atom at this depth.
    pub log2_ratio: BigRational,
    pub atoms_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolderReport {
    pub d: BigRational,
    pub eps: BigRational,
    pub rows: Vec<HolderRow>,
    /// Largest `log₂(μ(I)/|I|^{d-eps})` over all rows.
    pub max_log2_ratio: BigRational,
    pub threshold: BigRational,
    pub pass: bool,
    /// False when some depth had too many positive atoms and only a
    /// representative was evaluated.
    pub exhaustive: bool,
}

impl HolderReport {
    /// CSV with columns `depth,worst_l,log2_ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,worst_l,log2_ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.worst_l, format_ratio(&r.log2_ratio)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": format_ratio(&self.d),
            "eps": format_ratio(&self.eps),
            "max_log2_ratio": format_ratio(&self.max_log2_ratio),
            "threshold_log2": format_ratio(&self.threshold),
            "pass": self.pass,
            "exhaustive": self.exhaustive,
            "depths": self.rows.len(),
        })
    }
}

/// `(d - lower)/2` when that lies in `(0, d)`, else `d/4`.
pub fn default_eps(d: &BigRational, window_lower: &BigRational) -> BigRational {
    let half_gap = (d - window_lower) / BigRational::from_integer(BigInt::from(2));
    if half_gap > BigRational::zero() && &half_gap < d {
        half_gap
    } else {
        d / BigRational::from_integer(BigInt::from(4))
    }
}

/// Checks `μ(I) <= 2^{1+d} |I|^{d-eps}` on dyadic atoms of depth `1 ..= n_max`,
/// comparing `log₂ μ(I) + n(d - eps)` against `1 + d`.
pub fn holder_check(m: &BlockMeasure, d: &BigRational, eps: &BigRational, n_max: u64, cap_log2: u64) -> Result<HolderReport> {
    let zero = BigRational::zero();
    if !(eps > &zero && eps < d && d <= &BigRational::one()) {
        return Err(Error::HolderParameters {
            d: format_ratio(d),
            eps: format_ratio(eps),
        });
    }
    let slope = d - eps;
    let mut rows = Vec::new();
    let mut exhaustive = true;
    for n in 1..=n_max {
        let nn = BigRational::from_integer(BigInt::from(n));
        let log2_count = m.set.log2_cover_count(n)?;
        // smallest -log₂ μ(I) at this depth, with its atom
        let mut best: Option<(u64, BigUint)> = None;
        let consider = |e: u64, l: BigUint, best: &mut Option<(u64, BigUint)>| {
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                *best = Some((e, l));
            }
        };
        let checked;
        if log2_count > cap_log2 {
            exhaustive = false;
            checked = 1;
            if let Some(e) = m.neg_log2_measure(&CoverAtom::new(BigUint::zero(), n)?)? {
                consider(e, BigUint::zero(), &mut best);
            }
        } else if n <= 64 {
            let masks = m.set.prefix_masks(n)?;
            let atoms = m.set.enumerate_atoms_u64(n, cap_log2)?;
            checked = atoms.len() as u64;
            let mut top: Option<(u64, u64)> = None;
            for l in atoms {
                if let Some(e) = m.neg_log2_measure_masked(&masks, l, n)? {
                    if top.is_none_or(|(b, _)| e < b) {
                        top = Some((e, l));
                    }
                }
            }
            if let Some((e, l)) = top {
                consider(e, BigUint::from(l), &mut best);
            }
        } else {
            let atoms = m.set.enumerate_atoms(n, cap_log2)?;
            checked = atoms.len() as u64;
            for l in atoms {
                let atom = CoverAtom::new(l, n)?;
                if let Some(e) = m.neg_log2_measure(&atom)? {
                    consider(e, atom.index().clone(), &mut best);
                }
            }
        }
        if let Some((e, worst_l)) = best {
            let log2_ratio = &slope * &nn - BigRational::from_integer(BigInt::from(e));
            rows.push(HolderRow {
                n,
                worst_l,
                log2_ratio,
                atoms_checked: checked,
            });
        }
    }
    let max_log2_ratio = rows
        .iter()
        .map(|r| r.log2_ratio.clone())
        .max()
        .unwrap_or_else(|| BigRational::from_integer(BigInt::from(i64::MIN)));
    let threshold = BigRational::one() + d;
    Ok(HolderReport {
        d: d.clone(),
        eps: eps.clone(),
        pass: max_log2_ratio <= threshold,
        max_log2_ratio,
        threshold,
        rows,
        exhaustive,
    })
}
