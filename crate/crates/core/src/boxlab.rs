//! Box-counting profiles on the dyadic grid and their comparison with the
//! closed-form dimension quotients.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::digitsets::DigitSet;
use crate::error::{Error, Result};
use crate::numerics::DyadicPoint;
use crate::schedule::{default_window, format_ratio, ratio_to_f64, RatioProfile};

/// Depths up to which [`dimension_report`] keeps every row; deeper rows are
/// kept only at block boundaries.
pub const DENSE_ROW_LIMIT: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub n: u64,
    pub log2_count: u64,
    pub empirical: Option<u64>,
    pub ratio: BigRational,
}

/// Count rows at increasing depths, plus the block boundaries of the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountProfile {
    pub rows: Vec<CountRow>,
    /// `(b_k, a_{k+1})` for every block; `None` when `k = K`.
    pub boundaries: Vec<(u64, Option<u64>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowEstimate {
    pub lower: BigRational,
    pub upper: BigRational,
    pub depth_window: (u64, u64),
    /// Whether both extremes were taken at block boundaries.
    pub at_boundaries: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMethod {
    /// The window ends in at least three equally spaced blocks of equal
    /// width, so the quotient converges to `(w + t)/p` along that continuation.
    PeriodicTail,
    WindowMin,
    WindowMax,
}

impl EstimateMethod {
    fn label(self) -> &'static str {
        match self {
            EstimateMethod::PeriodicTail => "periodic-tail-limit",
            EstimateMethod::WindowMin => "window-min",
            EstimateMethod::WindowMax => "window-max",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaEstimate {
    pub value: BigRational,
    pub window_min: BigRational,
    pub window_max: BigRational,
    pub method: EstimateMethod,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub kind: crate::digitsets::SetKind,
    pub window: (usize, usize),
    pub n_max: u64,
    pub d1: FormulaEstimate,
    pub d2: FormulaEstimate,
    pub d1_tied: FormulaEstimate,
    pub d2_tied: FormulaEstimate,
    pub empirical: WindowEstimate,
    pub monotonicity_pass: bool,
    pub verdicts: Vec<Verdict>,
}

impl DimensionReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Value {
        let est = |e: &FormulaEstimate| {
            json!({
                "value": format_ratio(&e.value),
                "window_min": format_ratio(&e.window_min),
                "window_max": format_ratio(&e.window_max),
                "method": e.method.label(),
                "decimal": format!("{:.6}", ratio_to_f64(&e.value)),
            })
        };
        json!({
            "kind": self.kind.label(),
            "window": [self.window.0, self.window.1],
            "n_max": self.n_max,
            "formula": {
                "d1": format_ratio(&self.d1.value),
                "d2": format_ratio(&self.d2.value),
                "d1_tied": format_ratio(&self.d1_tied.value),
                "d2_tied": format_ratio(&self.d2_tied.value),
            },
            "formula_detail": {
                "d1": est(&self.d1),
                "d2": est(&self.d2),
                "d1_tied": est(&self.d1_tied),
                "d2_tied": est(&self.d2_tied),
            },
            "empirical": {
                "lower": format_ratio(&self.empirical.lower),
                "upper": format_ratio(&self.empirical.upper),
                "depth_window": [self.empirical.depth_window.0, self.empirical.depth_window.1],
                "at_boundaries": self.empirical.at_boundaries,
            },
            "monotonicity_pass": self.monotonicity_pass,
            "verdicts": self.verdicts.iter().map(|v| json!({
                "name": v.name, "pass": v.pass, "detail": v.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Number of distinct depth-`n` atoms holding at least one of the points.
pub fn empirical_box_count(points: &[DyadicPoint], n: u64) -> u64 {
    points.iter().map(|p| p.atom_index(n)).collect::<BTreeSet<BigUint>>().len() as u64
}

impl CountProfile {
    fn new(set: &DigitSet, depths: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut rows = Vec::new();
        for n in depths {
            let log2_count = set.log2_cover_count(n)?;
            rows.push(CountRow {
                n,
                log2_count,
                empirical: None,
                ratio: ratio(log2_count, n),
            });
        }
        let blocks = set.blocks();
        let boundaries = (0..blocks.len())
            .map(|i| (blocks[i].1, blocks.get(i + 1).map(|&(a, _)| a)))
            .collect();
        Ok(Self { rows, boundaries })
    }

    pub fn row(&self, n: u64) -> Option<&CountRow> {
        self.rows.binary_search_by_key(&n, |r| r.n).ok().map(|i| &self.rows[i])
    }

    /// Fills the empirical column with grid counts of `points`.
    pub fn attach_empirical(&mut self, points: &[DyadicPoint]) {
        for row in &mut self.rows {
            row.empirical = Some(empirical_box_count(points, row.n));
        }
    }

    /// CSV with columns `n,log2_count,empirical,ratio,decimal`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log2_count,empirical,ratio,decimal\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                r.n,
                r.log2_count,
                r.empirical.map(|e| e.to_string()).unwrap_or_default(),
                format_ratio(&r.ratio),
                ratio_to_f64(&r.ratio)
            ));
        }
        out
    }

    /// Depth range covered by blocks `k_lo ..= k_hi`, clipped to the profile.
    pub fn depth_window(&self, k_lo: usize, k_hi: usize) -> Result<(u64, u64)> {
        let k_max = self.boundaries.len();
        if k_lo == 0 || k_lo > k_hi || k_hi > k_max {
            return Err(Error::BlockOutOfRange { k: k_hi.max(k_lo), max: k_max });
        }
        let n_last = self.rows.last().map(|r| r.n).unwrap_or(0);
        let lo = self.boundaries[k_lo - 1].0;
        let (b_hi, a_next) = self.boundaries[k_hi - 1];
        let hi = a_next.unwrap_or(b_hi).min(n_last);
        Ok((lo, hi))
    }
}

/// Rows for every depth `1 ..= n_max`.
pub fn ratio_profile(set: &DigitSet, n_max: u64) -> Result<CountProfile> {
    CountProfile::new(set, 1..=n_max)
}

/// Rows at every depth up to `dense_limit` and at block boundaries beyond it.
pub fn sparse_ratio_profile(set: &DigitSet, n_max: u64, dense_limit: u64) -> Result<CountProfile> {
    let mut depths: BTreeSet<u64> = (1..=n_max.min(dense_limit)).collect();
    for &(a, b) in set.blocks() {
        for n in [a, a + 1, b, b + 1] {
            if n >= 1 && n <= n_max {
                depths.insert(n);
            }
        }
    }
    CountProfile::new(set, depths)
}

/// `(min, max)` of the row ratios with depth in `n_lo ..= n_hi`.
///
/// The lower estimate uses only depths `a_{k+1}` and the upper only depths
/// `b_k`, where the in-block monotonicity puts the extremes. A side with no
/// boundary depth in range falls back to every row in range.
pub fn window_estimate(profile: &CountProfile, n_lo: u64, n_hi: u64) -> Result<WindowEstimate> {
    let in_window: Vec<&CountRow> = profile.rows.iter().filter(|r| r.n >= n_lo && r.n <= n_hi).collect();
    if in_window.is_empty() {
        return Err(Error::Empty { what: "profile window" });
    }
    let lowers: BTreeSet<u64> = profile.boundaries.iter().filter_map(|&(_, a)| a).collect();
    let uppers: BTreeSet<u64> = profile.boundaries.iter().map(|&(b, _)| b).collect();
    let pick = |targets: &BTreeSet<u64>| -> Vec<&CountRow> {
        in_window.iter().copied().filter(|r| targets.contains(&r.n)).collect()
    };
    let low_rows = pick(&lowers);
    let high_rows = pick(&uppers);
    let at_boundaries = !low_rows.is_empty() && !high_rows.is_empty();
    let low_rows = if low_rows.is_empty() { in_window.clone() } else { low_rows };
    let high_rows = if high_rows.is_empty() { in_window.clone() } else { high_rows };
    Ok(WindowEstimate {
        lower: low_rows.iter().map(|r| r.ratio.clone()).min().unwrap(),
        upper: high_rows.iter().map(|r| r.ratio.clone()).max().unwrap(),
        depth_window: (n_lo, n_hi),
        at_boundaries,
    })
}

/// First depth `n` at which `log₂ M(n)/n` moves against the direction
/// prescribed for its zone.
pub fn monotonicity_violation(set: &DigitSet, profile: &CountProfile) -> Option<u64> {
    let blocks = set.blocks();
    // zone id: 2k for the free block k, 2k+1 for the gap after it
    let zone = |n: u64| -> usize {
        let k = blocks.partition_point(|&(_, b)| b < n);
        if n > blocks[k].0 {
            2 * k
        } else {
            2 * k + 1
        }
    };
    for w in profile.rows.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let z = zone(cur.n);
        if z != zone(prev.n) {
            continue;
        }
        let ok = if z % 2 == 0 {
            cur.ratio >= prev.ratio
        } else {
            cur.ratio <= prev.ratio
        };
        if !ok {
            return Some(cur.n);
        }
    }
    None
}

fn estimate(profile: &RatioProfile, k_lo: usize, k_hi: usize, limit: Option<BigRational>, lower: bool) -> Result<FormulaEstimate> {
    let window_min = profile.window_min(k_lo, k_hi).ok_or(Error::Empty { what: "formula window" })?;
    let window_max = profile.window_max(k_lo, k_hi).ok_or(Error::Empty { what: "formula window" })?;
    let (value, method) = match limit {
        Some(l) => (l, EstimateMethod::PeriodicTail),
        None if lower => (window_min.clone(), EstimateMethod::WindowMin),
        None => (window_max.clone(), EstimateMethod::WindowMax),
    };
    Ok(FormulaEstimate {
        value,
        window_min,
        window_max,
        method,
    })
}

/// Formula values over a block window next to the grid-count profile of the set.
///
/// `window` defaults to the last third of the blocks and `n_max` to `b_K`.
pub fn dimension_report(set: &DigitSet, window: Option<(usize, usize)>, n_max: Option<u64>) -> Result<DimensionReport> {
    let k_max = set.blocks().len();
    if k_max < 3 {
        return Err(Error::TooFewBlocks { needed: 3, found: k_max });
    }
    let n_max = n_max.unwrap_or(set.max_depth());
    if n_max > set.max_depth() {
        return Err(Error::DepthBeyondSchedule {
            depth: n_max,
            limit: set.max_depth(),
        });
    }
    let (k_lo, k_hi) = window.unwrap_or_else(|| default_window(k_max));
    if k_lo == 0 || k_lo > k_hi || k_hi > k_max {
        return Err(Error::BlockOutOfRange { k: k_hi.max(k_lo), max: k_max });
    }
    let schedule = set.schedule();
    let (f1, f2) = schedule.free_ratio_profile()?;
    let (t1, t2) = schedule.tied_ratio_profile()?;
    let k_hi_over_a = k_hi.min(k_max - 1).max(k_lo.min(k_max - 1));
    let k_lo_over_a = k_lo.min(k_max - 1);
    let free_limit = schedule.periodic_tail_limit(k_lo, 0);
    let tied_limit = schedule.periodic_tail_limit(k_lo, 1);
    let d1 = estimate(&f1, k_lo_over_a, k_hi_over_a, free_limit.clone(), true)?;
    let d2 = estimate(&f2, k_lo, k_hi, free_limit, false)?;
    let d1_tied = estimate(&t1, k_lo_over_a, k_hi_over_a, tied_limit.clone(), true)?;
    let d2_tied = estimate(&t2, k_lo, k_hi, tied_limit, false)?;

    let profile = sparse_ratio_profile(set, n_max, DENSE_ROW_LIMIT)?;
    let (n_lo, n_hi) = profile.depth_window(k_lo, k_hi)?;
    let empirical = window_estimate(&profile, n_lo, n_hi)?;

    let tied = set.kind().is_tied();
    let (over_a, over_b) = if tied { (&t1, &t2) } else { (&f1, &f2) };
    let mut lower_mismatch = None;
    let mut upper_mismatch = None;
    let mut checked = 0usize;
    for k in 1..=k_max {
        let b_k = set.blocks()[k - 1].1;
        if let Some(row) = profile.row(b_k) {
            let want = over_b.value(k).expect("b_k > 0 past the first block");
            // the tied count at b_k has not yet absorbed the k-th gap block
            let got = if tied { &row.ratio + ratio(1, b_k) } else { row.ratio.clone() };
            checked += 1;
            if got != want && upper_mismatch.is_none() {
                upper_mismatch = Some(k);
            }
        }
        if k < k_max {
            let a_next = set.blocks()[k].0;
            if let Some(row) = profile.row(a_next) {
                checked += 1;
                if Some(row.ratio.clone()) != over_a.value(k) && lower_mismatch.is_none() {
                    lower_mismatch = Some(k);
                }
            }
        }
    }
    let violation = monotonicity_violation(set, &profile);
    let unit = |r: &BigRational| r >= &BigRational::zero() && r <= &BigRational::one();
    // d2' terms count the tied block after b_k and may exceed 1 at finite k
    let in_unit = [&d1.value, &d2.value, &d1_tied.value, &empirical.lower, &empirical.upper]
        .into_iter()
        .all(unit);
    let verdicts = vec![
        Verdict {
            name: "lower_boundary_identity",
            pass: lower_mismatch.is_none(),
            detail: match lower_mismatch {
                None => "ratio at a_{k+1} equals the over-a quotient for every k".into(),
                Some(k) => format!("mismatch at k = {k}"),
            },
        },
        Verdict {
            name: "upper_boundary_identity",
            pass: upper_mismatch.is_none(),
            detail: match upper_mismatch {
                None if tied => "ratio at b_k plus 1/b_k equals the over-b quotient for every k".into(),
                None => "ratio at b_k equals the over-b quotient for every k".into(),
                Some(k) => format!("mismatch at k = {k}"),
            },
        },
        Verdict {
            name: "monotonicity",
            pass: violation.is_none(),
            detail: match violation {
                None => format!("{} rows checked", profile.rows.len()),
                Some(n) => format!("violated at n = {n}"),
            },
        },
        Verdict {
            name: "unit_interval",
            pass: in_unit && empirical.lower <= empirical.upper,
            detail: format!("{checked} boundary rows compared"),
        },
    ];
    Ok(DimensionReport {
        kind: set.kind(),
        window: (k_lo, k_hi),
        n_max,
        d1,
        d2,
        d1_tied,
        d2_tied,
        empirical,
        monotonicity_pass: violation.is_none(),
        verdicts,
    })
}
