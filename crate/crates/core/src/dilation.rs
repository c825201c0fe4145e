//! Dilation sequences `r`, exact orbits `r_n x mod 1`, and finite diagnostics
//! for the exceptional sets `E(r)`, `E₀(r)`, `E_f(r)`.
//!
//! Power-of-two terms are never expanded: `2^n x mod 1` is the digit stream
//! of `x` read from digit `n+1`, written `y_n` below.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::digitsets::{DigitSet, Membership, SetKind};
use crate::error::{Error, Result};
use crate::numerics::{DigitView, Dyadic, DyadicPoint, ExactDistance};
use crate::schedule::{format_ratio, BlockSchedule};

/// Largest cell resolution accepted by the gap statistics.
pub const MAX_RESOLUTION: u32 = 24;

/// One term `r_n`, kept as a sum of powers of two whenever possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Power(u64),
    PowerSum(Vec<u64>),
    Integer(BigUint),
}

impl Term {
    pub fn value(&self) -> BigUint {
        match self {
            Term::Power(e) => BigUint::one() << *e,
            Term::PowerSum(es) => es.iter().map(|&e| BigUint::one() << e).sum(),
            Term::Integer(v) => v.clone(),
        }
    }

    /// Exponents of the binary expansion of the term, increasing.
    pub fn exponent_list(&self) -> Vec<u64> {
        match self {
            Term::Power(e) => vec![*e],
            Term::PowerSum(es) => {
                let mut sorted = es.clone();
                sorted.sort_unstable();
                if sorted.windows(2).all(|w| w[0] < w[1]) {
                    sorted
                } else {
                    set_bits(&self.value())
                }
            }
            Term::Integer(v) => set_bits(v),
        }
    }

    /// `r x mod 1`.
    pub fn apply(&self, x: &DyadicPoint) -> DyadicPoint {
        match self {
            Term::Power(e) => x.shift_mod1(*e),
            Term::PowerSum(es) => es.iter().fold(DyadicPoint::zero(), |acc, &e| acc.add_mod1(&x.shift_mod1(e))),
            Term::Integer(v) => x.dilate_mod1(v).expect("terms are positive"),
        }
    }
}

fn set_bits(v: &BigUint) -> Vec<u64> {
    (0..v.bits()).filter(|&i| v.bit(i)).collect()
}

/// Generators `p_1, p_2, …` of an IP-sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IpGenerators {
    /// `p_k = 2^{e_k}`.
    Powers(Vec<u64>),
    Integers(Vec<BigUint>),
}

impl IpGenerators {
    pub fn integers(p: Vec<BigUint>) -> Result<Self> {
        if p.iter().any(Zero::is_zero) {
            return Err(Error::ZeroDilation);
        }
        Ok(IpGenerators::Integers(p))
    }

    pub fn len(&self) -> usize {
        match self {
            IpGenerators::Powers(e) => e.len(),
            IpGenerators::Integers(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `Σ ε_k p_k` where `l = Σ ε_k 2^{k-1}`.
pub fn ip_term(p: &IpGenerators, l: &BigUint) -> Result<Term> {
    let out_of_range = || Error::IpIndexOutOfRange {
        index: l.to_string(),
        generators: p.len(),
    };
    if l.is_zero() || l.bits() > p.len() as u64 {
        return Err(out_of_range());
    }
    let picked = (0..l.bits()).filter(|&k| l.bit(k)).map(|k| k as usize);
    Ok(match p {
        IpGenerators::Powers(e) => {
            let es: Vec<u64> = picked.map(|k| e[k]).collect();
            if es.len() == 1 {
                Term::Power(es[0])
            } else {
                Term::PowerSum(es)
            }
        }
        IpGenerators::Integers(v) => Term::Integer(picked.map(|k| &v[k]).sum()),
    })
}

/// A run of consecutive exponents `lo ..= hi` lying in the gap before block `block`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapRange {
    pub block: usize,
    pub lo: u64,
    pub hi: u64,
}

impl GapRange {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// `r` = all `2^n` with `b_{i-1}+1 <= n <= a_i`, `i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerBlocks {
    schedule: BlockSchedule,
    gaps: Vec<GapRange>,
}

impl PowerBlocks {
    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    pub fn gaps(&self) -> &[GapRange] {
        &self.gaps
    }

    pub fn len(&self) -> u64 {
        self.gaps.iter().map(GapRange::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = u64> + '_ {
        self.gaps.iter().flat_map(|g| g.lo..=g.hi)
    }

    /// The gap ranges covering the first `limit` terms (all when `None`).
    pub fn prefix(&self, limit: Option<u64>) -> Vec<GapRange> {
        let mut left = limit.unwrap_or(u64::MAX);
        let mut out = Vec::new();
        for g in &self.gaps {
            if left == 0 {
                break;
            }
            let take = g.len().min(left);
            out.push(GapRange { hi: g.lo + take - 1, ..*g });
            left -= take;
        }
        out
    }

    /// Exponent of the `n`-th term, 1-indexed.
    pub fn exponent(&self, n: u64) -> Option<u64> {
        let mut n = n.checked_sub(1)?;
        for g in &self.gaps {
            if n < g.len() {
                return Some(g.lo + n);
            }
            n -= g.len();
        }
        None
    }
}

pub fn build_power_blocks(s: &BlockSchedule) -> Result<DilationSequence> {
    let pos = s.positions()?;
    let gaps = pos
        .windows(2)
        .enumerate()
        .map(|(i, w)| GapRange {
            block: i + 2,
            lo: w[0].1 + 1,
            hi: w[1].0,
        })
        .collect();
    Ok(DilationSequence::PowerBlocks(PowerBlocks {
        schedule: s.clone(),
        gaps,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DilationSequence {
    Explicit(Vec<BigUint>),
    PowerBlocks(PowerBlocks),
    Ip(IpGenerators),
}

impl DilationSequence {
    pub fn explicit(terms: Vec<BigUint>) -> Result<Self> {
        if terms.iter().any(Zero::is_zero) {
            return Err(Error::ZeroDilation);
        }
        Ok(DilationSequence::Explicit(terms))
    }

    /// IP-sequence generated by `2^n`, `n` ranging over the gaps of `s`.
    pub fn ip_from_schedule(s: &BlockSchedule) -> Result<Self> {
        let DilationSequence::PowerBlocks(pb) = build_power_blocks(s)? else { unreachable!() };
        Ok(DilationSequence::Ip(IpGenerators::Powers(pb.exponents().collect())))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DilationSequence::Explicit(_) => "explicit",
            DilationSequence::PowerBlocks(_) => "power-blocks",
            DilationSequence::Ip(_) => "ip",
        }
    }

    /// Number of available terms.
    pub fn len(&self) -> BigUint {
        match self {
            DilationSequence::Explicit(t) => BigUint::from(t.len()),
            DilationSequence::PowerBlocks(pb) => BigUint::from(pb.len()),
            DilationSequence::Ip(p) => (BigUint::one() << p.len()) - 1u32,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    /// The `n`-th term, 1-indexed.
    pub fn term(&self, n: u64) -> Result<Term> {
        let missing = || Error::NotEnoughTerms {
            available: self.len().to_string(),
            requested: n,
        };
        match self {
            DilationSequence::Explicit(t) => {
                let i = n.checked_sub(1).ok_or_else(missing)? as usize;
                t.get(i).cloned().map(Term::Integer).ok_or_else(missing)
            }
            DilationSequence::PowerBlocks(pb) => pb.exponent(n).map(Term::Power).ok_or_else(missing),
            DilationSequence::Ip(p) => ip_term(p, &BigUint::from(n)).map_err(|_| missing()),
        }
    }

    fn check_available(&self, n: u64) -> Result<()> {
        if BigUint::from(n) > self.len() {
            return Err(Error::NotEnoughTerms {
                available: self.len().to_string(),
                requested: n,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub index: u64,
    pub term: Term,
    pub value: DyadicPoint,
    pub distance: ExactDistance,
}

/// The first `n` orbit points `r_k x mod 1`.
pub fn orbit(x: &DyadicPoint, seq: &DilationSequence, n: u64) -> Result<Vec<OrbitRecord>> {
    seq.check_available(n)?;
    (1..=n)
        .map(|index| {
            let term = seq.term(index)?;
            let value = term.apply(x);
            let distance = value.dist_nearest_int();
            Ok(OrbitRecord {
                index,
                term,
                value,
                distance,
            })
        })
        .collect()
}

/// CSV with columns `index,exponent_list,value,distance_log2_bound`.
///
/// Exponents are `;`-separated; a zero distance is written `-inf`.
pub fn orbit_csv(records: &[OrbitRecord]) -> String {
    let mut out = String::from("index,exponent_list,value,distance_log2_bound\n");
    for r in records {
        let exps: Vec<String> = r.term.exponent_list().iter().map(u64::to_string).collect();
        let bound = match r.distance.log2_ceil() {
            Some(e) => e.to_string(),
            None => "-inf".to_string(),
        };
        out.push_str(&format!("{},{},{},{}\n", r.index, exps.join(";"), r.value, bound));
    }
    out
}

fn check_resolution(m: u32) -> Result<()> {
    if m == 0 || m > MAX_RESOLUTION {
        return Err(Error::Resolution { m });
    }
    Ok(())
}

/// Largest circular run of empty cells over the number of cells.
pub fn gap_statistic_from_cells(cells: &[u64]) -> BigRational {
    let total = cells.len();
    let denom = BigRational::from_integer(BigInt::from(total));
    let Some(first) = cells.iter().position(|&c| c > 0) else {
        return BigRational::one();
    };
    let (mut best, mut run) = (0usize, 0usize);
    for i in 1..=total {
        if cells[(first + i) % total] == 0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    BigRational::from_integer(BigInt::from(best)) / denom
}

/// Orbit values counted into the `2^m` cells `[c/2^m, (c+1)/2^m)`, with multiplicity.
pub fn cell_counts(values: &[DyadicPoint], m: u32) -> Result<Vec<u64>> {
    check_resolution(m)?;
    let mut cells = vec![0u64; 1usize << m];
    for v in values {
        let c = v.atom_index(m as u64).to_usize().expect("m <= 24");
        cells[c] += 1;
    }
    Ok(cells)
}

pub fn gap_statistic(values: &[DyadicPoint], m: u32) -> Result<BigRational> {
    if values.is_empty() {
        return Err(Error::Empty { what: "orbit values" });
    }
    Ok(gap_statistic_from_cells(&cell_counts(values, m)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionalDiagnostics {
    pub terms: u64,
    /// `max ‖r_n x‖` over the last quarter of the records.
    pub e0_tail_max: Dyadic,
    pub ef_partial_sum: Dyadic,
    pub resolution: u32,
    pub gap_stat: BigRational,
}

impl ExceptionalDiagnostics {
    /// Exact values with more than `max_bits` bits are written as `null`
    /// next to their decimal annotation.
    pub fn to_json(&self, max_bits: u64) -> Value {
        let exact = |d: &Dyadic| (d.exponent() <= max_bits).then(|| d.to_string());
        json!({
            "terms": self.terms,
            "e0_tail_max": exact(&self.e0_tail_max),
            "e0_tail_max_decimal": self.e0_tail_max.to_f64(),
            "ef_partial_sum": exact(&self.ef_partial_sum),
            "ef_partial_sum_decimal": self.ef_partial_sum.to_f64(),
            "resolution": self.resolution,
            "gap_stat": format_ratio(&self.gap_stat),
        })
    }
}

pub fn diagnostics(records: &[OrbitRecord], m: u32) -> Result<ExceptionalDiagnostics> {
    if records.is_empty() {
        return Err(Error::Empty { what: "orbit records" });
    }
    let n = records.len();
    let tail = n.div_ceil(4);
    let e0_tail_max = records[n - tail..]
        .iter()
        .map(|r| r.distance.to_dyadic())
        .max()
        .expect("non-empty");
    let ef_partial_sum = records.iter().map(|r| r.distance.to_dyadic()).sum();
    let values: Vec<DyadicPoint> = records.iter().map(|r| r.value.clone()).collect();
    Ok(ExceptionalDiagnostics {
        terms: n as u64,
        e0_tail_max,
        ef_partial_sum,
        resolution: m,
        gap_stat: gap_statistic(&values, m)?,
    })
}

/// An exact non-negative real `C + extra + Σ c_j y_{e_j}` over the digits of
/// one point, compared against dyadic rationals at adaptive precision.
#[derive(Clone, Debug)]
pub struct OrbitSum<'a> {
    view: &'a DigitView,
    constant: BigInt,
    extra: Dyadic,
    terms: Vec<(i64, u64)>,
}

impl<'a> OrbitSum<'a> {
    pub fn new(view: &'a DigitView) -> Self {
        Self {
            view,
            constant: BigInt::zero(),
            extra: Dyadic::zero(),
            terms: Vec::new(),
        }
    }

    fn add_suffix(&mut self, coef: i64, e: u64) {
        self.terms.push((coef, e));
    }

    fn add_int(&mut self, v: i64) {
        self.constant += v;
    }

    fn add_exact(&mut self, d: &Dyadic) {
        self.extra = &self.extra + d;
    }

    /// Adds `Σ_{n=lo}^{hi} y_n` for `lo >= 1` via `y_n = 2 y_{n-1} - ξ_n`.
    fn add_suffix_range(&mut self, coef: i64, lo: u64, hi: u64) {
        self.add_suffix(2 * coef, hi);
        self.add_suffix(-2 * coef, lo - 1);
        self.add_int(coef * self.view.count_ones(lo, hi) as i64);
    }

    /// Adds `Σ_{n=lo}^{hi} ‖y_n‖`: `y_n > 1/2` exactly when digit `n+1` is 1
    /// and is not the last nonzero digit.
    fn add_distance_range(&mut self, lo: u64, hi: u64) {
        self.add_suffix_range(1, lo, hi);
        let last = self.view.last_one();
        for (f, l) in self.view.ones_runs(lo + 1, hi + 1) {
            let (u, v) = (f - 1, l - 1);
            let mut pieces = vec![(u, v)];
            if let Some(z) = last {
                if z >= f && z <= l {
                    pieces = vec![(u, z - 2), (z, v)];
                }
            }
            for (u, v) in pieces {
                if u > v || u < lo {
                    continue;
                }
                // ‖y‖ = y - (2y - 1)
                self.add_suffix_range(-2, u, v);
                self.add_int((v - u + 1) as i64);
            }
        }
    }

    fn bounds(&self, p: u64) -> (BigInt, BigInt) {
        let scaled = |d: &Dyadic| -> (BigInt, BigInt) {
            let (num, exp) = (d.numerator(), d.exponent());
            if exp <= p {
                let v = BigInt::from(num << (p - exp));
                (v.clone(), v)
            } else {
                let f = BigInt::from(num >> (exp - p));
                (f.clone(), f + 1)
            }
        };
        let base = &self.constant << p;
        let (elo, ehi) = scaled(&self.extra);
        let (mut lo, mut hi) = (&base + elo, &base + ehi);
        for &(c, e) in &self.terms {
            let (f, exact) = self.view.suffix_floor(e, p);
            let f = BigInt::from(f);
            let up = if exact { f.clone() } else { &f + 1 };
            if c >= 0 {
                lo += c * &f;
                hi += c * up;
            } else {
                lo += c * up;
                hi += c * f;
            }
        }
        (lo, hi)
    }

    /// Exact comparison with `t`.
    pub fn cmp_dyadic(&self, t: &Dyadic) -> Ordering {
        let full = self.view.depth().max(t.exponent()).max(self.extra.exponent()) + 64;
        let mut p = 64u64;
        loop {
            let (lo, hi) = self.bounds(p);
            let (t_lo, t_exact) = if t.exponent() <= p {
                (BigInt::from(t.numerator() << (p - t.exponent())), true)
            } else {
                let shift = t.exponent() - p;
                let f = t.numerator() >> shift;
                let exact = t.numerator().trailing_zeros().is_none_or(|z| z >= shift);
                (BigInt::from(f), exact)
            };
            if hi < t_lo || (hi == t_lo && !t_exact) {
                return Ordering::Less;
            }
            if lo > t_lo {
                return Ordering::Greater;
            }
            if lo == hi && hi == t_lo && t_exact {
                return Ordering::Equal;
            }
            assert!(p < full, "bounds are exact at full precision");
            p = (p * 2).min(full);
        }
    }

    pub fn lt_one(&self) -> bool {
        self.cmp_dyadic(&Dyadic::one()) == Ordering::Less
    }

    /// The exact value. Costs memory proportional to the point's depth.
    pub fn to_dyadic(&self) -> Dyadic {
        let p = self.view.depth().max(self.extra.exponent());
        let (lo, hi) = self.bounds(p);
        debug_assert_eq!(lo, hi);
        let (sign, mag) = lo.into_parts();
        assert!(sign != Sign::Minus, "orbit sums are non-negative");
        Dyadic::new(mag, p)
    }

    /// Within `2^{-60}` of the value; for display only.
    pub fn to_f64(&self) -> f64 {
        let (lo, _) = self.bounds(64);
        lo.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(64)
    }

    /// `"p/q"` when the exact value has at most `max_bits` bits, else `None`.
    pub fn exact_string(&self, max_bits: u64) -> Option<String> {
        if self.view.depth() > max_bits {
            return None;
        }
        Some(self.to_dyadic().to_string())
    }
}

/// Exact `Σ_{n<=N} ‖r_n x‖` for the first `n` terms (all when `None`).
pub fn ef_partial_sum<'a>(view: &'a DigitView, seq: &DilationSequence, n: Option<u64>) -> Result<OrbitSum<'a>> {
    let mut sum = OrbitSum::new(view);
    match seq {
        DilationSequence::PowerBlocks(pb) => {
            if let Some(n) = n {
                seq.check_available(n)?;
            }
            for g in pb.prefix(n) {
                sum.add_distance_range(g.lo, g.hi);
            }
        }
        _ => {
            let n = match n {
                Some(n) => n,
                None => seq.len().to_u64().ok_or(Error::NotEnoughTerms {
                    available: seq.len().to_string(),
                    requested: u64::MAX,
                })?,
            };
            for r in orbit(&view.to_point(), seq, n)? {
                sum.add_exact(&r.distance.to_dyadic());
            }
        }
    }
    Ok(sum)
}

/// The bound `Σ_i Σ_{n in gap i} 2^{n - a_i - i}` over the first `n` terms.
pub fn ef_majorant(pb: &PowerBlocks, n: Option<u64>) -> Dyadic {
    pb.prefix(n)
        .iter()
        .map(|g| {
            let e = g.hi_bound(pb);
            // Σ_{n=lo}^{hi} 2^{n-e} = (2^{hi+1} - 2^{lo}) / 2^e
            let num = (BigUint::one() << (g.hi + 1 - g.lo)) - 1u32;
            Dyadic::new(num, e - g.lo)
        })
        .sum()
}

impl GapRange {
    /// `a_i + i` for the gap's block.
    fn hi_bound(&self, pb: &PowerBlocks) -> u64 {
        let a_i = pb.gaps[self.block - 2].hi;
        a_i + self.block as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapSeparation {
    pub block: usize,
    pub lo: u64,
    pub hi: u64,
    /// `a_i + i`: the bound at exponent `n₀` is `2^{-(a_i + i - n₀)}`.
    pub bound_at: u64,
    pub largest_failure: Option<u64>,
    /// For passing gaps, `max ‖2^{n₀}x‖ · 2^{a_i+i-n₀}` over the gap (approximate).
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub gaps: Vec<GapSeparation>,
    pub checked: u64,
    pub pass: bool,
}

impl SeparationReport {
    /// The first failing gap, or else the passing gap with the largest margin.
    pub fn worst(&self) -> Option<&GapSeparation> {
        if let Some(g) = self.gaps.iter().find(|g| g.largest_failure.is_some()) {
            return Some(g);
        }
        self.gaps
            .iter()
            .max_by(|x, y| x.margin.unwrap_or(0.0).total_cmp(&y.margin.unwrap_or(0.0)))
    }

    pub fn to_json(&self) -> Value {
        let worst = self.worst().map(|g| {
            json!({
                "block": g.block,
                "n0": g.largest_failure.unwrap_or(g.lo),
                "bound_exponent": g.bound_at,
                "margin": g.margin,
            })
        });
        json!({"pass": self.pass, "checked": self.checked, "worst": worst})
    }
}

/// `‖2^{n₀}x‖ <= 2^{-(a_i+i-n₀)}` for every exponent `n₀` of the first `n` terms.
///
/// With `E = a_i + i` the bound holds at `n₀` iff digits `n₀+1 ..= E` are all
/// 0, or all 1, or are `0…01` with nothing after `E`. Each of these holds on
/// an upper segment of the gap, so one threshold per gap decides it.
pub fn separation_sweep(view: &DigitView, pb: &PowerBlocks, n: Option<u64>) -> SeparationReport {
    let mut gaps = Vec::new();
    let mut checked = 0;
    for g in pb.prefix(n) {
        let e = g.hi_bound(pb);
        let zeros = e - view.zero_run_back(e).min(e);
        let ones = e - view.one_run_back(e);
        let single = if view.digit(e) == 1 && view.suffix_is_zero(e) {
            e - 1 - view.zero_run_back(e - 1).min(e - 1)
        } else {
            u64::MAX
        };
        let threshold = zeros.min(ones).min(single);
        let largest_failure = (threshold > g.lo).then(|| (threshold - 1).min(g.hi));
        let margin = largest_failure.is_none().then(|| {
            let y = view.window(e, 64) as f64 / 2f64.powi(64);
            if threshold == zeros {
                y
            } else if threshold == ones {
                1.0 - y
            } else {
                1.0
            }
        });
        checked += g.len();
        gaps.push(GapSeparation {
            block: g.block,
            lo: g.lo,
            hi: g.hi,
            bound_at: e,
            largest_failure,
            margin,
        });
    }
    let pass = gaps.iter().all(|g| g.largest_failure.is_none());
    SeparationReport { gaps, checked, pass }
}

/// [`separation_sweep`] for points of `X(a′, b)`, `a′_i = a_i + i`.
pub fn separation_bound_check(view: &DigitView, s: &BlockSchedule, n: Option<u64>) -> Result<SeparationReport> {
    let set = DigitSet::new(SetKind::FreeBlocks, s.prime_shift()?)?;
    if set.member_view(view) == Membership::No {
        return Err(Error::NotInRequiredSet);
    }
    let DilationSequence::PowerBlocks(pb) = build_power_blocks(s)? else { unreachable!() };
    Ok(separation_sweep(view, &pb, n))
}

#[derive(Clone, Debug)]
pub struct IpDensityRow<'a> {
    pub h: u64,
    pub partial_sum: OrbitSum<'a>,
    pub below_one: bool,
}

/// For `h = 1 ..= h_max`, the partial sums `Σ ‖h 2^n x‖` over the first `n`
/// gap exponents of `s`. A sum below 1 marks `h` as a candidate witness that
/// the IP-set of `{2^n x}` is not dense; nothing is claimed either way.
pub fn ip_density_condition<'a>(view: &'a DigitView, s: &BlockSchedule, h_max: u64, n: Option<u64>) -> Result<Vec<IpDensityRow<'a>>> {
    if h_max == 0 {
        return Err(Error::Empty { what: "multiplier range" });
    }
    let DilationSequence::PowerBlocks(pb) = build_power_blocks(s)? else { unreachable!() };
    let ranges = pb.prefix(n);
    let point = view.to_point();
    let mut rows = Vec::new();
    for h in 1..=h_max {
        let t = h.trailing_zeros() as u64;
        let odd = h >> t;
        let mut sum = OrbitSum::new(view);
        for g in &ranges {
            if odd == 1 {
                sum.add_distance_range(g.lo + t, g.hi + t);
            } else {
                let odd = BigUint::from(odd);
                for e in g.lo..=g.hi {
                    let v = point.shift_mod1(e + t).dilate_mod1(&odd)?;
                    sum.add_exact(&v.dist_nearest_int().to_dyadic());
                }
            }
        }
        let below_one = sum.lt_one();
        rows.push(IpDensityRow {
            h,
            partial_sum: sum,
            below_one,
        });
    }
    Ok(rows)
}

/// Cell occupancy and a distance bound over the orbit of a power-block sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerOrbitScan {
    pub terms: u64,
    pub resolution: u32,
    pub cells: Vec<u64>,
    /// `j` in the bound `‖2^n x‖ <= 2^{-j}`.
    pub bound: u32,
    pub within_bound: u64,
    pub first_violation: Option<u64>,
}

impl PowerOrbitScan {
    pub fn gap_statistic(&self) -> BigRational {
        gap_statistic_from_cells(&self.cells)
    }
}

/// Visits every exponent of the first `n` terms once, reading `2^n x mod 1`
/// a word at a time and skipping runs of constant digits.
pub fn scan_power_orbit(view: &DigitView, pb: &PowerBlocks, n: Option<u64>, m: u32, j: u32) -> Result<PowerOrbitScan> {
    check_resolution(m)?;
    if j == 0 || j > 62 {
        return Err(Error::Resolution { m: j });
    }
    let k = m.max(j) as u64;
    let mut cells = vec![0u64; 1usize << m];
    let last = view.last_one().unwrap_or(0);
    let j_mask = (1u64 << j) - 1;
    let (mut terms, mut within, mut first_violation) = (0u64, 0u64, None);
    for g in pb.prefix(n) {
        let mut e = g.lo;
        while e <= g.hi {
            let w = view.window(e, 64);
            if w == 0 || w == u64::MAX {
                let run = (64 - k + 1).min(g.hi - e + 1);
                let cell = if w == 0 { 0 } else { cells.len() - 1 };
                cells[cell] += run;
                terms += run;
                within += run;
                e += run;
                continue;
            }
            let cell = (w >> (64 - m)) as usize;
            cells[cell] += 1;
            let top = w >> (64 - j);
            let ok = top == 0 || top == j_mask || (top == 1 && last <= e + j as u64);
            if ok {
                within += 1;
            } else if first_violation.is_none() {
                first_violation = Some(e);
            }
            terms += 1;
            e += 1;
        }
    }
    Ok(PowerOrbitScan {
        terms,
        resolution: m,
        cells,
        bound: j,
        within_bound: within,
        first_violation,
    })
}
