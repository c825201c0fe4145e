//! Acceptance suite: one pass/fail line per criterion.

use std::cmp::Ordering;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use dimlab::boxlab::dimension_report;
use dimlab::digitsets::{CoverAtom, CoverKind, DigitSet, Membership, SetKind};
use dimlab::dilation::{
    build_power_blocks, ef_majorant, ef_partial_sum, ip_term, orbit, scan_power_orbit, separation_bound_check,
    DilationSequence, IpGenerators,
};
use dimlab::massdist::{holder_check, BlockMeasure, BruteMeasure, MeasureKind};
use dimlab::numerics::{Dyadic, DyadicPoint};
use dimlab::schedule::{synthesize, BlockSchedule};

type Outcome = Result<String, String>;
type Run<'a> = (Vec<String>, Vec<(&'a str, &'a str)>);
type Check = Option<fn() -> Outcome>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn sched(a: &[u64], b: &[u64]) -> BlockSchedule {
    BlockSchedule::from_u64(a, b).unwrap()
}

fn arithmetic(k: u64, step: u64, width: u64) -> BlockSchedule {
    let a: Vec<u64> = (0..k).map(|i| step * i).collect();
    let b: Vec<u64> = a.iter().map(|x| x + width).collect();
    sched(&a, &b)
}

/// Small schedules reaching depth 20.
fn small_schedules() -> Vec<BlockSchedule> {
    vec![
        arithmetic(6, 4, 2),
        sched(&[0, 3, 9, 15], &[1, 6, 12, 21]),
        sched(&[0, 2, 7, 13, 17], &[1, 5, 10, 16, 23]),
    ]
}

fn u64s(v: &[BigUint]) -> Vec<u64> {
    v.iter().map(|x| x.try_into().unwrap()).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1() -> Outcome {
    let mut checked = 0;
    for s in small_schedules() {
        for kind in [SetKind::FreeBlocks, SetKind::TiedBlocks] {
            let set = DigitSet::new(kind, s.clone()).map_err(|e| e.to_string())?;
            for n in 0..=20 {
                let exact = set.exact_cover_count(n).unwrap().count();
                let brute = set.brute_cover_count(n).unwrap();
                ensure(exact == brute, || format!("{} {s} n={n}: formula {exact} vs brute {brute}", kind.label()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (schedule, kind, depth) triples, 3 free + 3 tied schedules"))
}

fn ac2() -> Outcome {
    let mut checked = 0;
    for s in small_schedules().into_iter().chain([arithmetic(8, 5, 3), sched(&[0, 10, 30], &[5, 20, 60])]) {
        let (a, b) = (u64s(s.a_values()), u64s(s.b_values()));
        let kk = a.len();
        let free = DigitSet::new(SetKind::FreeBlocks, s.clone()).unwrap();
        let tied = DigitSet::new(SetKind::TiedBlocks, s.clone()).unwrap();
        for k in 1..=kk {
            let w: u64 = (0..k).map(|i| b[i] - a[i]).sum();
            let cases = [
                (&free, CoverKind::Free, w, b[k - 1]),
                (&tied, CoverKind::TiedUpper, w + k as u64, a.get(k).copied().unwrap_or(0)),
                (&tied, CoverKind::TiedLower, w + k as u64 - 1, b[k - 1]),
            ];
            for (set, cover, log2, depth) in cases {
                if cover == CoverKind::TiedUpper && k == kk {
                    continue;
                }
                if log2 > 16 {
                    continue;
                }
                let points = set.enumerate_cover(k, cover, 16).map_err(|e| e.to_string())?;
                ensure(points.len() as u64 == 1u64 << log2, || {
                    format!("{s} k={k} {cover:?}: {} points, expected 2^{log2}", points.len())
                })?;
                ensure(points.windows(2).all(|p| p[0] < p[1]), || format!("{s} k={k} {cover:?}: not distinct"))?;
                for p in &points {
                    ensure(p.depth() == depth, || format!("{cover:?} point at depth {}", p.depth()))?;
                    let atom = CoverAtom::containing(p, depth);
                    ensure(set.admissible_atom(&atom).unwrap(), || format!("{cover:?}: {p} not admissible"))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} cover sets enumerated (size <= 2^16)"))
}

fn ratio_le(l1: u64, n1: u64, l2: u64, n2: u64) -> bool {
    // l1/n1 <= l2/n2
    u128::from(l1) * u128::from(n2) <= u128::from(l2) * u128::from(n1)
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac3);
    let mut pairs = 0u64;
    for t in 0..100 {
        let k = rng.gen_range(2..=10);
        let s = BlockSchedule::random(&mut rng, k, 64).unwrap();
        let (a, b) = (u64s(s.a_values()), u64s(s.b_values()));
        for kind in [SetKind::FreeBlocks, SetKind::TiedBlocks] {
            let set = DigitSet::new(kind, s.clone()).unwrap();
            let l = |n: u64| set.log2_cover_count(n).unwrap();
            for i in 0..a.len() {
                for n in a[i] + 1..b[i] {
                    ensure(n == 0 || ratio_le(l(n), n, l(n + 1), n + 1), || {
                        format!("schedule {t} {s} {}: decrease inside block at n={n}", kind.label())
                    })?;
                    pairs += 1;
                }
                if let Some(&next) = a.get(i + 1) {
                    for n in b[i] + 1..next {
                        ensure(ratio_le(l(n + 1), n + 1, l(n), n), || {
                            format!("schedule {t} {s} {}: increase inside gap at n={n}", kind.label())
                        })?;
                        pairs += 1;
                    }
                }
            }
        }
    }
    Ok(format!("100 random schedules (b_K <= 64), both kinds, {pairs} consecutive pairs"))
}

fn ac4() -> Outcome {
    let schedules = [
        arithmetic(6, 4, 2),
        sched(&[0, 3, 9, 15], &[1, 6, 12, 21]),
        sched(&[0, 2, 7, 13, 17], &[1, 5, 10, 16, 23]),
        sched(&[0, 5, 11], &[3, 8, 17]),
    ];
    let mut atoms = 0u64;
    for s in &schedules {
        for kind in [MeasureKind::Free, MeasureKind::Tied] {
            let m = BlockMeasure::new(kind, s.clone()).unwrap();
            let brute = BruteMeasure::new(&m, 16).map_err(|e| e.to_string())?;
            ensure(brute.total_mass() == Dyadic::one(), || "oracle mass is not 1".into())?;
            for n in 0..=16u64 {
                let hist = brute.histogram(n).unwrap();
                for (l, mass) in hist.iter().enumerate() {
                    let atom = CoverAtom::new(BigUint::from(l), n).unwrap();
                    let exact = m.interval_measure(&atom).unwrap();
                    ensure(&exact == mass, || {
                        format!("{} {s} n={n} l={l}: {exact} vs oracle {mass}", kind.label())
                    })?;
                    if n <= 15 {
                        let [c0, c1] = atom.children();
                        let sum = &m.interval_measure(&c0).unwrap() + &m.interval_measure(&c1).unwrap();
                        ensure(sum == exact, || format!("{} {s} n={n} l={l}: children sum {sum}", kind.label()))?;
                    }
                    atoms += 1;
                }
            }
        }
    }
    Ok(format!("{atoms} atoms of depth <= 16 on 4 schedules x 2 measures, additivity to depth 15"))
}

fn constant_schedule() -> BlockSchedule {
    arithmetic(13, 4, 2)
}

fn ac5() -> Outcome {
    let s = constant_schedule();
    let set = DigitSet::new(SetKind::FreeBlocks, s.clone()).unwrap();
    let d1 = dimension_report(&set, None, None).map_err(|e| e.to_string())?.d1.value;
    ensure(d1 == q(1, 2), || format!("d1 = {d1}"))?;
    let m = BlockMeasure::new(MeasureKind::Free, s).unwrap();
    let r = holder_check(&m, &d1, &q(1, 8), 24, 24).map_err(|e| e.to_string())?;
    ensure(r.exhaustive, || "sweep was not exhaustive".into())?;
    ensure(r.rows.len() == 24, || format!("{} depths", r.rows.len()))?;
    // independent recomputation: mu(I) = 2^{-#free digits <= n} on every positive atom
    let mut worst = None::<BigRational>;
    for n in 1..=24u64 {
        let free = (1..=n).filter(|k| k % 4 == 1 || k % 4 == 2).count() as i64;
        let v = q(3 * n as i64, 8) - q(free, 1);
        if worst.as_ref().is_none_or(|w| &v > w) {
            worst = Some(v);
        }
    }
    let worst = worst.unwrap();
    ensure(r.max_log2_ratio == worst, || format!("sweep max {} vs oracle {worst}", r.max_log2_ratio))?;
    ensure(r.pass && r.max_log2_ratio <= q(3, 2), || format!("max {} > 3/2", r.max_log2_ratio))?;
    Ok(format!("max log2 ratio {} <= 3/2 over depths 1..=24", r.max_log2_ratio))
}

fn ac6() -> Outcome {
    let s = constant_schedule();
    let (a, b) = (u64s(s.a_values()), u64s(s.b_values()));
    let mut counted_boundaries = 0;
    for (kind, extra) in [(SetKind::FreeBlocks, 0u64), (SetKind::TiedBlocks, 1)] {
        let set = DigitSet::new(kind, s.clone()).unwrap();
        let r = dimension_report(&set, None, None).map_err(|e| e.to_string())?;
        let got = [&r.d1.value, &r.d2.value, &r.d1_tied.value, &r.d2_tied.value];
        let want = [q(1, 2), q(1, 2), q(3, 4), q(3, 4)];
        for (g, w) in got.iter().zip(&want) {
            ensure(*g == w, || format!("{}: got {g}, want {w}", kind.label()))?;
        }
        ensure(r.all_pass(), || format!("{} verdicts: {:?}", kind.label(), r.verdicts))?;
        // grid-count ratios at block boundaries against the formula terms
        let mut sum = 0u64;
        for k in 0..a.len() {
            sum += b[k] - a[k] + extra;
            let boundaries = [(b[k], sum - extra), (a.get(k + 1).copied().unwrap_or(0), sum)];
            for (n, log2) in boundaries {
                if n == 0 || (k + 1 == a.len() && n != b[k]) || log2 > 20 {
                    continue;
                }
                counted_boundaries += 1;
                let counted = if n <= 20 {
                    set.brute_cover_count(n).unwrap()
                } else {
                    BigUint::from(set.enumerate_atoms(n, 24).map_err(|e| e.to_string())?.len())
                };
                ensure(counted == BigUint::one() << log2, || {
                    format!("{} n={n}: counted {counted}, formula 2^{log2}", kind.label())
                })?;
            }
        }
    }
    Ok(format!(
        "d1 = d2 = 1/2, d1' = d2' = 3/4; profile verdicts exact; {counted_boundaries} boundary counts (<= 2^20 atoms) match formula terms"
    ))
}

fn ac7() -> Outcome {
    let mut worst = BigRational::zero();
    for d in [q(0, 1), q(1, 4), q(1, 3), q(1, 2), q(3, 4), q(1, 1)] {
        let s = synthesize(&d, 15).map_err(|e| e.to_string())?.base;
        let quotient = BigRational::new(s.b(14).clone().into(), s.a(15).clone().into());
        let err = (&quotient - &d).abs();
        ensure(err <= q(1, 10), || format!("d={d}: b_14/a_15 = {quotient}"))?;
        s.prime_shift().map_err(|e| format!("d={d}: {e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("max |b_14/a_15 - d| = {:.3e}", dimlab::schedule::ratio_to_f64(&worst)))
}

struct SampleRun {
    sep_time: Duration,
    scan_time: Duration,
    detail8: Result<String, String>,
    detail10: Result<String, String>,
}

fn ac8_and_10() -> SampleRun {
    let s = synthesize(&q(1, 3), 8).unwrap().base;
    let set = DigitSet::new(SetKind::FreeBlocks, s.prime_shift().unwrap()).unwrap();
    let seq = build_power_blocks(&s).unwrap();
    let DilationSequence::PowerBlocks(pb) = &seq else { unreachable!() };
    let majorant = ef_majorant(pb, None);
    let mut rng = ChaCha8Rng::seed_from_u64(0xac8);
    let (mut sep_time, mut scan_time) = (Duration::ZERO, Duration::ZERO);
    let mut fail8 = None;
    let mut fail10 = None;
    let mut max_ef = 0f64;
    let mut min_gap = BigRational::one();
    for i in 0..100 {
        let t = Instant::now();
        let view = set.sample_digits_with(&mut rng, set.max_depth()).unwrap();
        let check = || -> Result<f64, String> {
            if set.member_view(&view) == Membership::No {
                return Err(format!("sample {i} not in X(a',b)"));
            }
            let sep = separation_bound_check(&view, &s, None).map_err(|e| e.to_string())?;
            if !sep.pass || sep.checked != pb.len() {
                return Err(format!("sample {i}: separation failed at {:?}", sep.worst()));
            }
            let ef = ef_partial_sum(&view, &seq, None).map_err(|e| e.to_string())?;
            if !ef.lt_one() {
                return Err(format!("sample {i}: ef sum >= 1"));
            }
            if ef.cmp_dyadic(&majorant) == Ordering::Greater {
                return Err(format!("sample {i}: ef sum above the geometric majorant"));
            }
            Ok(ef.to_f64())
        };
        match check() {
            Ok(v) => max_ef = max_ef.max(v),
            Err(e) => {
                fail8.get_or_insert(e);
            }
        }
        sep_time += t.elapsed();
        let t = Instant::now();
        match scan_power_orbit(&view, pb, None, 4, 2) {
            Ok(scan) => {
                let gap = scan.gap_statistic();
                if scan.terms != pb.len() || scan.within_bound != scan.terms {
                    fail10.get_or_insert(format!("sample {i}: first term outside 1/4 at exponent {:?}", scan.first_violation));
                } else if gap < q(1, 4) {
                    fail10.get_or_insert(format!("sample {i}: gap statistic {gap}"));
                }
                min_gap = min_gap.min(gap);
            }
            Err(e) => {
                fail10.get_or_insert(e.to_string());
            }
        }
        scan_time += t.elapsed();
    }
    SampleRun {
        sep_time,
        scan_time,
        detail8: match fail8 {
            None => Ok(format!(
                "100 samples at depth {}, {} exponents each; max ef sum {max_ef:.6} < 1",
                set.max_depth(),
                pb.len()
            )),
            Some(e) => Err(e),
        },
        detail10: match fail10 {
            None => Ok(format!("all orbit values within 1/4 of 0; min gap statistic {min_gap} >= 1/4")),
            Some(e) => Err(e),
        },
    }
}

fn random_point(rng: &mut ChaCha8Rng, depth: u64) -> DyadicPoint {
    let bytes: Vec<u8> = (0..depth.div_ceil(8)).map(|_| rng.gen()).collect();
    let m = BigUint::from_bytes_le(&bytes) >> (depth.div_ceil(8) * 8 - depth);
    DyadicPoint::new(m, depth).unwrap()
}

fn ac9() -> Outcome {
    let binary = IpGenerators::Powers((0..=20).collect());
    for l in 1u64..=(1 << 20) {
        let v = ip_term(&binary, &BigUint::from(l)).map_err(|e| e.to_string())?.value();
        ensure(v == BigUint::from(l), || format!("ip_term(l={l}) = {v}"))?;
    }
    let s = synthesize(&q(1, 3), 5).unwrap().base;
    let ip = DilationSequence::ip_from_schedule(&s).unwrap();
    let DilationSequence::Ip(p) = &ip else { unreachable!() };
    let IpGenerators::Powers(exps) = p else { unreachable!() };
    let powers = build_power_blocks(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac9);
    for t in 0..1000 {
        let depth = rng.gen_range(1..=2048);
        let x = random_point(&mut rng, depth);
        let bits = rng.gen_range(1..=p.len() as u64);
        let mut l = BigUint::one() << (bits - 1);
        for _ in 0..rng.gen_range(0..8) {
            l.set_bit(rng.gen_range(0..bits), true);
        }
        if bits <= 64 {
            l |= BigUint::from(rng.gen::<u64>() & ((1u128 << bits) - 1) as u64);
        }
        let term = ip_term(p, &l).map_err(|e| e.to_string())?;
        let value = term.apply(&x);
        // oracle 1: r_l materialized, x r_l mod 1
        let r_l: BigUint = (0..bits).filter(|&k| l.bit(k)).map(|k| BigUint::one() << exps[k as usize]).sum();
        ensure(value == x.dilate_mod1(&r_l).unwrap(), || format!("pair {t}: product oracle differs"))?;
        // oracle 2: exact sum of the power-block orbit values mod 1
        let mut acc = Dyadic::zero();
        for k in (0..bits).filter(|&k| l.bit(k)) {
            let rec = orbit(&x, &powers, k + 1).unwrap().pop().unwrap();
            acc = &acc + &rec.value.to_dyadic();
        }
        let frac = DyadicPoint::new(acc.numerator().clone(), acc.exponent()).ok();
        let reduced = match frac {
            Some(v) => v,
            None => {
                let den = BigUint::one() << acc.exponent();
                DyadicPoint::new(acc.numerator() % &den, acc.exponent()).unwrap()
            }
        };
        ensure(value == reduced, || format!("pair {t}: shift-sum oracle differs"))?;
    }
    Ok(format!("ip_term(l) = l for l <= 2^20; 1000 (x, l) pairs over {} gap generators", p.len()))
}

fn cli(args: &[&str], envs: &[(&str, &str)]) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dimlab"));
    cmd.args(args).env_remove("DIMLAB_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn ac11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sched_path = dir.path().join("s.json");
    let sched_path = sched_path.to_str().unwrap();
    cli(&["synth", "--d", "1/3", "--blocks", "5", "--schedule-out", sched_path], &[])?;
    let arith = ["--a", "0,4,8,12,16,20,24", "--b", "2,6,10,14,18,22,26"];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(tail).map(|s| s.to_string()).collect()
    };
    let runs: Vec<Run> = vec![
        (with(&["synth", "--d", "1/2", "--blocks", "8"], &[]), vec![]),
        (with(&["dims", "--samples", "64", "--seed", "5"], &arith), vec![]),
        (with(&["dims", "--kind", "tied", "--samples", "64", "--format", "csv"], &arith), vec![("DIMLAB_SEED", "9")]),
        (with(&["holder", "--format", "csv"], &arith), vec![]),
        (with(&["measure", "--n", "6", "--l", "17", "--kind", "tied"], &arith), vec![]),
        (with(&["orbit", "--schedule", sched_path, "--sample-from-measure", "--n", "64", "--h-max", "3", "--seed", "11"], &[]), vec![]),
        (with(&["orbit", "--schedule", sched_path, "--sample-from-measure", "--format", "csv"], &[]), vec![("DIMLAB_SEED", "12")]),
        (with(&["orbit", "--schedule", sched_path, "--x", "0.0000011", "--ip", "--n", "40"], &[]), vec![]),
        (with(&["report", "--format", "text"], &arith), vec![]),
    ];
    let mut hashes = Vec::new();
    for (args, envs) in &runs {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = Sha256::digest(cli(&argv, envs)?);
        let second = Sha256::digest(cli(&argv, envs)?);
        ensure(first == second, || format!("{argv:?}: outputs differ between runs"))?;
        hashes.push(first);
    }
    // the environment seed overrides --seed
    let orbit = ["orbit", "--schedule", sched_path, "--sample-from-measure", "--n", "8"];
    let env_a = cli(&[&orbit[..], &["--seed", "1"]].concat(), &[("DIMLAB_SEED", "77")])?;
    let env_b = cli(&[&orbit[..], &["--seed", "2"]].concat(), &[("DIMLAB_SEED", "77")])?;
    let flag = cli(&[&orbit[..], &["--seed", "77"]].concat(), &[])?;
    ensure(env_a == env_b && env_a == flag, || "DIMLAB_SEED does not override --seed".into())?;
    let other = cli(&[&orbit[..], &["--seed", "78"]].concat(), &[])?;
    ensure(other != flag, || "different seeds gave identical samples".into())?;
    Ok(format!("{} command configurations hashed twice, identical", hashes.len()))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration) -> bool {
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= c.budget => (true, d),
        Ok(d) => (false, format!("{d}; took {elapsed:.2?}, budget {:?}", c.budget)),
        Err(e) => (false, e),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {} {}: {detail} ({elapsed:.2?})", c.id, c.name);
    ok
}

fn timed(f: fn() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let list: [(Criterion, Check); 11] = [
        (Criterion { id: "AC1", name: "cover-count oracle equivalence", budget: secs(60) }, Some(ac1)),
        (Criterion { id: "AC2", name: "cover cardinality formulas", budget: secs(30) }, Some(ac2)),
        (Criterion { id: "AC3", name: "block monotonicity", budget: secs(60) }, Some(ac3)),
        (Criterion { id: "AC4", name: "measure oracle equivalence", budget: secs(120) }, Some(ac4)),
        (Criterion { id: "AC5", name: "Hölder bound", budget: secs(60) }, Some(ac5)),
        (Criterion { id: "AC6", name: "dimension-formula agreement", budget: secs(30) }, Some(ac6)),
        (Criterion { id: "AC7", name: "synthesizer convergence", budget: secs(30) }, Some(ac7)),
        (Criterion { id: "AC8", name: "separation and summability", budget: secs(60) }, None),
        (Criterion { id: "AC9", name: "IP enumeration", budget: secs(60) }, Some(ac9)),
        (Criterion { id: "AC10", name: "non-density witness", budget: secs(30) }, None),
        (Criterion { id: "AC11", name: "CLI determinism", budget: secs(120) }, Some(ac11)),
    ];
    let mut all = true;
    let mut samples = None;
    for (c, f) in &list {
        let pass = match f {
            Some(f) => {
                let (outcome, elapsed) = timed(*f);
                report(c, outcome, elapsed)
            }
            None => {
                let run = samples.get_or_insert_with(ac8_and_10);
                if c.id == "AC8" {
                    report(c, run.detail8.clone(), run.sep_time)
                } else {
                    report(c, run.detail10.clone(), run.scan_time)
                }
            }
        };
        all &= pass;
    }
    if all {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
