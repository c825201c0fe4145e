//! `dimlab`: schedules, dimension reports, measures and orbit diagnostics
//! for binary-digit-restricted sets.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde_json::{json, Value};

use dimlab::boxlab::{dimension_report, sparse_ratio_profile, DENSE_ROW_LIMIT};
use dimlab::digitsets::{CoverAtom, CoverKind, DigitSet, SetKind, DEFAULT_ENUMERATION_CAP_LOG2};
use dimlab::dilation::{
    build_power_blocks, diagnostics, ef_partial_sum, ip_density_condition, ip_term, orbit, orbit_csv,
    separation_bound_check, DilationSequence, IpGenerators,
};
use dimlab::massdist::{default_eps, holder_check, measure_json, BlockMeasure, BruteMeasure, MeasureKind};
use dimlab::numerics::{DigitView, DyadicPoint};
use dimlab::schedule::{format_ratio, parse_ratio, ratio_to_f64, synthesize, BlockSchedule};
use dimlab::Error;

use output::{Format, Output};

/// Exact values above this many bits are reported as decimals only.
const EXACT_OUTPUT_BITS: u64 = 4096;

#[derive(Parser, Debug)]
#[command(name = "dimlab", version, about = "Digit-restricted sets, their dimensions, measures and dilation orbits")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for every sampled quantity; DIMLAB_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a schedule whose gap quotients b_k/a_{k+1} tend to d.
    Synth(SynthArgs),
    /// Formula and grid-count dimension report.
    Dims(DimsArgs),
    /// Size and optionally the members of a cover set.
    Cover(CoverArgs),
    /// Exact measure of a dyadic atom.
    Measure(MeasureArgs),
    /// Hölder bound sweep over dyadic atoms.
    Holder(HolderArgs),
    /// Orbit records and exceptional-set diagnostics.
    Orbit(OrbitArgs),
    /// Terms of an IP-sequence.
    Ip(IpArgs),
    /// Dimension reports for both set kinds plus a Hölder sweep.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct ScheduleArgs {
    /// Schedule JSON file with integer arrays "a" and "b".
    #[arg(long, conflicts_with_all = ["a", "b"])]
    schedule: Option<PathBuf>,
    /// Inline left ends, comma separated.
    #[arg(long, value_delimiter = ',', requires = "b")]
    a: Vec<BigUint>,
    /// Inline right ends, comma separated.
    #[arg(long, value_delimiter = ',', requires = "a")]
    b: Vec<BigUint>,
}

impl ScheduleArgs {
    fn load(&self) -> Result<BlockSchedule> {
        if let Some(path) = &self.schedule {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(BlockSchedule::from_json(&text)?);
        }
        if self.a.is_empty() {
            bail!("a schedule is required: pass --schedule FILE or --a … --b …");
        }
        Ok(BlockSchedule::validate(self.a.clone(), self.b.clone())?)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Free,
    Tied,
}

impl Kind {
    fn set_kind(self) -> SetKind {
        match self {
            Kind::Free => SetKind::FreeBlocks,
            Kind::Tied => SetKind::TiedBlocks,
        }
    }

    fn measure_kind(self) -> MeasureKind {
        match self {
            Kind::Free => MeasureKind::Free,
            Kind::Tied => MeasureKind::Tied,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Cover {
    Free,
    TiedUpper,
    TiedLower,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Target dimension in [0, 1], as "p/q".
    #[arg(long)]
    d: String,
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// Also write the schedule JSON here.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DimsArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Kind::Free)]
    kind: Kind,
    /// Deepest grid level; defaults to b_K.
    #[arg(long)]
    n_max: Option<u64>,
    /// Block window "lo,hi"; defaults to the last third of the blocks.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    window: Option<Vec<usize>>,
    /// Write the count profile CSV here.
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    /// Attach empirical box counts from this many sampled points.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Cover::Free)]
    cover: Cover,
    /// Block index k, from 1
    #[arg(long)]
    k: usize,
    /// List the members, up to 2^cap_log2 of them.
    #[arg(long)]
    list: bool,
    /// Largest enumeration, as log2 of the member count
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP_LOG2)]
    cap_log2: u64,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Kind::Free)]
    kind: Kind,
    /// Atom depth.
    #[arg(long)]
    n: u64,
    /// Atom index in [0, 2^n).
    #[arg(long)]
    l: BigUint,
    /// Cross-check against the convolution oracle truncated at this depth.
    #[arg(long)]
    brute_cap: Option<u64>,
}

#[derive(Args, Debug)]
struct HolderArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Kind::Free)]
    kind: Kind,
    /// Exponent d as "p/q"; defaults to the formula lower dimension.
    #[arg(long)]
    d: Option<String>,
    /// Slack as "p/q"; defaults to half the distance from d to the window minimum.
    #[arg(long)]
    eps: Option<String>,
    /// Deepest atom level; defaults to b_K.
    #[arg(long)]
    n_max: Option<u64>,
    /// Largest enumeration, as log2 of the member count
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP_LOG2)]
    cap_log2: u64,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// The point, as "0.b1b2…" or "0x<hex>:<depth>".
    #[arg(long, conflicts_with = "sample_from_measure")]
    x: Option<String>,
    /// Draw x from the natural measure on X(a′, b), a′_i = a_i + i.
    #[arg(long)]
    sample_from_measure: bool,
    /// Sample depth; defaults to b_K.
    #[arg(long)]
    depth: Option<u64>,
    /// Number of orbit terms; defaults to min(256, available).
    #[arg(long)]
    n: Option<u64>,
    /// Multipliers h = 1..=h_max for the IP density partial sums.
    #[arg(long, default_value_t = 1)]
    h_max: u64,
    /// Use the IP-sequence generated by the gap powers.
    #[arg(long)]
    ip: bool,
    /// Cell resolution m for the gap statistic.
    #[arg(long, default_value_t = 4)]
    resolution: u32,
    /// Write the orbit CSV here.
    #[arg(long)]
    records_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IpArgs {
    /// Generators p_1, p_2, …, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["schedule", "a", "b"])]
    generators: Vec<BigUint>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Indices l, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    l: Vec<BigUint>,
    /// Also report r_l x mod 1.
    #[arg(long)]
    x: Option<String>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    n_max: Option<u64>,
    /// Deepest level of the Hölder sweep.
    #[arg(long, default_value_t = 24)]
    holder_depth: u64,
}

fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("DIMLAB_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("DIMLAB_SEED={v:?} is not a u64")),
        Err(_) => Ok(flag),
    }
}

fn ratio_arg(s: &str) -> Result<BigRational> {
    Ok(parse_ratio(s)?)
}

fn synth(args: &SynthArgs) -> Result<Output> {
    let d = ratio_arg(&args.d)?;
    let syn = synthesize(&d, args.blocks)?;
    let text = syn.base.to_json();
    if let Some(path) = &args.schedule_out {
        fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    let quotients = syn.gap_quotients();
    let mut csv = String::from("k,numerator,denominator,decimal\n");
    for (i, r) in quotients.iter().enumerate() {
        csv.push_str(&format!("{},{},{},{:.6}\n", i + 1, r.numer(), r.denom(), ratio_to_f64(r)));
    }
    let schedule: Value = serde_json::from_str(&text)?;
    let json = json!({
        "target_d": format_ratio(&d),
        "blocks": args.blocks,
        "schedule": schedule,
        "next_a": syn.next_a().to_string(),
        "gap_quotients": quotients.iter().map(format_ratio).collect::<Vec<_>>(),
    });
    Ok(Output::new(json, csv))
}

fn dims(args: &DimsArgs, seed: u64) -> Result<Output> {
    let set = DigitSet::new(args.kind.set_kind(), args.schedule.load()?)?;
    let window = args.window.as_ref().map(|w| (w[0], w[1]));
    let report = dimension_report(&set, window, args.n_max)?;
    let mut profile = sparse_ratio_profile(&set, report.n_max, DENSE_ROW_LIMIT)?;
    if args.samples > 0 {
        let measure = BlockMeasure::for_set(&set);
        let points = (0..args.samples as u64)
            .map(|i| measure.sample(report.n_max, seed.wrapping_add(i)))
            .collect::<dimlab::Result<Vec<_>>>()?;
        profile.attach_empirical(&points);
    }
    let csv = profile.to_csv();
    if let Some(path) = &args.profile_csv {
        fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Output::new(report.to_json(), csv))
}

fn cover(args: &CoverArgs) -> Result<Output> {
    let schedule = args.schedule.load()?;
    let (kind, cover) = match args.cover {
        Cover::Free => (SetKind::FreeBlocks, CoverKind::Free),
        Cover::TiedUpper => (SetKind::TiedBlocks, CoverKind::TiedUpper),
        Cover::TiedLower => (SetKind::TiedBlocks, CoverKind::TiedLower),
    };
    let set = DigitSet::new(kind, schedule)?;
    let depth = set.cover_depth(args.k, cover)?;
    let count = set.exact_cover_count(depth)?;
    let mut json = json!({
        "k": args.k,
        "cover": format!("{:?}", args.cover).to_lowercase(),
        "depth": depth,
        "log2_count": count.log2_count,
        "count": count.count().to_string(),
    });
    let mut csv = String::from("index,point\n");
    if args.list {
        let points = set.enumerate_cover(args.k, cover, args.cap_log2)?;
        for (i, p) in points.iter().enumerate() {
            csv.push_str(&format!("{i},{p}\n"));
        }
        json["points"] = points.iter().map(|p| Value::from(p.to_string())).collect();
    }
    Ok(Output::new(json, csv))
}

fn measure(args: &MeasureArgs) -> Result<Output> {
    let m = BlockMeasure::new(args.kind.measure_kind(), args.schedule.load()?)?;
    let atom = CoverAtom::new(args.l.clone(), args.n)?;
    let neg_log2 = m.neg_log2_measure(&atom)?;
    let mut json = measure_json(&atom, neg_log2);
    json["measure"] = Value::from(m.interval_measure(&atom)?.to_string());
    if let Some(cap) = args.brute_cap {
        let brute = BruteMeasure::new(&m, cap)?.measure(&atom)?;
        json["brute_force"] = Value::from(brute.to_string());
    }
    let log2 = neg_log2.map_or("null".to_string(), |e| format!("-{e}"));
    let csv = format!("n,l,log2_measure\n{},{},{}\n", args.n, args.l, log2);
    Ok(Output::new(json, csv))
}

fn holder_defaults(set: &DigitSet, d: Option<&str>, eps: Option<&str>) -> Result<(BigRational, BigRational)> {
    let report = match (d, eps) {
        (Some(_), Some(_)) => None,
        _ => Some(dimension_report(set, None, None)?),
    };
    let est = |r: &dimlab::boxlab::DimensionReport| if set.kind().is_tied() { r.d1_tied.clone() } else { r.d1.clone() };
    let d = match d {
        Some(s) => ratio_arg(s)?,
        None => est(report.as_ref().expect("computed above")).value,
    };
    let eps = match eps {
        Some(s) => ratio_arg(s)?,
        None => default_eps(&d, &est(report.as_ref().expect("computed above")).window_min),
    };
    Ok((d, eps))
}

fn holder(args: &HolderArgs) -> Result<Output> {
    let m = BlockMeasure::new(args.kind.measure_kind(), args.schedule.load()?)?;
    let (d, eps) = holder_defaults(m.set(), args.d.as_deref(), args.eps.as_deref())?;
    let n_max = args.n_max.unwrap_or(m.set().max_depth());
    let report = holder_check(&m, &d, &eps, n_max, args.cap_log2)?;
    Ok(Output::new(report.to_json(), report.to_csv()))
}

fn parse_point(s: &str) -> Result<DyadicPoint> {
    Ok(s.parse::<DyadicPoint>()?)
}

fn point_json(x: &DyadicPoint) -> Value {
    if x.depth() <= EXACT_OUTPUT_BITS {
        Value::from(x.to_string())
    } else {
        let (hex, depth) = x.to_hex();
        json!({"depth": depth, "hex_digits": hex.len(), "decimal": x.to_f64()})
    }
}

fn count_json(v: &BigUint) -> String {
    if v.bits() <= 64 {
        v.to_string()
    } else if (v + 1u32).count_ones() == 1 {
        format!("2^{} - 1", v.bits())
    } else {
        format!("~2^{}", v.bits())
    }
}

fn orbit_cmd(args: &OrbitArgs, seed: u64) -> Result<Output> {
    let schedule = args.schedule.load()?;
    let x = if args.sample_from_measure {
        let set = DigitSet::new(SetKind::FreeBlocks, schedule.prime_shift()?)?;
        let depth = args.depth.unwrap_or(set.max_depth());
        set.sample_point(depth, seed)?
    } else {
        match &args.x {
            Some(s) => parse_point(s)?,
            None => bail!("pass --x or --sample-from-measure"),
        }
    };
    let view = DigitView::new(&x);
    let seq = if args.ip {
        DilationSequence::ip_from_schedule(&schedule)?
    } else {
        build_power_blocks(&schedule)?
    };
    let available = seq.len();
    let n = match args.n {
        Some(n) => n,
        None => u64::try_from(available.clone().min(BigUint::from(256u32))).expect("at most 256"),
    };
    let records = orbit(&x, &seq, n)?;
    let csv = orbit_csv(&records);
    if let Some(path) = &args.records_csv {
        fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    let diag = if records.is_empty() {
        Value::Null
    } else {
        diagnostics(&records, args.resolution)?.to_json(EXACT_OUTPUT_BITS)
    };
    let ef = ef_partial_sum(&view, &seq, Some(n))?;
    let separation = match separation_bound_check(&view, &schedule, None) {
        Ok(r) => r.to_json(),
        Err(e @ (Error::NotInRequiredSet | Error::ShiftCondition { .. })) => json!({"skipped": e.to_string()}),
        Err(e) => return Err(e.into()),
    };
    let ip_density = if args.h_max == 0 {
        Value::Array(Vec::new())
    } else {
        ip_density_condition(&view, &schedule, args.h_max, None)?
            .iter()
            .map(|row| {
                json!({
                    "h": row.h,
                    "partial_sum": row.partial_sum.exact_string(EXACT_OUTPUT_BITS),
                    "decimal": row.partial_sum.to_f64(),
                    "below_one": row.below_one,
                })
            })
            .collect()
    };
    let json = json!({
        "sequence": seq.kind(),
        "available_terms": count_json(&available),
        "terms": n,
        "x": point_json(&x),
        "diagnostics": diag,
        "ef_partial_sum": {
            "exact": ef.exact_string(EXACT_OUTPUT_BITS),
            "decimal": ef.to_f64(),
            "below_one": ef.lt_one(),
        },
        "separation": separation,
        "ip_density": ip_density,
    });
    Ok(Output::new(json, csv))
}

fn ip_cmd(args: &IpArgs) -> Result<Output> {
    let gens = if args.generators.is_empty() {
        match DilationSequence::ip_from_schedule(&args.schedule.load()?)? {
            DilationSequence::Ip(p) => p,
            _ => unreachable!("ip_from_schedule builds an IP-sequence"),
        }
    } else {
        IpGenerators::integers(args.generators.clone())?
    };
    let x = args.x.as_deref().map(parse_point).transpose()?;
    let mut rows = Vec::new();
    let mut csv = String::from("l,value,exponent_list");
    csv.push_str(if x.is_some() { ",orbit_value\n" } else { "\n" });
    for l in &args.l {
        let term = ip_term(&gens, l)?;
        let exps: Vec<String> = term.exponent_list().iter().map(u64::to_string).collect();
        let value = term.value();
        let mut row = json!({"l": l.to_string(), "value": value.to_string(), "exponents": exps.join(";")});
        csv.push_str(&format!("{l},{value},{}", exps.join(";")));
        if let Some(x) = &x {
            let v = term.apply(x);
            row["orbit_value"] = point_json(&v);
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
        rows.push(row);
    }
    Ok(Output::new(json!({"generators": gens.len(), "terms": rows}), csv))
}

fn report(args: &ReportArgs) -> Result<Output> {
    let schedule = args.schedule.load()?;
    let free = DigitSet::new(SetKind::FreeBlocks, schedule.clone())?;
    let tied = DigitSet::new(SetKind::TiedBlocks, schedule)?;
    let free_report = dimension_report(&free, None, args.n_max)?;
    let tied_report = dimension_report(&tied, None, args.n_max)?;
    let m = BlockMeasure::for_set(&free);
    let d = free_report.d1.value.clone();
    let mut csv = String::from("kind,quantity,value,decimal\n");
    for (label, r) in [("free", &free_report), ("tied", &tied_report)] {
        for (q, e) in [("d1", &r.d1), ("d2", &r.d2), ("d1_tied", &r.d1_tied), ("d2_tied", &r.d2_tied)] {
            csv.push_str(&format!("{label},{q},{},{:.6}\n", format_ratio(&e.value), ratio_to_f64(&e.value)));
        }
    }
    let holder = if d > BigRational::from_integer(0.into()) {
        let eps = default_eps(&d, &free_report.d1.window_min);
        let depth = args.holder_depth.min(free.max_depth());
        holder_check(&m, &d, &eps, depth, DEFAULT_ENUMERATION_CAP_LOG2)?.to_json()
    } else {
        json!({"skipped": "d1 is 0"})
    };
    let json = json!({
        "free": free_report.to_json(),
        "tied": tied_report.to_json(),
        "holder": holder,
        "all_pass": free_report.all_pass() && tied_report.all_pass(),
    });
    Ok(Output::new(json, csv))
}

fn run(cli: &Cli) -> Result<()> {
    let seed = effective_seed(cli.seed)?;
    let out = match &cli.command {
        Command::Synth(a) => synth(a)?,
        Command::Dims(a) => dims(a, seed)?,
        Command::Cover(a) => cover(a)?,
        Command::Measure(a) => measure(a)?,
        Command::Holder(a) => holder(a)?,
        Command::Orbit(a) => orbit_cmd(a, seed)?,
        Command::Ip(a) => ip_cmd(a)?,
        Command::Report(a) => report(a)?,
    };
    out.emit(cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
