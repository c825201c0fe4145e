use thiserror::Error;

/// Errors raised by the dimlab library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mantissa does not fit in {depth} binary digits")]
    MantissaOutOfRange { depth: u64 },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("dilation factor must be a positive integer")]
    ZeroDilation,

    #[error("schedule vectors must be non-empty and of equal length (a has {a}, b has {b})")]
    ScheduleShape { a: usize, b: usize },

    #[error("schedule must start at a[1] = 0, found {found}")]
    FirstBlockNotAtZero { found: String },

    #[error("schedule interleaving broken: {violation}")]
    Interleaving { violation: String },

    #[error("schedule entry {value} is not a non-negative integer")]
    NonInteger { value: String },

    #[error("schedule entry {value} does not fit a 64-bit digit position")]
    ScheduleTooDeep { value: String },

    #[error("shifted schedule violates a[i] + i < b[i] at block {block}")]
    ShiftCondition { block: usize },

    #[error("need at least {needed} blocks, schedule has {found}")]
    TooFewBlocks { needed: usize, found: usize },

    #[error("target dimension {d} outside [0, 1]")]
    DimensionOutOfRange { d: String },

    #[error("depth {depth} is beyond the schedule prefix (last free block ends at {limit})")]
    DepthBeyondSchedule { depth: u64, limit: u64 },

    #[error("block index {k} outside 1..={max}")]
    BlockOutOfRange { k: usize, max: usize },

    #[error("enumeration of 2^{log2_size} items refused (cap is 2^{log2_cap})")]
    EnumerationTooLarge { log2_size: u64, log2_cap: u64 },

    #[error("depth {depth} exceeds the exhaustive limit {limit}")]
    ExhaustiveLimit { depth: u64, limit: u64 },

    #[error("atom index {index} out of range at depth {depth}")]
    AtomOutOfRange { index: String, depth: u64 },

    #[error("invalid Hölder parameters: need 0 < eps < d <= 1 (d = {d}, eps = {eps})")]
    HolderParameters { d: String, eps: String },

    #[error("IP index {index} outside 1..2^{generators}")]
    IpIndexOutOfRange { index: String, generators: usize },

    #[error("sequence has {available} terms, {requested} requested")]
    NotEnoughTerms { available: String, requested: u64 },

    #[error("point is not in the set required for this check")]
    NotInRequiredSet,

    #[error("empty input: {what}")]
    Empty { what: &'static str },

    #[error("resolution {m} outside 1..=24")]
    Resolution { m: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
