pub mod boxlab;
pub mod dilation;
pub mod digitsets;
pub mod error;
pub mod massdist;
pub mod numerics;
pub mod schedule;

pub use error::{Error, Result};
pub use numerics::{DigitView, Dyadic, DyadicPoint, ExactDistance};
pub use schedule::{synthesize, BlockSchedule, ProfileKind, RatioProfile, SynthesizedSchedule};
pub use digitsets::{CoverAtom, CoverCount, CoverKind, DigitSet, Membership, SetKind};
pub use boxlab::{CountProfile, DimensionReport};
pub use massdist::{BlockMeasure, MeasureKind};
pub use dilation::{build_power_blocks, ip_term, DilationSequence, OrbitRecord, OrbitSum, Term};
