use std::fmt;

use thiserror::Error;

/// Position of an offending row in a log file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line number in a CSV file.
    Line(usize),
    /// 0-based index into the `rows` array of a JSON file.
    Row(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Row(n) => write!(f, "row {n}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed log at {at}: {message}")]
    Malformed { at: Location, message: String },

    #[error("accuracy out of range at {at}: {value} is not in [0, 1]")]
    AccuracyOutOfRange { at: Location, value: f64 },

    #[error("invalid effective epoch at {at}: {value}")]
    InvalidEpoch { at: Location, value: f64 },

    #[error("unknown split {value:?} at {at}")]
    UnknownSplit { at: Location, value: String },

    #[error("duplicate row at {at}: {method} seed {seed} {split} epoch {epoch}")]
    DuplicateRow {
        at: Location,
        method: String,
        seed: u64,
        split: String,
        epoch: f64,
    },

    #[error("baseline method {0:?} not present in log")]
    MissingBaseline(String),

    #[error("baseline {method} seed {seed} is missing mandatory split {split}")]
    MissingBaselineSplit { method: String, seed: u64, split: String },

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("{method} seed {seed} has no {split} curve")]
    MissingSplit { method: String, seed: u64, split: String },

    #[error("no baseline seed pairs with {method} seed {seed}")]
    MissingPairedSeed { method: String, seed: u64 },

    #[error("checkpoint not evaluated on split {split}: epoch {epoch} is not on the curve grid")]
    CheckpointNotEvaluated { split: String, epoch: f64 },

    #[error("empty accuracy curve")]
    EmptyCurve,

    #[error("curve epochs must be strictly increasing (epoch {0} repeats or goes backwards)")]
    UnorderedCurve(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("truncated CIFAR record {index}: {len} trailing bytes, expected 3074 per record")]
    TruncatedRecord { index: usize, len: usize },

    #[error("CIFAR record {index} has labels out of range (coarse {coarse}, fine {fine})")]
    LabelOutOfRange { index: usize, coarse: u8, fine: u8 },

    #[error("invalid benchmark plan: {0}")]
    InvalidPlan(String),

    #[error("plan references coarse label {0} which has no records")]
    AbsentSuperclass(u8),

    #[error("AD grids disagree on their threshold lists")]
    MismatchedGrid,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{method} seed {seed}: no shared epochs with the baseline for {panel}")]
    EmptyIntersection {
        method: String,
        seed: u64,
        panel: &'static str,
    },

    #[error("invalid synthetic curve spec: {0}")]
    InvalidSynthSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
