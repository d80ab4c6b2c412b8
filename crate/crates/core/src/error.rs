use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {required} observations, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: x has {x} observations, y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("ranks are not a permutation of 1..={n}")]
    NotAPermutation { n: usize },

    #[error("statistic undefined: {0}")]
    Undefined(&'static str),

    #[error("statistic undefined on {undefined} of {total} permutation replicates")]
    DegeneratePermutations { undefined: usize, total: usize },

    #[error("{requested} permutations is underpowered, at least {minimum} required")]
    Underpowered { requested: usize, minimum: usize },

    #[error("{requested} replications is too few, at least {minimum} required")]
    TooFewReplications { requested: usize, minimum: usize },

    #[error("|{value}| does not fit in {bits} integer bits")]
    MagnitudeOverflow { value: f64, bits: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("z must be non-negative, got {0}")]
    NegativeZ(f64),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{test} is not applicable to {scenario} data")]
    Incompatible { test: String, scenario: String },
}
