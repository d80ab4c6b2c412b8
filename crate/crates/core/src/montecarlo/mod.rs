//! Permutation inference and simulation studies.

pub mod experiment;
pub mod permutation;
pub mod scenario;

pub use experiment::{
    null_scatter, run_power, run_size, ExperimentConfig, ExperimentReport, NullScatter,
    ScatterPair, TestRate, TestSpec,
};
pub use permutation::{permutation_pvalue, PermutationPlan, PermutationResult};
pub use scenario::{generate, generate_multi, generate_paired, Sample, ScenarioId, ScenarioSpec};
