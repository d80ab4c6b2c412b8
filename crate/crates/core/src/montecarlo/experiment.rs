//! Size, power and null-scatter experiments.
//!
//! Replicate `r` draws its data, tie-breaking and permutations from seeds
//! derived from `(seed, r)` alone, and results are collected in replicate
//! order, so a report does not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::permutation::PermutationPlan;
use super::scenario::{self, generate, generate_multi, Sample, ScenarioId, ScenarioSpec};
use crate::combined::{self, Method, Scales, Standardization};
use crate::error::{Error, Result};
use crate::mvstat::{self, BorelConfig, BorelPair, MvKind, MvMode, MvOptions, SignCoding};
use crate::ranks::{self, MultiSample, PairedSample};
use crate::seed::{
    self,
    label::{DATA, PERMS, TIES},
};
use crate::unistat::RankStats;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_REPS: usize = 1000;
pub const MIN_SCATTER_REPS: usize = 100;
pub const DEFAULT_SCATTER_REPS: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 500;

/// A test as run inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestSpec {
    Univariate { method: Method },
    Multivariate { kind: MvKind, mode: MvMode },
}

impl TestSpec {
    pub fn name(&self) -> String {
        match self {
            TestSpec::Univariate { method } => method.name().to_string(),
            TestSpec::Multivariate { kind, mode } => format!("mv_{}_{}", kind.name(), mode.name()),
        }
    }

    /// Parses a univariate method name, or a multivariate one when `mode`
    /// is given.
    pub fn parse(name: &str, mode: Option<MvMode>) -> Result<Self> {
        Ok(match mode {
            None => TestSpec::Univariate {
                method: name.parse()?,
            },
            Some(mode) => TestSpec::Multivariate {
                kind: name.parse()?,
                mode,
            },
        })
    }
}

impl fmt::Display for TestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<Method> for TestSpec {
    fn from(method: Method) -> Self {
        TestSpec::Univariate { method }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Permutations per replicate for the permutation-based tests.
    pub permutations: usize,
    pub standardization: Standardization,
    pub fractional_bits: u32,
    pub sign_coding: SignCoding,
    pub self_inclusion: bool,
}

impl ExperimentConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self {
            reps,
            seed,
            alpha: DEFAULT_ALPHA,
            permutations: DEFAULT_PERMUTATIONS,
            standardization: Standardization::default(),
            fractional_bits: BorelConfig::DEFAULT_FRACTIONAL_BITS,
            sign_coding: SignCoding::default(),
            self_inclusion: false,
        }
    }

    fn validate(&self, tests: &[TestSpec]) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::TooFewReplications {
                requested: self.reps,
                minimum: MIN_REPS,
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if tests.is_empty() {
            return Err(Error::InvalidConfig("no tests requested".into()));
        }
        if tests.iter().any(uses_permutations) {
            PermutationPlan::new(self.permutations, 0)?;
        }
        Ok(())
    }
}

fn uses_permutations(t: &TestSpec) -> bool {
    matches!(t, TestSpec::Multivariate { mode, .. } if mode.uses_permutations())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRate {
    pub test: String,
    pub rejections: usize,
    /// Replicates on which the test was undefined; counted as non-rejections.
    pub undefined: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: ScenarioId,
    pub n: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub permutations: Option<usize>,
    pub standardization: Standardization,
    pub tests: Vec<TestSpec>,
    pub rates: Vec<TestRate>,
}

impl ExperimentReport {
    pub fn rate(&self, test: &TestSpec) -> Option<&TestRate> {
        let name = test.name();
        self.rates.iter().find(|r| r.test == name)
    }
}

/// Empirical size under the null scenario matching the tests' dimension.
pub fn run_size(
    tests: &[TestSpec],
    n: usize,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let id = if tests
        .iter()
        .any(|t| matches!(t, TestSpec::Multivariate { .. }))
    {
        ScenarioId::NullMv
    } else {
        ScenarioId::NullUni
    };
    run_power(tests, &ScenarioSpec::new(id, n)?, config)
}

/// Rejection rates of `tests` on data drawn from `spec`.
pub fn run_power(
    tests: &[TestSpec],
    spec: &ScenarioSpec,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.validate(tests)?;
    let has_uni = tests
        .iter()
        .any(|t| matches!(t, TestSpec::Univariate { .. }));
    if has_uni && spec.id.is_multivariate() {
        return Err(Error::Incompatible {
            test: "univariate".into(),
            scenario: spec.id.name().into(),
        });
    }
    let scales = Scales::new(config.standardization, spec.n)?;
    let modes: Vec<MvMode> = MvMode::ALL
        .into_iter()
        .filter(|m| {
            tests
                .iter()
                .any(|t| matches!(t, TestSpec::Multivariate { mode, .. } if mode == m))
        })
        .collect();

    let outcomes: Vec<Vec<Option<bool>>> = (0..config.reps)
        .into_par_iter()
        .map(|r| replicate(tests, spec, config, &scales, &modes, r as u64))
        .collect();

    let rates = tests
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let rejections = outcomes.iter().filter(|o| o[j] == Some(true)).count();
            let undefined = outcomes.iter().filter(|o| o[j].is_none()).count();
            let rate = rejections as f64 / config.reps as f64;
            TestRate {
                test: t.name(),
                rejections,
                undefined,
                rate,
                mc_se: (rate * (1.0 - rate) / config.reps as f64).sqrt(),
            }
        })
        .collect();

    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        scenario: spec.id,
        n: spec.n,
        reps: config.reps,
        alpha: config.alpha,
        seed: config.seed,
        permutations: tests
            .iter()
            .any(uses_permutations)
            .then_some(config.permutations),
        standardization: config.standardization,
        tests: tests.to_vec(),
        rates,
    })
}

fn replicate(
    tests: &[TestSpec],
    spec: &ScenarioSpec,
    config: &ExperimentConfig,
    scales: &Scales,
    modes: &[MvMode],
    r: u64,
) -> Vec<Option<bool>> {
    let rep_seed = seed::derive(config.seed, r);
    let tie_seed = seed::derive(rep_seed, TIES);
    let reject = |p: f64| p <= config.alpha;

    let uni_stats = match generate(spec, seed::derive(rep_seed, DATA)) {
        Ok(Sample::Paired(s)) => ranks::concomitant_profile(&s, Some(tie_seed))
            .ok()
            .map(|p| RankStats::from_profile(&p)),
        _ => None,
    };

    let mv_results: Vec<(MvMode, Option<Vec<f64>>)> = if modes.is_empty() {
        Vec::new()
    } else {
        let sample = generate_multi(spec, seed::derive(rep_seed, DATA));
        modes
            .iter()
            .map(|&mode| {
                let ps = sample.as_ref().ok().and_then(|s| {
                    let plan =
                        PermutationPlan::new(config.permutations, seed::derive(rep_seed, PERMS))
                            .ok()?;
                    let opts = MvOptions {
                        plan,
                        fractional_bits: config.fractional_bits,
                        sign_coding: config.sign_coding,
                        self_inclusion: config.self_inclusion,
                        tie_seed: Some(tie_seed),
                    };
                    mvstat::mv_suite(s, mode, &opts)
                        .ok()
                        .map(|outs| outs.into_iter().map(|o| o.p_value).collect())
                });
                (mode, ps)
            })
            .collect()
    };

    tests
        .iter()
        .map(|t| match t {
            TestSpec::Univariate { method } => uni_stats
                .as_ref()
                .map(|s| reject(combined::score(*method, s, scales).2)),
            TestSpec::Multivariate { kind, mode } => {
                let idx = MvKind::ALL
                    .iter()
                    .position(|k| k == kind)
                    .expect("listed kind");
                mv_results
                    .iter()
                    .find(|(m, _)| m == mode)
                    .and_then(|(_, ps)| ps.as_ref())
                    .map(|ps| reject(ps[idx]))
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Null scatter

/// Pairs of statistics recorded under independence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterPair {
    /// Kendall's tau against xi.
    KendallXi,
    QuadrantXi,
    SpearmanXi,
    /// Multivariate Spearman (dominance counts) against xi of merged data.
    GrotheSpearmanXi,
    GrotheKendallXi,
}

impl ScatterPair {
    pub const ALL: [ScatterPair; 5] = [
        ScatterPair::KendallXi,
        ScatterPair::QuadrantXi,
        ScatterPair::SpearmanXi,
        ScatterPair::GrotheSpearmanXi,
        ScatterPair::GrotheKendallXi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScatterPair::KendallXi => "kendall_xi",
            ScatterPair::QuadrantXi => "quadrant_xi",
            ScatterPair::SpearmanXi => "spearman_xi",
            ScatterPair::GrotheSpearmanXi => "grothe_spearman_xi",
            ScatterPair::GrotheKendallXi => "grothe_kendall_xi",
        }
    }

    /// Column names of the two statistics.
    pub fn columns(self) -> (&'static str, &'static str) {
        match self {
            ScatterPair::KendallXi => ("kendall", "xi"),
            ScatterPair::QuadrantXi => ("quadrant", "xi"),
            ScatterPair::SpearmanXi => ("spearman", "xi"),
            ScatterPair::GrotheSpearmanXi => ("grothe_spearman", "xi"),
            ScatterPair::GrotheKendallXi => ("grothe_kendall", "xi"),
        }
    }

    pub fn is_multivariate(self) -> bool {
        matches!(
            self,
            ScatterPair::GrotheSpearmanXi | ScatterPair::GrotheKendallXi
        )
    }
}

impl fmt::Display for ScatterPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScatterPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScatterPair::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "statistic pair",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullScatter {
    pub schema_version: u32,
    pub pair: ScatterPair,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Unscaled statistic values, one row per replicate.
    pub rows: Vec<(f64, f64)>,
}

/// Draws `reps` independent samples with `X ~ U[0, 1]` and `Y ~ N(0, 1)`
/// (three coordinates each for the multivariate pairs) and records both
/// statistics of `pair` on each.
pub fn null_scatter(pair: ScatterPair, n: usize, reps: usize, seed: u64) -> Result<NullScatter> {
    if reps < MIN_SCATTER_REPS {
        return Err(Error::TooFewReplications {
            requested: reps,
            minimum: MIN_SCATTER_REPS,
        });
    }
    if n < 3 {
        return Err(Error::TooFewObservations {
            required: 3,
            got: n,
        });
    }
    let rows = (0..reps)
        .into_par_iter()
        .map(|r| scatter_row(pair, n, seed::derive(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NullScatter {
        schema_version: SCHEMA_VERSION,
        pair,
        n,
        reps,
        seed,
        rows,
    })
}

fn scatter_row(pair: ScatterPair, n: usize, rep_seed: u64) -> Result<(f64, f64)> {
    let dim = if pair.is_multivariate() { 3 } else { 1 };
    let mut x = Vec::with_capacity(n * dim);
    let mut y = Vec::with_capacity(n * dim);
    for i in 0..n {
        let mut rng = seed::rng_for(seed::derive(rep_seed, DATA), i as u64);
        for _ in 0..dim {
            x.push(scenario::unit_uniform(&mut rng));
        }
        for _ in 0..dim {
            y.push(scenario::standard_normal(&mut rng));
        }
    }
    let tie_seed = Some(seed::derive(rep_seed, TIES));
    if pair.is_multivariate() {
        let sample = MultiSample::from_flat(n, dim, dim, x, y)?;
        let configs = BorelPair::fitted(
            &sample,
            BorelConfig::DEFAULT_FRACTIONAL_BITS,
            SignCoding::default(),
        )?;
        let xi = mvstat::borel_stat(&sample, mvstat::BorelStat::Xi, &configs, tie_seed)?.value;
        let kind = match pair {
            ScatterPair::GrotheSpearmanXi => mvstat::MvStatKind::GrotheSpearman,
            _ => mvstat::MvStatKind::GrotheTau,
        };
        Ok((mvstat::grothe_stat(&sample, kind, false)?.value, xi))
    } else {
        let profile = ranks::concomitant_profile(&PairedSample::new(x, y)?, tie_seed)?;
        let s = RankStats::from_profile(&profile);
        let a = match pair {
            ScatterPair::KendallXi => s.kendall,
            ScatterPair::QuadrantXi => s.quadrant,
            _ => s.spearman,
        };
        Ok((a, s.xi_xy))
    }
}

/// Pearson correlation of the two columns.
pub fn correlation(rows: &[(f64, f64)]) -> f64 {
    let m = rows.len() as f64;
    let (ma, mb) = rows
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / m, b + y / m));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(a, b) in rows {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    sab / (saa * sbb).sqrt()
}
