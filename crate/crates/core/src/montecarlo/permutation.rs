//! Permutation engine.
//!
//! Permutation `b` of a plan is drawn from ChaCha8 stream `b` under the
//! plan's master seed, so replicate `b` is the same no matter which worker
//! computes it or how many workers there are.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `B` random relabelings of the y-part, one-sided in the upper tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    permutations: usize,
    master_seed: u64,
}

impl PermutationPlan {
    pub const MIN_PERMUTATIONS: usize = 100;

    pub fn new(permutations: usize, master_seed: u64) -> Result<Self> {
        if permutations < Self::MIN_PERMUTATIONS {
            return Err(Error::Underpowered {
                requested: permutations,
                minimum: Self::MIN_PERMUTATIONS,
            });
        }
        Ok(Self {
            permutations,
            master_seed,
        })
    }

    pub fn permutations(&self) -> usize {
        self.permutations
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Permutation `b` of `0..n`.
    pub fn permutation(&self, b: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(b as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        perm
    }
}

/// Evaluates `f` on each of the plan's permutations, in permutation order.
pub fn replicates<T, F>(n: usize, plan: &PermutationPlan, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> T + Sync,
{
    (0..plan.permutations)
        .into_par_iter()
        .with_min_len(16)
        .map(|b| f(&plan.permutation(b, n)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub observed: f64,
    pub p_value: f64,
    /// Sample standard deviation of the defined replicates.
    pub null_sd: f64,
    pub valid: usize,
    pub undefined: usize,
}

/// Replicates at or above `observed`, allowing for rounding in the last few
/// ulps.
pub fn exceedances<'a, I: IntoIterator<Item = &'a f64>>(observed: f64, reps: I) -> usize {
    let cut = observed - 1e-12 * observed.abs().max(1.0);
    reps.into_iter().filter(|&&r| r >= cut).count()
}

/// `(1 + #{replicates >= observed}) / (B + 1)`.
pub fn add_one_pvalue(observed: f64, reps: &[f64]) -> f64 {
    (1 + exceedances(observed, reps)) as f64 / (reps.len() + 1) as f64
}

pub fn sample_sd(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (m - 1) as f64).sqrt()
}

/// Drops undefined replicates, failing once they make up 10% or more.
pub fn defined_replicates(reps: Vec<Option<f64>>) -> Result<(Vec<f64>, usize)> {
    let total = reps.len();
    let defined: Vec<f64> = reps.into_iter().flatten().collect();
    let undefined = total - defined.len();
    if undefined * 10 >= total && undefined > 0 {
        return Err(Error::DegeneratePermutations { undefined, total });
    }
    Ok((defined, undefined))
}

/// Permutation p-value of a scalar statistic. `statistic(perm)` must
/// evaluate the statistic with y-row `i` replaced by y-row `perm[i]`, and
/// return `None` where it is undefined. The identity permutation gives the
/// observed value.
pub fn permutation_pvalue<F>(
    n: usize,
    plan: &PermutationPlan,
    statistic: F,
) -> Result<PermutationResult>
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    let identity: Vec<usize> = (0..n).collect();
    let observed =
        statistic(&identity).ok_or(Error::Undefined("statistic undefined on observed data"))?;
    let (reps, undefined) = defined_replicates(replicates(n, plan, &statistic))?;
    Ok(PermutationResult {
        observed,
        p_value: add_one_pvalue(observed, &reps),
        null_sd: sample_sd(&reps),
        valid: reps.len(),
        undefined,
    })
}
