//! Ranks for scalar and vector samples.
//!
//! Ties are broken uniformly at random by a stream seeded from the caller's
//! tie seed and the ranked values themselves. Without a seed, tied values
//! keep their input order. Either way the output is a permutation of `1..=n`
//! and is fully determined by `(values, seed)`.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// `n` paired observations of two real scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        check_len(x.len())?;
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same sample with the roles of x and y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

/// `n` observations of a `p`-vector paired with a `q`-vector, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSample {
    n: usize,
    p: usize,
    q: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl MultiSample {
    pub fn from_rows(x_rows: &[Vec<f64>], y_rows: &[Vec<f64>]) -> Result<Self> {
        if x_rows.len() != y_rows.len() {
            return Err(Error::LengthMismatch {
                x: x_rows.len(),
                y: y_rows.len(),
            });
        }
        let p = x_rows.first().map_or(0, Vec::len);
        let q = y_rows.first().map_or(0, Vec::len);
        let x = flatten(x_rows, p)?;
        let y = flatten(y_rows, q)?;
        Self::from_flat(x_rows.len(), p, q, x, y)
    }

    pub fn from_flat(n: usize, p: usize, q: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_len(n)?;
        if p == 0 || q == 0 {
            return Err(Error::EmptyDimension);
        }
        if x.len() != n * p || y.len() != n * q {
            return Err(Error::LengthMismatch {
                x: x.len() / p,
                y: y.len() / q,
            });
        }
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(Self { n, p, q, x, y })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn y_row(&self, i: usize) -> &[f64] {
        &self.y[i * self.q..(i + 1) * self.q]
    }

    pub fn x_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.p)
    }

    pub fn y_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.y.chunks_exact(self.q)
    }

    pub fn swapped(&self) -> Self {
        Self {
            n: self.n,
            p: self.q,
            q: self.p,
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

fn flatten(rows: &[Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rows.len() * dim);
    for (row, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::RaggedRows {
                row,
                expected: dim,
                found: r.len(),
            });
        }
        out.extend_from_slice(r);
    }
    Ok(out)
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            got: n,
        });
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Ranks `values` as a permutation of `1..=n`.
///
/// For distinct values `r_i = #{k : v_k <= v_i}`.
pub fn rank_vector(values: &[f64], tie_seed: Option<u64>) -> Result<Vec<usize>> {
    check_len(values.len())?;
    check_finite(values)?;
    let seed = tie_seed.map(|s| seed::fold_words(s, values.iter().map(|v| (v + 0.0).to_bits())));
    // values are finite, so partial_cmp never fails; -0.0 and 0.0 tie.
    Ok(rank_by(values, |a, b| a.partial_cmp(b).unwrap(), seed))
}

/// Ranks any totally ordered keys. `stream_seed` is used as-is for the tie
/// shuffle.
pub(crate) fn rank_by<T, F>(values: &[T], mut cmp: F, stream_seed: Option<u64>) -> Vec<usize>
where
    F: FnMut(&T, &T) -> Ordering,
{
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&values[a], &values[b]));

    if let Some(s) = stream_seed {
        let mut rng: Option<ChaCha8Rng> = None;
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && cmp(&values[order[start]], &values[order[end]]) == Ordering::Equal {
                end += 1;
            }
            if end - start > 1 {
                let rng = rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(s));
                order[start..end].shuffle(rng);
            }
            start = end;
        }
    }

    let mut ranks = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        ranks[i] = k + 1;
    }
    ranks
}

/// Inverse of a permutation of `1..=n`.
pub fn inverse_permutation(ranks: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; ranks.len()];
    for (i, &r) in ranks.iter().enumerate() {
        inv[r - 1] = i + 1;
    }
    inv
}

pub fn is_permutation(ranks: &[usize]) -> bool {
    let n = ranks.len();
    let mut seen = vec![false; n];
    for &r in ranks {
        if r == 0 || r > n || seen[r - 1] {
            return false;
        }
        seen[r - 1] = true;
    }
    true
}

/// Ranks of a paired sample, including the concomitant ranks: `R_i` is the
/// y-rank of the observation holding the i-th smallest x.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    concomitant: Vec<usize>,
    x_ranks: Vec<usize>,
    y_ranks: Vec<usize>,
    tie_seed: Option<u64>,
}

impl RankProfile {
    /// Builds a profile from x- and y-ranks (both permutations of `1..=n`).
    pub fn from_ranks(x_ranks: Vec<usize>, y_ranks: Vec<usize>) -> Result<Self> {
        if x_ranks.len() != y_ranks.len() {
            return Err(Error::LengthMismatch {
                x: x_ranks.len(),
                y: y_ranks.len(),
            });
        }
        check_len(x_ranks.len())?;
        if !is_permutation(&x_ranks) || !is_permutation(&y_ranks) {
            return Err(Error::NotAPermutation { n: x_ranks.len() });
        }
        let mut concomitant = vec![0; x_ranks.len()];
        for (&rx, &ry) in x_ranks.iter().zip(&y_ranks) {
            concomitant[rx - 1] = ry;
        }
        Ok(Self {
            concomitant,
            x_ranks,
            y_ranks,
            tie_seed: None,
        })
    }

    /// Profile whose x is already sorted, i.e. `x_ranks = 1..=n`.
    pub fn from_concomitant(concomitant: Vec<usize>) -> Result<Self> {
        let n = concomitant.len();
        Self::from_ranks((1..=n).collect(), concomitant)
    }

    pub fn len(&self) -> usize {
        self.concomitant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concomitant.is_empty()
    }

    pub fn concomitant(&self) -> &[usize] {
        &self.concomitant
    }

    pub fn x_ranks(&self) -> &[usize] {
        &self.x_ranks
    }

    pub fn y_ranks(&self) -> &[usize] {
        &self.y_ranks
    }

    pub fn tie_seed(&self) -> Option<u64> {
        self.tie_seed
    }

    /// Profile of `(y, x)`. Its concomitant ranks are the inverse permutation.
    pub fn swapped(&self) -> Self {
        Self {
            concomitant: inverse_permutation(&self.concomitant),
            x_ranks: self.y_ranks.clone(),
            y_ranks: self.x_ranks.clone(),
            tie_seed: self.tie_seed,
        }
    }
}

pub fn concomitant_profile(sample: &PairedSample, tie_seed: Option<u64>) -> Result<RankProfile> {
    let x_ranks = rank_vector(sample.x(), tie_seed)?;
    let y_ranks = rank_vector(sample.y(), tie_seed)?;
    let mut profile = RankProfile::from_ranks(x_ranks, y_ranks)?;
    profile.tie_seed = tie_seed;
    Ok(profile)
}

/// Componentwise `a <= b`.
#[inline]
pub fn dominated(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(u, v)| u <= v)
}

/// Dominance counts of a multivariate sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRankProfile {
    pub rx: Vec<usize>,
    pub ry: Vec<usize>,
    pub rxy: Vec<usize>,
    pub sum_x: u64,
    pub sum_y: u64,
    pub sum_xy: u64,
    pub self_inclusion: bool,
}

impl MultiRankProfile {
    pub fn len(&self) -> usize {
        self.rx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rx.is_empty()
    }

    pub(crate) fn from_counts(
        rx: Vec<usize>,
        ry: Vec<usize>,
        rxy: Vec<usize>,
        self_inclusion: bool,
    ) -> Self {
        let sum = |v: &[usize]| v.iter().map(|&c| c as u64).sum();
        Self {
            sum_x: sum(&rx),
            sum_y: sum(&ry),
            sum_xy: sum(&rxy),
            rx,
            ry,
            rxy,
            self_inclusion,
        }
    }
}

/// `rX_i = #{j : X_j <= X_i}` componentwise, likewise `rY_i`, and the joint
/// count `rXY_i`. The pair `j = i` is counted only when `self_inclusion`.
pub fn multivariate_ranks(sample: &MultiSample, self_inclusion: bool) -> MultiRankProfile {
    let n = sample.len();
    let mut rx = vec![0; n];
    let mut ry = vec![0; n];
    let mut rxy = vec![0; n];
    for i in 0..n {
        let (xi, yi) = (sample.x_row(i), sample.y_row(i));
        for j in 0..n {
            if j == i && !self_inclusion {
                continue;
            }
            let dx = dominated(sample.x_row(j), xi);
            let dy = dominated(sample.y_row(j), yi);
            rx[i] += dx as usize;
            ry[i] += dy as usize;
            rxy[i] += (dx && dy) as usize;
        }
    }
    MultiRankProfile::from_counts(rx, ry, rxy, self_inclusion)
}
