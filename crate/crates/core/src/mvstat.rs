//! Multivariate statistics: Grothe-style multivariate Spearman and Kendall
//! built from dominance counts, the binary-expansion merge that maps a
//! vector to one ordered scalar, and the combined multivariate tests.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combined::{self, Method, PSource, Scales, Standardization, TestOutcome};
use crate::error::{Error, Result};
use crate::montecarlo::permutation::{
    add_one_pvalue, defined_replicates, replicates, sample_sd, PermutationPlan,
};
use crate::ranks::{self, dominated, MultiRankProfile, MultiSample, RankProfile};
use crate::seed;
use crate::unistat::RankStats;

// ---------------------------------------------------------------------------
// Grothe statistics

fn check_profile(profile: &MultiRankProfile) -> Result<usize> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::TooFewObservations {
            required: 3,
            got: n,
        });
    }
    Ok(n)
}

/// Sufficient sums for both Grothe statistics.
#[derive(Debug, Clone, Copy)]
struct GrotheSums {
    n: i128,
    rx: i128,
    ry: i128,
    rxy: i128,
    /// `sum_i rX_i rY_i`
    cross: i128,
    /// `sum_i rX_i (rX_i - 1)`
    x_pairs: i128,
    y_pairs: i128,
}

impl GrotheSums {
    fn from_profile(p: &MultiRankProfile) -> Self {
        let pairs = |v: &[usize]| v.iter().map(|&r| (r * r.saturating_sub(1)) as i128).sum();
        Self {
            n: p.len() as i128,
            rx: p.sum_x as i128,
            ry: p.sum_y as i128,
            rxy: p.sum_xy as i128,
            cross: p.rx.iter().zip(&p.ry).map(|(&a, &b)| (a * b) as i128).sum(),
            x_pairs: pairs(&p.rx),
            y_pairs: pairs(&p.ry),
        }
    }

    fn tau(&self) -> Result<f64> {
        let m = self.n * (self.n - 1);
        let num = m * self.rxy - self.rx * self.ry;
        let (a, b, c, d) = (
            self.rx as f64,
            self.ry as f64,
            (m - self.rx) as f64,
            (m - self.ry) as f64,
        );
        if a <= 0.0 || b <= 0.0 || c <= 0.0 || d <= 0.0 {
            return Err(Error::Undefined(
                "degenerate dominance counts in multivariate tau",
            ));
        }
        Ok(num as f64 / ((a * b).sqrt() * (c * d).sqrt()))
    }

    // Every term is scaled by n^2 (n-1)^2 (n-2), which keeps them integral.
    fn spearman(&self) -> Result<f64> {
        let n = self.n;
        let m = n * (n - 1);
        let sxy = m * (self.cross - self.rxy) - (n - 2) * self.rx * self.ry;
        let sx = m * self.x_pairs - (n - 2) * self.rx * self.rx;
        let sy = m * self.y_pairs - (n - 2) * self.ry * self.ry;
        if sx <= 0 || sy <= 0 {
            return Err(Error::Undefined(
                "non-positive variance term in multivariate Spearman",
            ));
        }
        Ok(sxy as f64 / ((sx as f64).sqrt() * (sy as f64).sqrt()))
    }
}

/// Multivariate Kendall's tau,
/// `[n(n-1) R^XY - R^X R^Y] / sqrt(R^X R^Y [n(n-1) - R^X][n(n-1) - R^Y])`.
pub fn grothe_tau(profile: &MultiRankProfile) -> Result<f64> {
    check_profile(profile)?;
    GrotheSums::from_profile(profile).tau()
}

/// Multivariate Spearman's rho, `S_XY / sqrt(S_X S_Y)` with
///
/// ```text
/// S_XY = sum rX_i rY_i / (n(n-1)(n-2)) - R^X R^Y / (n^2 (n-1)^2) - R^XY / (n(n-1)(n-2))
/// S_X  = sum rX_i (rX_i - 1) / (n(n-1)(n-2)) - (R^X)^2 / (n^2 (n-1)^2)
/// ```
///
/// and `S_Y` likewise. These are the U-statistic estimates of
/// `Cov(F_X(X), F_Y(Y))` and `Var(F_X(X))`, `Var(F_Y(Y))`. Being a ratio of
/// unbiased estimates it is not confined to `[-1, 1]` on very small samples.
pub fn grothe_spearman(profile: &MultiRankProfile) -> Result<f64> {
    check_profile(profile)?;
    GrotheSums::from_profile(profile).spearman()
}

/// Dominance relations of a sample, kept so that relabelling the y-rows
/// only costs one pass over the joint counts.
#[derive(Debug, Clone)]
pub struct DominanceTable {
    n: usize,
    self_inclusion: bool,
    dx: Vec<bool>,
    dy: Vec<bool>,
    rx: Vec<usize>,
    ry: Vec<usize>,
}

impl DominanceTable {
    pub fn new(sample: &MultiSample, self_inclusion: bool) -> Self {
        let n = sample.len();
        let mut dx = vec![false; n * n];
        let mut dy = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j && !self_inclusion {
                    continue;
                }
                dx[i * n + j] = dominated(sample.x_row(j), sample.x_row(i));
                dy[i * n + j] = dominated(sample.y_row(j), sample.y_row(i));
            }
        }
        let count = |d: &[bool], i: usize| d[i * n..(i + 1) * n].iter().filter(|&&b| b).count();
        let rx = (0..n).map(|i| count(&dx, i)).collect();
        let ry = (0..n).map(|i| count(&dy, i)).collect();
        Self {
            n,
            self_inclusion,
            dx,
            dy,
            rx,
            ry,
        }
    }

    /// Dominance counts with y-row `i` replaced by y-row `perm[i]`.
    pub fn profile(&self, perm: &[usize]) -> MultiRankProfile {
        let n = self.n;
        let ry: Vec<usize> = perm.iter().map(|&k| self.ry[k]).collect();
        let rxy = (0..n)
            .map(|i| {
                let xrow = &self.dx[i * n..(i + 1) * n];
                let yrow = &self.dy[perm[i] * n..(perm[i] + 1) * n];
                xrow.iter()
                    .zip(perm)
                    .filter(|(&bx, &pj)| bx && yrow[pj])
                    .count()
            })
            .collect();
        MultiRankProfile::from_counts(self.rx.clone(), ry, rxy, self.self_inclusion)
    }
}

// ---------------------------------------------------------------------------
// Binary-expansion merge

/// Treatment of negative coordinates in the merge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCoding {
    /// Magnitude digits of negative coordinates are complemented, so that in
    /// one dimension the code is increasing in the value.
    #[default]
    OrderPreserving,
    /// Sign bit followed by the plain magnitude digits.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorelConfig {
    pub integer_bits: u32,
    pub fractional_bits: u32,
    pub dimension: usize,
    pub sign_coding: SignCoding,
}

impl BorelConfig {
    pub const DEFAULT_FRACTIONAL_BITS: u32 = 32;
    const MAX_BITS: usize = 1 << 16;

    pub fn new(integer_bits: u32, fractional_bits: u32, dimension: usize) -> Result<Self> {
        if integer_bits == 0 || fractional_bits == 0 {
            return Err(Error::InvalidConfig(
                "integer and fractional bit counts must be at least 1".into(),
            ));
        }
        if integer_bits > 1024 {
            return Err(Error::InvalidConfig("at most 1024 integer bits".into()));
        }
        if dimension == 0 {
            return Err(Error::EmptyDimension);
        }
        let cfg = Self {
            integer_bits,
            fractional_bits,
            dimension,
            sign_coding: SignCoding::default(),
        };
        if cfg.total_bits() > Self::MAX_BITS {
            return Err(Error::InvalidConfig(format!(
                "code width {} exceeds {} bits",
                cfg.total_bits(),
                Self::MAX_BITS
            )));
        }
        Ok(cfg)
    }

    pub fn with_sign_coding(mut self, coding: SignCoding) -> Self {
        self.sign_coding = coding;
        self
    }

    /// Smallest integer width that holds every `|value|` among `rows`.
    pub fn fitted<'a, I>(rows: I, dimension: usize, fractional_bits: u32) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let max = rows
            .into_iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs().floor()));
        let bits = if max < 1.0 {
            1
        } else {
            max.log2().floor() as u32 + 1
        };
        Self::new(bits.max(1), fractional_bits, dimension)
    }

    fn integer_width(&self) -> usize {
        1 + self.dimension * (1 + self.integer_bits as usize)
    }

    pub fn total_bits(&self) -> usize {
        self.integer_width() + self.dimension * self.fractional_bits as usize
    }
}

/// A merged code: the digit string `1 c_1..c_d a_11..a_dk . b_11..b_dB`,
/// kept exactly so that codes compare as the reals they denote.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BorelCode {
    words: Vec<u64>,
    integer_width: usize,
    len: usize,
}

impl Ord for BorelCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words.cmp(&other.words)
    }
}

impl PartialOrd for BorelCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl BorelCode {
    fn with_capacity(len: usize, integer_width: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            integer_width,
            len: 0,
        }
    }

    fn push(&mut self, bit: bool) {
        if bit {
            self.words[self.len / 64] |= 1 << (63 - self.len % 64);
        }
        self.len += 1;
    }

    pub fn bit(&self, k: usize) -> bool {
        self.words[k / 64] >> (63 - k % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The code read as a binary numeral. Lossy beyond 53 significant bits.
    pub fn to_f64(&self) -> f64 {
        (0..self.len)
            .filter(|&k| self.bit(k))
            .map(|k| 2f64.powi(self.integer_width as i32 - 1 - k as i32))
            .sum()
    }
}

/// Merges one row into a single ordered code.
pub fn borel_merge(row: &[f64], config: &BorelConfig) -> Result<BorelCode> {
    let d = config.dimension;
    if row.len() != d {
        return Err(Error::RaggedRows {
            row: 0,
            expected: d,
            found: row.len(),
        });
    }
    let k = config.integer_bits as usize;
    let b = config.fractional_bits as usize;
    let limit = 2f64.powi(config.integer_bits as i32);

    let mut signs = Vec::with_capacity(d);
    let mut int_digits = vec![false; d * k];
    let mut frac_digits = vec![false; d * b];
    for (i, &v) in row.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        let mag = v.abs();
        let whole = mag.floor();
        if whole >= limit {
            return Err(Error::MagnitudeOverflow {
                value: v,
                bits: config.integer_bits,
            });
        }
        let nonneg = v >= 0.0;
        let flip = !nonneg && config.sign_coding == SignCoding::OrderPreserving;
        signs.push(nonneg);
        for j in 0..k {
            // digit of weight 2^(k-1-j); scaling by powers of two is exact
            let digit = (whole / 2f64.powi((k - 1 - j) as i32)).floor() % 2.0 == 1.0;
            int_digits[j * d + i] = digit ^ flip;
        }
        let mut frac = mag - whole;
        for j in 0..b {
            frac *= 2.0;
            let digit = frac >= 1.0;
            if digit {
                frac -= 1.0;
            }
            frac_digits[j * d + i] = digit ^ flip;
        }
    }

    let mut code = BorelCode::with_capacity(config.total_bits(), config.integer_width());
    code.push(true);
    signs.into_iter().for_each(|c| code.push(c));
    int_digits.into_iter().for_each(|a| code.push(a));
    frac_digits.into_iter().for_each(|f| code.push(f));
    Ok(code)
}

/// Ranks of the merged rows.
pub fn borel_ranks<'a, I>(
    rows: I,
    config: &BorelConfig,
    tie_seed: Option<u64>,
) -> Result<Vec<usize>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let codes = rows
        .into_iter()
        .map(|r| borel_merge(r, config))
        .collect::<Result<Vec<_>>>()?;
    if codes.len() < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            got: codes.len(),
        });
    }
    let stream =
        tie_seed.map(|s| seed::fold_words(s, codes.iter().flat_map(|c| c.words.iter().copied())));
    Ok(ranks::rank_by(&codes, Ord::cmp, stream))
}

// ---------------------------------------------------------------------------
// Statistic values

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MvStatKind {
    GrotheTau,
    GrotheSpearman,
    BorelXi,
    BorelTau,
    BorelSpearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvStatValue {
    pub kind: MvStatKind,
    pub value: f64,
    /// Dominance-count convention; only meaningful for the Grothe kinds.
    pub self_inclusion: bool,
}

/// Univariate statistic applied to the merged rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorelStat {
    Xi,
    Spearman,
    Kendall,
}

/// Merge settings for a sample: integer widths fitted to X and Y separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BorelPair {
    pub x: BorelConfig,
    pub y: BorelConfig,
}

impl BorelPair {
    pub fn fitted(sample: &MultiSample, fractional_bits: u32, coding: SignCoding) -> Result<Self> {
        Ok(Self {
            x: BorelConfig::fitted(sample.x_rows(), sample.p(), fractional_bits)?
                .with_sign_coding(coding),
            y: BorelConfig::fitted(sample.y_rows(), sample.q(), fractional_bits)?
                .with_sign_coding(coding),
        })
    }
}

/// Rank profile of `(eta(X), eta(Y))`.
pub fn borel_profile(
    sample: &MultiSample,
    configs: &BorelPair,
    tie_seed: Option<u64>,
) -> Result<RankProfile> {
    let xr = borel_ranks(sample.x_rows(), &configs.x, tie_seed)?;
    let yr = borel_ranks(sample.y_rows(), &configs.y, tie_seed)?;
    RankProfile::from_ranks(xr, yr)
}

pub fn borel_stat(
    sample: &MultiSample,
    stat: BorelStat,
    configs: &BorelPair,
    tie_seed: Option<u64>,
) -> Result<MvStatValue> {
    let stats = RankStats::from_profile(&borel_profile(sample, configs, tie_seed)?);
    let (kind, value) = match stat {
        BorelStat::Xi => (MvStatKind::BorelXi, stats.xi_xy),
        BorelStat::Spearman => (MvStatKind::BorelSpearman, stats.spearman),
        BorelStat::Kendall => (MvStatKind::BorelTau, stats.kendall),
    };
    Ok(MvStatValue {
        kind,
        value,
        self_inclusion: false,
    })
}

pub fn grothe_stat(
    sample: &MultiSample,
    kind: MvStatKind,
    self_inclusion: bool,
) -> Result<MvStatValue> {
    let profile = ranks::multivariate_ranks(sample, self_inclusion);
    let value = match kind {
        MvStatKind::GrotheTau => grothe_tau(&profile)?,
        MvStatKind::GrotheSpearman => grothe_spearman(&profile)?,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "{kind:?} is not a dominance-count statistic"
            )))
        }
    };
    Ok(MvStatValue {
        kind,
        value,
        self_inclusion,
    })
}

// ---------------------------------------------------------------------------
// Tests

/// Multivariate tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MvKind {
    XiSym,
    Spearman,
    Kendall,
    CombinedSpearman,
    CombinedKendall,
}

impl MvKind {
    pub const ALL: [MvKind; 5] = [
        MvKind::XiSym,
        MvKind::Spearman,
        MvKind::Kendall,
        MvKind::CombinedSpearman,
        MvKind::CombinedKendall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MvKind::XiSym => "xisym",
            MvKind::Spearman => "spearman",
            MvKind::Kendall => "kendall",
            MvKind::CombinedSpearman => "cs",
            MvKind::CombinedKendall => "ck",
        }
    }

    /// Univariate counterpart used on merged data.
    pub fn univariate(self) -> Method {
        match self {
            MvKind::XiSym => Method::XiSym,
            MvKind::Spearman => Method::Spearman,
            MvKind::Kendall => Method::Kendall,
            MvKind::CombinedSpearman => Method::CombinedSpearman,
            MvKind::CombinedKendall => Method::CombinedKendall,
        }
    }
}

impl fmt::Display for MvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "multivariate method",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MvMode {
    /// Grothe statistics; sigma and p-value from permutations.
    #[default]
    GrothePermutation,
    /// Merged data with the univariate analytic p-values.
    BorelAnalytic,
    /// Merged data with permutation p-values.
    BorelPermutation,
}

impl MvMode {
    pub const ALL: [MvMode; 3] = [
        MvMode::GrothePermutation,
        MvMode::BorelAnalytic,
        MvMode::BorelPermutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MvMode::GrothePermutation => "grothe_permutation",
            MvMode::BorelAnalytic => "borel_analytic",
            MvMode::BorelPermutation => "borel_permutation",
        }
    }

    pub fn uses_permutations(self) -> bool {
        self != MvMode::BorelAnalytic
    }
}

impl fmt::Display for MvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MvMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "mode",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvOptions {
    pub plan: PermutationPlan,
    pub fractional_bits: u32,
    pub sign_coding: SignCoding,
    pub self_inclusion: bool,
    pub tie_seed: Option<u64>,
}

impl MvOptions {
    pub fn new(plan: PermutationPlan) -> Self {
        Self {
            plan,
            fractional_bits: BorelConfig::DEFAULT_FRACTIONAL_BITS,
            sign_coding: SignCoding::default(),
            self_inclusion: false,
            tie_seed: None,
        }
    }
}

/// One permutation replicate: the monotone Grothe statistics and both
/// directions of xi on merged data, or the full univariate set on merged data.
#[derive(Debug, Clone, Copy)]
struct Replicate {
    grothe_s: f64,
    grothe_tau: f64,
    merged: RankStats,
}

struct PreparedSample {
    n: usize,
    x_ranks: Vec<usize>,
    y_ranks: Vec<usize>,
    table: Option<DominanceTable>,
    sums_fixed: Option<GrotheSums>,
}

impl PreparedSample {
    fn new(sample: &MultiSample, opts: &MvOptions, grothe: bool) -> Result<Self> {
        let configs = BorelPair::fitted(sample, opts.fractional_bits, opts.sign_coding)?;
        let x_ranks = borel_ranks(sample.x_rows(), &configs.x, opts.tie_seed)?;
        let y_ranks = borel_ranks(sample.y_rows(), &configs.y, opts.tie_seed)?;
        let (table, sums_fixed) = if grothe {
            let table = DominanceTable::new(sample, opts.self_inclusion);
            let identity: Vec<usize> = (0..sample.len()).collect();
            let sums = GrotheSums::from_profile(&table.profile(&identity));
            // both statistics' denominators are invariant under relabelling
            sums.tau()?;
            sums.spearman()?;
            (Some(table), Some(sums))
        } else {
            (None, None)
        };
        Ok(Self {
            n: sample.len(),
            x_ranks,
            y_ranks,
            table,
            sums_fixed,
        })
    }

    fn merged_stats(&self, perm: &[usize]) -> RankStats {
        let mut conc = vec![0; self.n];
        for (i, &k) in perm.iter().enumerate() {
            conc[self.x_ranks[i] - 1] = self.y_ranks[k];
        }
        RankStats::from_concomitant(&conc)
    }

    fn replicate(&self, perm: &[usize]) -> Replicate {
        let merged = self.merged_stats(perm);
        let (grothe_s, grothe_tau) = match (&self.table, &self.sums_fixed) {
            (Some(table), Some(fixed)) => {
                let p = table.profile(perm);
                let sums = GrotheSums {
                    rxy: p.sum_xy as i128,
                    cross: p.rx.iter().zip(&p.ry).map(|(&a, &b)| (a * b) as i128).sum(),
                    ..*fixed
                };
                // denominators were checked on the identity and do not change
                (
                    sums.spearman().unwrap_or(f64::NAN),
                    sums.tau().unwrap_or(f64::NAN),
                )
            }
            _ => (f64::NAN, f64::NAN),
        };
        Replicate {
            grothe_s,
            grothe_tau,
            merged,
        }
    }
}

const SQRT_5_2: f64 = 1.581_138_830_084_189_8;

/// Runs every multivariate test kind in `mode` on one sample. In the
/// permutation modes all kinds share the same relabellings.
pub fn mv_suite(sample: &MultiSample, mode: MvMode, opts: &MvOptions) -> Result<Vec<TestOutcome>> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::TooFewObservations {
            required: 3,
            got: n,
        });
    }
    let prepared = PreparedSample::new(sample, opts, mode == MvMode::GrothePermutation)?;
    let identity: Vec<usize> = (0..n).collect();

    if mode == MvMode::BorelAnalytic {
        let stats = prepared.merged_stats(&identity);
        return MvKind::ALL
            .into_iter()
            .map(|kind| {
                let mut out =
                    combined::evaluate(kind.univariate(), &stats, Standardization::Asymptotic)?;
                out.method = format!("mv_{}_{}", kind.name(), mode.name());
                out.seed = opts.tie_seed;
                Ok(out)
            })
            .collect();
    }

    let observed = prepared.replicate(&identity);
    let reps = replicates(n, &opts.plan, |perm| prepared.replicate(perm));
    let sqrt_n = (n as f64).sqrt();

    match mode {
        MvMode::GrothePermutation => {
            let s_reps: Vec<f64> = reps.iter().map(|r| r.grothe_s).collect();
            let t_reps: Vec<f64> = reps.iter().map(|r| r.grothe_tau).collect();
            let (s_reps, _) = defined_replicates(s_reps.into_iter().map(finite).collect())?;
            let (t_reps, _) = defined_replicates(t_reps.into_iter().map(finite).collect())?;
            let sigma_s = sqrt_n * sample_sd(&s_reps);
            let sigma_t = sqrt_n * sample_sd(&t_reps);
            if sigma_s <= 0.0 || sigma_t <= 0.0 {
                return Err(Error::Undefined(
                    "monotone statistic constant under permutation",
                ));
            }
            let xi_part = |r: &Replicate| SQRT_5_2 * r.merged.xi_xy.max(r.merged.xi_yx);

            MvKind::ALL
                .into_iter()
                .map(|kind| {
                    let stat_of = |r: &Replicate| match kind {
                        MvKind::XiSym => xi_part(r),
                        MvKind::Spearman => r.grothe_s.abs(),
                        MvKind::Kendall => r.grothe_tau.abs(),
                        MvKind::CombinedSpearman => (r.grothe_s.abs() / sigma_s).max(xi_part(r)),
                        MvKind::CombinedKendall => (r.grothe_tau.abs() / sigma_t).max(xi_part(r)),
                    };
                    let sigma = match kind {
                        MvKind::CombinedSpearman => Some(sigma_s),
                        MvKind::CombinedKendall => Some(sigma_t),
                        _ => None,
                    };
                    let obs = stat_of(&observed);
                    let rep_vals: Vec<f64> =
                        reps.iter().map(stat_of).filter(|v| v.is_finite()).collect();
                    let mut components = std::collections::BTreeMap::new();
                    components.insert("scaled_xi_xy".to_string(), SQRT_5_2 * observed.merged.xi_xy);
                    components.insert("scaled_xi_yx".to_string(), SQRT_5_2 * observed.merged.xi_yx);
                    match kind {
                        MvKind::Spearman | MvKind::CombinedSpearman => {
                            components.insert("grothe_spearman".into(), observed.grothe_s);
                            components.insert(
                                "scaled_abs_spearman".into(),
                                observed.grothe_s.abs() / sigma_s,
                            );
                        }
                        MvKind::Kendall | MvKind::CombinedKendall => {
                            components.insert("grothe_tau".into(), observed.grothe_tau);
                            components.insert(
                                "scaled_abs_tau".into(),
                                observed.grothe_tau.abs() / sigma_t,
                            );
                        }
                        MvKind::XiSym => {}
                    }
                    Ok(TestOutcome {
                        method: format!("mv_{}_{}", kind.name(), mode.name()),
                        statistic: obs,
                        standardized: match kind {
                            MvKind::Spearman => sqrt_n * obs / sigma_s,
                            MvKind::Kendall => sqrt_n * obs / sigma_t,
                            _ => sqrt_n * obs,
                        },
                        p_value: add_one_pvalue(obs, &rep_vals),
                        p_source: PSource::Permutation,
                        n,
                        components,
                        seed: Some(opts.plan.master_seed()),
                        permutations: Some(rep_vals.len()),
                        sigma_hat: sigma,
                    })
                })
                .collect()
        }
        MvMode::BorelPermutation => {
            let scales = Scales::new(Standardization::Asymptotic, n)?;
            MvKind::ALL
                .into_iter()
                .map(|kind| {
                    let method = kind.univariate();
                    let two_sided = matches!(kind, MvKind::Spearman | MvKind::Kendall);
                    let z = |s: &RankStats| {
                        let z = combined::score(method, s, &scales).1;
                        if two_sided {
                            z.abs()
                        } else {
                            z
                        }
                    };
                    let obs = z(&observed.merged);
                    let rep_vals: Vec<f64> = reps.iter().map(|r| z(&r.merged)).collect();
                    let mut out =
                        combined::evaluate(method, &observed.merged, Standardization::Asymptotic)?;
                    out.method = format!("mv_{}_{}", kind.name(), mode.name());
                    out.p_value = add_one_pvalue(obs, &rep_vals);
                    out.p_source = PSource::Permutation;
                    out.seed = Some(opts.plan.master_seed());
                    out.permutations = Some(rep_vals.len());
                    Ok(out)
                })
                .collect()
        }
        MvMode::BorelAnalytic => unreachable!(),
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn mv_test(
    sample: &MultiSample,
    kind: MvKind,
    mode: MvMode,
    opts: &MvOptions,
) -> Result<TestOutcome> {
    let idx = MvKind::ALL.iter().position(|&k| k == kind).unwrap();
    Ok(mv_suite(sample, mode, opts)?.swap_remove(idx))
}

/// Combined multivariate test of the given monotone flavor.
pub fn mv_combined(
    sample: &MultiSample,
    flavor: combined::Flavor,
    mode: MvMode,
    opts: &MvOptions,
) -> Result<TestOutcome> {
    let kind = match flavor {
        combined::Flavor::Spearman => MvKind::CombinedSpearman,
        combined::Flavor::Kendall => MvKind::CombinedKendall,
        combined::Flavor::Quadrant => {
            return Err(Error::InvalidConfig("no multivariate quadrant test".into()))
        }
    };
    mv_test(sample, kind, mode, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::multivariate_ranks;
    use crate::unistat;

    fn one_dim(x: &[f64], y: &[f64]) -> MultiSample {
        let xr: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        let yr: Vec<Vec<f64>> = y.iter().map(|&v| vec![v]).collect();
        MultiSample::from_rows(&xr, &yr).unwrap()
    }

    #[test]
    fn grothe_tau_hand_values() {
        let s = one_dim(&[1., 2., 3.], &[1., 2., 3.]);
        assert_eq!(grothe_tau(&multivariate_ranks(&s, false)).unwrap(), 1.0);
        let s = one_dim(&[1., 2., 3.], &[-1., -2., -3.]);
        let m = multivariate_ranks(&s, false);
        assert_eq!((m.sum_x, m.sum_y, m.sum_xy), (3, 3, 0));
        assert_eq!(grothe_tau(&m).unwrap(), -1.0);
    }

    #[test]
    fn self_inclusion_breaks_comonotone_tau() {
        let s = one_dim(&[1., 2., 3.], &[1., 2., 3.]);
        // R = 6 each and n(n-1) = 6 collapses the denominator
        assert!(grothe_tau(&multivariate_ranks(&s, true)).is_err());
    }

    #[test]
    fn grothe_spearman_comonotone_is_one() {
        for n in [3usize, 10, 37, 100] {
            let x: Vec<f64> = (0..n)
                .map(|i| (i as f64 * 0.7).sin() * 10.0 + i as f64 * 100.0)
                .collect();
            let s = one_dim(&x, &x);
            let v = grothe_spearman(&multivariate_ranks(&s, false)).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "n = {n}: {v}");
        }
    }

    #[test]
    fn grothe_spearman_symmetric() {
        let xr: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 1.3).sin(), (i as f64 * 0.4).cos()])
            .collect();
        let yr: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 2.1).cos()]).collect();
        let a = MultiSample::from_rows(&xr, &yr).unwrap();
        let b = a.swapped();
        let va = grothe_spearman(&multivariate_ranks(&a, false)).unwrap();
        let vb = grothe_spearman(&multivariate_ranks(&b, false)).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn degenerate_profile_is_undefined() {
        // constant X: every row dominates every other
        let s = one_dim(&[1., 1., 1., 1.], &[1., 2., 3., 4.]);
        let m = multivariate_ranks(&s, false);
        assert!(matches!(grothe_tau(&m), Err(Error::Undefined(_))));
        assert!(matches!(grothe_spearman(&m), Err(Error::Undefined(_))));
        let two = one_dim(&[1., 2.], &[1., 2.]);
        assert!(grothe_tau(&multivariate_ranks(&two, false)).is_err());
    }

    #[test]
    fn dominance_table_matches_direct_count() {
        let xr: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![(i as f64 * 1.7).sin(), (i as f64 * 0.3).cos()])
            .collect();
        let yr: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![(i as f64 * 2.9).cos(), i as f64 % 4.0])
            .collect();
        let s = MultiSample::from_rows(&xr, &yr).unwrap();
        let table = DominanceTable::new(&s, false);
        let perm = vec![3, 1, 4, 0, 14, 9, 2, 6, 5, 13, 8, 7, 12, 10, 11];
        let yp: Vec<Vec<f64>> = perm.iter().map(|&k| yr[k].clone()).collect();
        let direct = multivariate_ranks(&MultiSample::from_rows(&xr, &yp).unwrap(), false);
        assert_eq!(table.profile(&perm), direct);
    }

    #[test]
    fn borel_single_coordinate_is_monotone() {
        let cfg = BorelConfig::new(4, 16, 1).unwrap();
        let vals = [-9.5, -3.25, -0.5, -0.0, 0.125, 0.5, 2.75, 15.0];
        let codes: Vec<BorelCode> = vals
            .iter()
            .map(|&v| borel_merge(&[v], &cfg).unwrap())
            .collect();
        for w in codes.windows(2) {
            assert!(w[0] < w[1]);
        }
        // 1 c a1..a4 . b1..b16 for 2.75 = 10.11b: 1 1 0010 . 11
        assert_eq!(codes[6].to_f64(), 0b11_0010 as f64 + 0.75);
    }

    #[test]
    fn literal_sign_coding_orders_by_magnitude() {
        let cfg = BorelConfig::new(2, 8, 1)
            .unwrap()
            .with_sign_coding(SignCoding::Magnitude);
        let a = borel_merge(&[-1.0], &cfg).unwrap();
        let b = borel_merge(&[-2.0], &cfg).unwrap();
        assert!(b > a);
    }

    #[test]
    fn borel_distinguishes_rows() {
        let cfg = BorelConfig::new(1, 32, 2).unwrap();
        assert_ne!(
            borel_merge(&[0., 0.], &cfg).unwrap(),
            borel_merge(&[0., 1.], &cfg).unwrap()
        );
    }

    #[test]
    fn borel_overflow_and_config_errors() {
        let cfg = BorelConfig::new(2, 8, 1).unwrap();
        assert!(matches!(
            borel_merge(&[4.0], &cfg),
            Err(Error::MagnitudeOverflow { .. })
        ));
        assert!(borel_merge(&[3.99], &cfg).is_ok());
        assert!(BorelConfig::new(0, 8, 1).is_err());
        assert!(BorelConfig::new(1, 0, 1).is_err());
        assert!(BorelConfig::new(1, 8, 0).is_err());
        assert!(borel_merge(&[1.0, 2.0], &cfg).is_err());
    }

    #[test]
    fn fitted_integer_bits() {
        let rows = [vec![0.3], vec![-7.9]];
        assert_eq!(
            BorelConfig::fitted(rows.iter().map(|r| r.as_slice()), 1, 8)
                .unwrap()
                .integer_bits,
            3
        );
        let rows = [vec![8.0]];
        assert_eq!(
            BorelConfig::fitted(rows.iter().map(|r| r.as_slice()), 1, 8)
                .unwrap()
                .integer_bits,
            4
        );
        let rows = [vec![0.5]];
        assert_eq!(
            BorelConfig::fitted(rows.iter().map(|r| r.as_slice()), 1, 8)
                .unwrap()
                .integer_bits,
            1
        );
    }

    #[test]
    fn borel_xi_reduces_to_univariate() {
        let x = [0.3, -1.2, 2.5, 0.9, -0.4, 1.7, -2.2, 0.05];
        let y = [1.1, 0.2, -0.7, 2.4, -1.9, 0.6, 0.35, -0.15];
        let s = one_dim(&x, &y);
        let cfg = BorelPair::fitted(&s, 32, SignCoding::OrderPreserving).unwrap();
        let uni = unistat::xi(
            &ranks::concomitant_profile(
                &ranks::PairedSample::new(x.to_vec(), y.to_vec()).unwrap(),
                None,
            )
            .unwrap(),
        );
        assert_eq!(
            borel_stat(&s, BorelStat::Xi, &cfg, None).unwrap().value,
            uni
        );
    }

    #[test]
    fn underpowered_plan_is_rejected() {
        assert!(matches!(
            PermutationPlan::new(50, 0),
            Err(Error::Underpowered { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for k in MvKind::ALL {
            assert_eq!(k.name().parse::<MvKind>().unwrap(), k);
        }
        for m in MvMode::ALL {
            assert_eq!(m.name().parse::<MvMode>().unwrap(), m);
        }
    }
}
