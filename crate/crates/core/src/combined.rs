//! Max-type combined tests and their asymptotic p-values.
//!
//! Under independence `sqrt(n)` times each of `S_n`, `tau_n`, `Q_n`,
//! `xi_n(X, Y)` and `xi_n(Y, X)` is asymptotically normal, and the monotone
//! statistic is asymptotically independent of both xi's. Dividing each
//! component by its null standard deviation gives unit-variance components,
//! so the maximum has a closed-form tail.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::ranks::{concomitant_profile, PairedSample};
use crate::unistat::{self, RankStats};

/// Where a p-value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PSource {
    Analytic,
    Permutation,
}

/// Result of one independence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: String,
    /// The test statistic: the max over `components` for combined tests,
    /// the raw correlation for single-statistic tests.
    pub statistic: f64,
    /// Value on the standard normal scale that the analytic p-value is
    /// evaluated at, `sqrt(n) * statistic` for combined tests.
    pub standardized: f64,
    pub p_value: f64,
    pub p_source: PSource,
    pub n: usize,
    pub components: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
    /// Permutation estimate of the null sd of `sqrt(n)` times the monotone
    /// component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hat: Option<f64>,
}

/// Monotone component of a symmetric combined test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Spearman,
    Kendall,
    Quadrant,
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spearman" | "s" => Ok(Self::Spearman),
            "kendall" | "tau" => Ok(Self::Kendall),
            "quadrant" | "q" => Ok(Self::Quadrant),
            _ => Err(Error::Unknown {
                kind: "flavor",
                name: s.to_string(),
            }),
        }
    }
}

/// How components are put on a common scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Divide by asymptotic null sds: 1 for S and Q, 2/3 for tau, sqrt(2/5)
    /// for xi.
    #[default]
    Asymptotic,
    /// Divide by the exact finite-sample null sds at this `n`.
    FiniteSample,
    /// The definitions as printed: raw `|tau|` and `3/2 |Q|`. The analytic
    /// p-value is not calibrated in this mode.
    Literal,
}

impl FromStr for Standardization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Self::Asymptotic),
            "finite" | "finite_sample" => Ok(Self::FiniteSample),
            "literal" => Ok(Self::Literal),
            _ => Err(Error::Unknown {
                kind: "standardization",
                name: s.to_string(),
            }),
        }
    }
}

/// Null sds of `sqrt(n)` times each statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub spearman: f64,
    pub kendall: f64,
    pub quadrant: f64,
    pub xi: f64,
}

impl Scales {
    pub fn new(standardization: Standardization, n: usize) -> Result<Self> {
        let xi_asym = 0.4_f64.sqrt();
        match standardization {
            Standardization::Asymptotic => Ok(Self {
                spearman: 1.0,
                kendall: 2.0 / 3.0,
                quadrant: 1.0,
                xi: xi_asym,
            }),
            Standardization::Literal => Ok(Self {
                spearman: 1.0,
                kendall: 1.0,
                quadrant: 2.0 / 3.0,
                xi: xi_asym,
            }),
            Standardization::FiniteSample => {
                if n < 3 {
                    return Err(Error::Undefined(
                        "finite-sample xi variance is zero for n < 3",
                    ));
                }
                Ok(Self {
                    spearman: unistat::spearman_null_variance(n)?.sd(),
                    kendall: unistat::tau_null_variance(n)?.sd(),
                    quadrant: unistat::quadrant_null_variance(n)?.sd(),
                    xi: unistat::xi_null_variance(n)?.sd(),
                })
            }
        }
    }

    pub fn monotone(&self, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::Spearman => self.spearman,
            Flavor::Kendall => self.kendall,
            Flavor::Quadrant => self.quadrant,
        }
    }
}

/// Univariate tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Chatterjee's xi, one-sided.
    Xi,
    Spearman,
    Kendall,
    Quadrant,
    /// `max{|S|, sqrt(5/2) xi(X,Y), sqrt(5/2) xi(Y,X)}`.
    CombinedSpearman,
    /// `max{|tau|/(2/3), sqrt(5/2) xi(X,Y), sqrt(5/2) xi(Y,X)}`.
    CombinedKendall,
    CombinedQuadrant,
    /// `max{sqrt(5/2) xi(X,Y), sqrt(5/2) xi(Y,X)}`.
    XiSym,
    /// `max{|S|, sqrt(5/2) xi(X,Y)}`.
    CombinedSpearmanAsym,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Xi,
        Method::Spearman,
        Method::Kendall,
        Method::Quadrant,
        Method::CombinedSpearman,
        Method::CombinedKendall,
        Method::CombinedQuadrant,
        Method::XiSym,
        Method::CombinedSpearmanAsym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Xi => "xi",
            Method::Spearman => "spearman",
            Method::Kendall => "kendall",
            Method::Quadrant => "quadrant",
            Method::CombinedSpearman => "cs",
            Method::CombinedKendall => "ck",
            Method::CombinedQuadrant => "cq",
            Method::XiSym => "xisym",
            Method::CombinedSpearmanAsym => "cs_asym",
        }
    }

    pub fn symmetric(flavor: Flavor) -> Self {
        match flavor {
            Flavor::Spearman => Method::CombinedSpearman,
            Flavor::Kendall => Method::CombinedKendall,
            Flavor::Quadrant => Method::CombinedQuadrant,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "method",
                name: s.to_string(),
            })
    }
}

/// `P(max(|N1|, N2, N3) > z) = 1 + Phi(z)^2 - 2 Phi(z)^3` for independent
/// standard normals.
pub fn pvalue_max3(z: f64) -> Result<f64> {
    if z < 0.0 || z.is_nan() {
        return Err(Error::NegativeZ(z));
    }
    Ok(tail_max3(z))
}

// With t = 1 - Phi(z) the three tails expand to polynomials in t, which keeps
// full relative precision far into the tail.
fn tail_max3(z: f64) -> f64 {
    let t = normal::sf(z);
    clamp01(t * (4.0 - 5.0 * t + 2.0 * t * t))
}

/// `P(max(N1, N2) > z) = 1 - Phi(z)^2`.
pub fn pvalue_max2(z: f64) -> f64 {
    let t = normal::sf(z);
    clamp01(t * (2.0 - t))
}

/// `P(max(|N1|, N2) > z) = 1 - (2 Phi(z) - 1) Phi(z)`.
pub fn pvalue_abs_max2(z: f64) -> Result<f64> {
    if z < 0.0 || z.is_nan() {
        return Err(Error::NegativeZ(z));
    }
    Ok(tail_abs_max2(z))
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Statistic, standardized value and p-value without the bookkeeping of a
/// full [`TestOutcome`]; the Monte-Carlo runners call this in the hot loop.
pub fn score(method: Method, stats: &RankStats, scales: &Scales) -> (f64, f64, f64) {
    let sqrt_n = (stats.n as f64).sqrt();
    let xi_xy = stats.xi_xy / scales.xi;
    let xi_yx = stats.xi_yx / scales.xi;
    let monotone = |v: f64, s: f64| v.abs() / s;
    match method {
        Method::Xi => {
            let z = sqrt_n * xi_xy;
            (stats.xi_xy, z, normal::sf(z))
        }
        Method::Spearman | Method::Kendall | Method::Quadrant => {
            let (v, s) = match method {
                Method::Spearman => (stats.spearman, scales.spearman),
                Method::Kendall => (stats.kendall, scales.kendall),
                _ => (stats.quadrant, scales.quadrant),
            };
            let z = sqrt_n * v / s;
            (v, z, clamp01(2.0 * normal::sf(z.abs())))
        }
        Method::XiSym => {
            let t = xi_xy.max(xi_yx);
            (t, sqrt_n * t, pvalue_max2(sqrt_n * t))
        }
        Method::CombinedSpearmanAsym => {
            let t = monotone(stats.spearman, scales.spearman).max(xi_xy);
            (t, sqrt_n * t, tail_abs_max2(sqrt_n * t))
        }
        Method::CombinedSpearman | Method::CombinedKendall | Method::CombinedQuadrant => {
            let (v, s) = match method {
                Method::CombinedSpearman => (stats.spearman, scales.spearman),
                Method::CombinedKendall => (stats.kendall, scales.kendall),
                _ => (stats.quadrant, scales.quadrant),
            };
            let t = monotone(v, s).max(xi_xy).max(xi_yx);
            (t, sqrt_n * t, tail_max3(sqrt_n * t))
        }
    }
}

fn tail_abs_max2(z: f64) -> f64 {
    let t = normal::sf(z);
    clamp01(t * (3.0 - 2.0 * t))
}

/// Evaluates `method` on precomputed rank statistics.
pub fn evaluate(
    method: Method,
    stats: &RankStats,
    standardization: Standardization,
) -> Result<TestOutcome> {
    let scales = Scales::new(standardization, stats.n)?;
    let (statistic, standardized, p_value) = score(method, stats, &scales);

    let mut components = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        components.insert(k.to_string(), v);
    };
    let xi_scaled = |v: f64| v / scales.xi;
    match method {
        Method::Xi => put("xi_xy", stats.xi_xy),
        Method::Spearman => put("spearman", stats.spearman),
        Method::Kendall => put("kendall", stats.kendall),
        Method::Quadrant => put("quadrant", stats.quadrant),
        Method::XiSym => {
            put("scaled_xi_xy", xi_scaled(stats.xi_xy));
            put("scaled_xi_yx", xi_scaled(stats.xi_yx));
        }
        Method::CombinedSpearmanAsym => {
            put(
                "scaled_abs_spearman",
                stats.spearman.abs() / scales.spearman,
            );
            put("scaled_xi_xy", xi_scaled(stats.xi_xy));
        }
        Method::CombinedSpearman => {
            put(
                "scaled_abs_spearman",
                stats.spearman.abs() / scales.spearman,
            );
            put("scaled_xi_xy", xi_scaled(stats.xi_xy));
            put("scaled_xi_yx", xi_scaled(stats.xi_yx));
        }
        Method::CombinedKendall => {
            put("scaled_abs_kendall", stats.kendall.abs() / scales.kendall);
            put("scaled_xi_xy", xi_scaled(stats.xi_xy));
            put("scaled_xi_yx", xi_scaled(stats.xi_yx));
        }
        Method::CombinedQuadrant => {
            put(
                "scaled_abs_quadrant",
                stats.quadrant.abs() / scales.quadrant,
            );
            put("scaled_xi_xy", xi_scaled(stats.xi_xy));
            put("scaled_xi_yx", xi_scaled(stats.xi_yx));
        }
    }

    Ok(TestOutcome {
        method: method.name().to_string(),
        statistic,
        standardized,
        p_value,
        p_source: PSource::Analytic,
        n: stats.n,
        components,
        seed: None,
        permutations: None,
        sigma_hat: None,
    })
}

/// Options shared by the univariate entry points.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UniOptions {
    pub tie_seed: Option<u64>,
    pub standardization: Standardization,
}

pub fn test(sample: &PairedSample, method: Method, opts: &UniOptions) -> Result<TestOutcome> {
    let profile = concomitant_profile(sample, opts.tie_seed)?;
    let mut out = evaluate(
        method,
        &RankStats::from_profile(&profile),
        opts.standardization,
    )?;
    out.seed = opts.tie_seed;
    Ok(out)
}

/// `I_n = max{|S_n|, sqrt(5/2) xi_n(X, Y)}`.
pub fn combined_asymmetric(sample: &PairedSample) -> Result<TestOutcome> {
    test(sample, Method::CombinedSpearmanAsym, &UniOptions::default())
}

pub fn combined_symmetric(sample: &PairedSample, flavor: Flavor) -> Result<TestOutcome> {
    test(sample, Method::symmetric(flavor), &UniOptions::default())
}

pub fn symmetric_xi(sample: &PairedSample) -> Result<TestOutcome> {
    test(sample, Method::XiSym, &UniOptions::default())
}
