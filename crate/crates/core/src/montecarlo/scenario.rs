//! Data-generating models for the simulation studies.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::{MultiSample, PairedSample};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    /// `Y = X + Z`
    U1,
    /// `Y = X^2 + 0.3 Z`
    U2,
    /// Step function of the quarter of `[-1, 1]` holding `X`, plus `2Z`.
    U3,
    /// `Y = cos(2 pi X) + 0.75 Z`
    U4,
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    /// `X ~ U[-1, 1]` independent of `Y ~ N(0, 1)`.
    #[serde(rename = "null_uni")]
    NullUni,
    /// Three coordinates each of `X ~ U[-1, 1]` and `Y ~ N(0, 1)`, all independent.
    #[serde(rename = "null_mv")]
    NullMv,
    /// `Y = |X| + 0.1 Z`, dependent but far from monotone in either direction.
    #[serde(rename = "abs_noise")]
    AbsNoise,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 13] = [
        ScenarioId::U1,
        ScenarioId::U2,
        ScenarioId::U3,
        ScenarioId::U4,
        ScenarioId::M1,
        ScenarioId::M2,
        ScenarioId::M3,
        ScenarioId::M4,
        ScenarioId::M5,
        ScenarioId::M6,
        ScenarioId::NullUni,
        ScenarioId::NullMv,
        ScenarioId::AbsNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::U1 => "U1",
            ScenarioId::U2 => "U2",
            ScenarioId::U3 => "U3",
            ScenarioId::U4 => "U4",
            ScenarioId::M1 => "M1",
            ScenarioId::M2 => "M2",
            ScenarioId::M3 => "M3",
            ScenarioId::M4 => "M4",
            ScenarioId::M5 => "M5",
            ScenarioId::M6 => "M6",
            ScenarioId::NullUni => "null_uni",
            ScenarioId::NullMv => "null_mv",
            ScenarioId::AbsNoise => "abs_noise",
        }
    }

    pub fn is_multivariate(self) -> bool {
        matches!(
            self,
            ScenarioId::M1
                | ScenarioId::M2
                | ScenarioId::M3
                | ScenarioId::M4
                | ScenarioId::M5
                | ScenarioId::M6
                | ScenarioId::NullMv
        )
    }

    pub fn is_null(self) -> bool {
        matches!(self, ScenarioId::NullUni | ScenarioId::NullMv)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "scenario",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub n: usize,
}

impl ScenarioSpec {
    pub fn new(id: ScenarioId, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewObservations {
                required: 3,
                got: n,
            });
        }
        Ok(Self { id, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Paired(PairedSample),
    Multi(MultiSample),
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    Uniform::new(lo, hi).expect("finite range").sample(rng)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn step(x: f64) -> f64 {
    match x {
        x if x <= -0.5 => 1.0,
        x if x <= 0.0 => 2.0,
        x if x <= 0.5 => 3.0,
        _ => 4.0,
    }
}

fn cos2pi(x: f64) -> f64 {
    (2.0 * PI * x).cos()
}

/// Draws one data set. Observation `i` uses its own ChaCha8 stream keyed by
/// `(seed, i)`, so a sample of size `n` is a prefix of any larger sample
/// from the same seed.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<Sample> {
    let n = spec.n;
    if spec.id.is_multivariate() {
        let mut x = Vec::with_capacity(3 * n);
        let mut y = Vec::with_capacity(3 * n);
        for i in 0..n {
            let mut rng = seed::rng_for(seed, i as u64);
            let (xi, yi) = multivariate_row(spec.id, &mut rng);
            x.extend_from_slice(&xi);
            y.extend_from_slice(&yi);
        }
        Ok(Sample::Multi(MultiSample::from_flat(n, 3, 3, x, y)?))
    } else {
        let (x, y) = (0..n)
            .map(|i| univariate_pair(spec.id, &mut seed::rng_for(seed, i as u64)))
            .unzip();
        Ok(Sample::Paired(PairedSample::new(x, y)?))
    }
}

pub fn generate_paired(spec: &ScenarioSpec, seed: u64) -> Result<PairedSample> {
    match generate(spec, seed)? {
        Sample::Paired(s) => Ok(s),
        Sample::Multi(_) => Err(Error::InvalidConfig(format!("{} is multivariate", spec.id))),
    }
}

pub fn generate_multi(spec: &ScenarioSpec, seed: u64) -> Result<MultiSample> {
    match generate(spec, seed)? {
        Sample::Multi(s) => Ok(s),
        Sample::Paired(s) => {
            let x: Vec<Vec<f64>> = s.x().iter().map(|&v| vec![v]).collect();
            let y: Vec<Vec<f64>> = s.y().iter().map(|&v| vec![v]).collect();
            MultiSample::from_rows(&x, &y)
        }
    }
}

fn univariate_pair(id: ScenarioId, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let x = uniform(rng, -1.0, 1.0);
    let z = normal(rng);
    let y = match id {
        ScenarioId::U1 => x + z,
        ScenarioId::U2 => x * x + 0.3 * z,
        ScenarioId::U3 => step(x) + 2.0 * z,
        ScenarioId::U4 => cos2pi(x) + 0.75 * z,
        ScenarioId::AbsNoise => x.abs() + 0.1 * z,
        ScenarioId::NullUni => z,
        _ => unreachable!("multivariate scenario"),
    };
    (x, y)
}

fn multivariate_row(id: ScenarioId, rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3]) {
    let (lo, hi) = match id {
        ScenarioId::M1 => (0.0, 1.0),
        ScenarioId::M3 => (0.0, 2.0),
        ScenarioId::M4 | ScenarioId::M5 => (-2.0, 2.0),
        _ => (-1.0, 1.0),
    };
    let x: [f64; 3] = std::array::from_fn(|_| uniform(rng, lo, hi));
    let z: [f64; 3] = std::array::from_fn(|_| normal(rng));
    let [x1, x2, x3] = x;
    let y = match id {
        ScenarioId::M1 => [
            x1 - x2 + 2.0 * x3 + 2.0 * z[0],
            -x1 + 3.0 * x2 - 0.5 * x3 + 2.0 * z[1],
            1.5 * x1 + x2 + 2.0 * x3 + 2.0 * z[2],
        ],
        ScenarioId::M2 => [
            3.0 * x1 + 4.0 * z[0],
            x2 + 2.0 * z[1],
            2.0 * x3 + 3.0 * z[2],
        ],
        ScenarioId::M3 => [
            x2 + 2.0 * x3 + 4.0 * z[0],
            2.0 * x1 + 0.5 * x3 + 4.0 * z[1],
            x1 + 3.0 * x2 + 4.0 * z[2],
        ],
        ScenarioId::M4 => [
            2.0 * x1 * x1 + 4.0 * x2.abs() + cos2pi(x3) + 2.0 * z[0],
            2.0 * cos2pi(x1) + 3.0 * x2 * x2 + x3.abs() + 2.0 * z[1],
            3.0 * x1.abs() + 2.0 * cos2pi(x2) + 2.0 * x3 * x3 + 2.0 * z[2],
        ],
        ScenarioId::M5 => [
            2.0 * x1 * x1 + 5.0 * z[0],
            4.0 * x2 * x2 + 5.0 * z[1],
            6.0 * x3 * x3 + 5.0 * z[2],
        ],
        ScenarioId::M6 => [
            cos2pi(x1) + z[0] / 2.0,
            (4.0 * PI * x2).cos() + z[1] / 2.0,
            (6.0 * PI * x3).cos() + z[2] / 2.0,
        ],
        ScenarioId::NullMv => z,
        _ => unreachable!("univariate scenario"),
    };
    (x, y)
}

/// Standard-uniform draw; used by the null scatter generators.
pub(crate) fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal(rng)
}
