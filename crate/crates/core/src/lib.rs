//! Rank-based tests of independence that pair Chatterjee's xi with a
//! monotone rank correlation (Spearman, Kendall or quadrant), for univariate
//! and multivariate data.
//!
//! ```
//! use rankdep::{combined, PairedSample};
//!
//! let x: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
//! let y: Vec<f64> = x.iter().map(|v| (3.0 * v).sin()).collect();
//! let sample = PairedSample::new(x, y).unwrap();
//! let out = combined::combined_symmetric(&sample, combined::Flavor::Kendall).unwrap();
//! assert!(out.p_value < 0.01);
//! ```

pub mod combined;
pub mod error;
pub mod montecarlo;
pub mod mvstat;
pub mod normal;
pub mod ranks;
pub mod seed;
pub mod unistat;

pub use combined::{Flavor, Method, PSource, Standardization, TestOutcome, UniOptions};
pub use error::{Error, Result};
pub use montecarlo::PermutationPlan;
pub use mvstat::{MvKind, MvMode, MvOptions};
pub use ranks::{MultiSample, PairedSample, RankProfile};
pub use unistat::RankStats;
