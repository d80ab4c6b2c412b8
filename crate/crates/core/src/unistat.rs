//! Chatterjee's xi, Spearman's rho, Kendall's tau and the quadrant
//! correlation, together with their exact null moments.
//!
//! All four statistics are functions of the concomitant ranks alone. Each
//! one is computed from an integer kernel so that the floating-point and the
//! exact rational value come from the same count.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::RankProfile;

pub type Rational = Ratio<i128>;

/// `sum_{i<n} |R_{i+1} - R_i|`.
pub fn abs_successive_diff_sum(r: &[usize]) -> u64 {
    r.windows(2).map(|w| w[0].abs_diff(w[1]) as u64).sum()
}

/// `sum_i (i - R_i)^2`, with `i` running over `1..=n`.
pub fn squared_displacement(r: &[usize]) -> u64 {
    r.iter()
        .enumerate()
        .map(|(i, &ri)| {
            let d = (i + 1).abs_diff(ri) as u64;
            d * d
        })
        .sum()
}

/// Number of pairs `i < j` with `R_i > R_j`, by merge sort.
pub fn inversions(r: &[usize]) -> u64 {
    let mut buf: Vec<usize> = r.to_vec();
    let mut scratch = vec![0; r.len()];
    sort_count(&mut buf, &mut scratch)
}

fn sort_count(v: &mut [usize], scratch: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        let (slo, shi) = scratch.split_at_mut(mid);
        sort_count(lo, slo) + sort_count(hi, shi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            // v[j] jumps ahead of every remaining left element
            scratch[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}

/// `sum_i sgn[(2i - n - 1)(2R_i - n - 1)]`: the quadrant sign sum with both
/// coordinates centred at their sample median rank `(n + 1) / 2`.
pub fn quadrant_score(r: &[usize]) -> i64 {
    let n1 = r.len() as i64 + 1;
    r.iter()
        .enumerate()
        .map(|(i, &ri)| {
            let a = 2 * (i as i64 + 1) - n1;
            let b = 2 * ri as i64 - n1;
            a.signum() * b.signum()
        })
        .sum()
}

pub(crate) fn xi_from_ranks(r: &[usize]) -> f64 {
    let n = r.len() as f64;
    1.0 - 3.0 * abs_successive_diff_sum(r) as f64 / (n * n - 1.0)
}

pub(crate) fn spearman_from_ranks(r: &[usize]) -> f64 {
    let n = r.len() as f64;
    1.0 - 6.0 * squared_displacement(r) as f64 / (n * (n * n - 1.0))
}

pub(crate) fn kendall_from_ranks(r: &[usize]) -> f64 {
    let n = r.len() as f64;
    1.0 - 4.0 * inversions(r) as f64 / (n * (n - 1.0))
}

pub(crate) fn quadrant_from_ranks(r: &[usize]) -> f64 {
    quadrant_score(r) as f64 / r.len() as f64
}

/// Chatterjee's correlation `xi_n(X, Y)`.
pub fn xi(profile: &RankProfile) -> f64 {
    xi_from_ranks(profile.concomitant())
}

pub fn spearman(profile: &RankProfile) -> f64 {
    spearman_from_ranks(profile.concomitant())
}

/// Kendall's tau in `O(n log n)` via inversion counting on the concomitants.
pub fn kendall(profile: &RankProfile) -> f64 {
    kendall_from_ranks(profile.concomitant())
}

/// Quadrant correlation about the sample medians. For even `n` the median is
/// the mean of the two central order statistics, so no observation sits on it.
pub fn quadrant(profile: &RankProfile) -> f64 {
    quadrant_from_ranks(profile.concomitant())
}

/// Exact rational values of the statistics.
pub mod exact {
    use super::*;

    fn n_of(r: &[usize]) -> i128 {
        r.len() as i128
    }

    pub fn xi(r: &[usize]) -> Rational {
        let n = n_of(r);
        Rational::from_integer(1) - Rational::new(3 * abs_successive_diff_sum(r) as i128, n * n - 1)
    }

    pub fn spearman(r: &[usize]) -> Rational {
        let n = n_of(r);
        Rational::from_integer(1)
            - Rational::new(6 * squared_displacement(r) as i128, n * (n * n - 1))
    }

    pub fn kendall(r: &[usize]) -> Rational {
        let n = n_of(r);
        Rational::from_integer(1) - Rational::new(4 * inversions(r) as i128, n * (n - 1))
    }

    pub fn quadrant(r: &[usize]) -> Rational {
        Rational::new(quadrant_score(r) as i128, n_of(r))
    }
}

/// Null moments of `sqrt(n) * statistic` under independence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NullMoments {
    pub mean: Rational,
    pub variance_of_sqrt_n_stat: Rational,
    pub asymptotic_variance: Rational,
}

impl NullMoments {
    fn new(variance: Rational, asymptotic: Rational) -> Self {
        Self {
            mean: Rational::from_integer(0),
            variance_of_sqrt_n_stat: variance,
            asymptotic_variance: asymptotic,
        }
    }

    pub fn variance(&self) -> f64 {
        to_f64(self.variance_of_sqrt_n_stat)
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn asymptotic_sd(&self) -> f64 {
        to_f64(self.asymptotic_variance).sqrt()
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_n(n: usize) -> Result<i128> {
    if n < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            got: n,
        });
    }
    Ok(n as i128)
}

/// `V[sqrt(n) xi_n] = n(n-2)(4n-7) / (10(n+1)(n-1)^2)`, limit 2/5.
pub fn xi_null_variance(n: usize) -> Result<NullMoments> {
    let n = check_n(n)?;
    Ok(NullMoments::new(
        Rational::new(n * (n - 2) * (4 * n - 7), 10 * (n + 1) * (n - 1) * (n - 1)),
        Rational::new(2, 5),
    ))
}

/// `V[sqrt(n) tau_n] = 2(2n+5) / (9(n-1))`, limit 4/9.
pub fn tau_null_variance(n: usize) -> Result<NullMoments> {
    let n = check_n(n)?;
    Ok(NullMoments::new(
        Rational::new(2 * (2 * n + 5), 9 * (n - 1)),
        Rational::new(4, 9),
    ))
}

/// `(n-1)/n` for odd `n`, `n/(n-1)` for even `n`; limit 1.
pub fn quadrant_null_variance(n: usize) -> Result<NullMoments> {
    let n = check_n(n)?;
    let v = if n % 2 == 1 {
        Rational::new(n - 1, n)
    } else {
        Rational::new(n, n - 1)
    };
    Ok(NullMoments::new(v, Rational::from_integer(1)))
}

/// `V[sqrt(n) S_n] = n/(n-1)`, the classical permutation variance of
/// Spearman's rho; limit 1.
pub fn spearman_null_variance(n: usize) -> Result<NullMoments> {
    let n = check_n(n)?;
    Ok(NullMoments::new(
        Rational::new(n, n - 1),
        Rational::from_integer(1),
    ))
}

/// All rank statistics of one sample, in both directions where they differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub n: usize,
    pub xi_xy: f64,
    pub xi_yx: f64,
    pub spearman: f64,
    pub kendall: f64,
    pub quadrant: f64,
}

impl RankStats {
    pub fn from_profile(profile: &RankProfile) -> Self {
        Self::from_concomitant(profile.concomitant())
    }

    pub(crate) fn from_concomitant(r: &[usize]) -> Self {
        let inv = crate::ranks::inverse_permutation(r);
        Self {
            n: r.len(),
            xi_xy: xi_from_ranks(r),
            xi_yx: xi_from_ranks(&inv),
            spearman: spearman_from_ranks(r),
            kendall: kendall_from_ranks(r),
            quadrant: quadrant_from_ranks(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::{concomitant_profile, PairedSample};

    fn prof(r: &[usize]) -> RankProfile {
        RankProfile::from_concomitant(r.to_vec()).unwrap()
    }

    fn q(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(&prof(&[1, 2, 3])), 0.25);
        assert_eq!(xi(&prof(&[1, 3, 2])), -0.125);
        assert_eq!(xi(&prof(&[3, 2, 1])), 0.25);
        assert_eq!(exact::xi(&[1, 3, 2]), q(-1, 8));
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&prof(&[1, 2, 3])), 1.0);
        assert_eq!(spearman(&prof(&[3, 2, 1])), -1.0);
        assert_eq!(spearman(&prof(&[2, 1, 3])), 0.5);
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(exact::kendall(&[1, 2, 3]), q(1, 1));
        assert_eq!(exact::kendall(&[1, 3, 2]), q(1, 3));
        assert_eq!(exact::kendall(&[2, 3, 1]), q(-1, 3));
        assert_eq!(kendall(&prof(&[3, 2, 1])), -1.0);
    }

    #[test]
    fn quadrant_examples() {
        let s = |x: Vec<f64>, y: Vec<f64>| {
            quadrant(&concomitant_profile(&PairedSample::new(x, y).unwrap(), None).unwrap())
        };
        assert!((s(vec![1., 2., 3.], vec![1., 2., 3.]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s(vec![1., 2., 3., 4.], vec![1., 2., 3., 4.]), 1.0);
        assert_eq!(s(vec![1., 2., 3., 4.], vec![4., 3., 2., 1.]), -1.0);
    }

    #[test]
    fn null_variance_values() {
        assert_eq!(
            xi_null_variance(3).unwrap().variance_of_sqrt_n_stat,
            q(3, 32)
        );
        assert_eq!(
            xi_null_variance(2).unwrap().variance_of_sqrt_n_stat,
            q(0, 1)
        );
        assert!((xi_null_variance(1_000_000).unwrap().variance() - 0.4).abs() < 1e-5);
        assert_eq!(
            tau_null_variance(3).unwrap().variance_of_sqrt_n_stat,
            q(11, 9)
        );
        assert_eq!(
            tau_null_variance(2).unwrap().variance_of_sqrt_n_stat,
            q(2, 1)
        );
        assert!((tau_null_variance(1_000_000).unwrap().variance() - 4.0 / 9.0).abs() < 1e-5);
        assert_eq!(
            quadrant_null_variance(3).unwrap().variance_of_sqrt_n_stat,
            q(2, 3)
        );
        assert_eq!(
            quadrant_null_variance(4).unwrap().variance_of_sqrt_n_stat,
            q(4, 3)
        );
        assert_eq!(
            quadrant_null_variance(2).unwrap().variance_of_sqrt_n_stat,
            q(2, 1)
        );
        for f in [xi_null_variance, tau_null_variance, quadrant_null_variance] {
            assert!(matches!(f(1), Err(Error::TooFewObservations { .. })));
        }
    }

    #[test]
    fn inversions_small() {
        assert_eq!(inversions(&[1, 2, 3]), 0);
        assert_eq!(inversions(&[3, 2, 1]), 3);
        assert_eq!(inversions(&[2, 4, 1, 3]), 3);
        assert_eq!(inversions(&[5, 4, 3, 2, 1]), 10);
    }
}
