//! Standard normal distribution function.

use libm::erfc;

/// `Φ(z)`.
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `1 - Φ(z)`, computed without cancellation.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // mpmath, 30 digits
        assert_eq!(cdf(0.0), 0.5);
        assert!((cdf(1.96) - 0.975_002_104_851_779_6).abs() < 1e-15);
        assert!((cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((sf(5.0) - 2.866_515_718_791_939e-7).abs() < 1e-21);
        assert!((sf(10.0) / 7.619_853_024_160_526e-24 - 1.0).abs() < 1e-13);
    }
}
