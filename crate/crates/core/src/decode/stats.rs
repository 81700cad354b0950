use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalErrorRate {
    pub failures: u64,
    pub shots: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl LogicalErrorRate {
    pub fn from_counts(failures: u64, shots: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(failures, shots, Z95);
        LogicalErrorRate {
            failures,
            shots,
            rate: if shots == 0 {
                0.0
            } else {
                failures as f64 / shots as f64
            },
            ci_lo,
            ci_hi,
        }
    }
}

/// Number of shots whose predicted observable mask differs from the actual.
pub fn count_failures(predictions: &[u64], actual: &[u64]) -> Result<u64> {
    if predictions.len() != actual.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} shots",
            predictions.len(),
            actual.len()
        )));
    }
    Ok(predictions
        .iter()
        .zip(actual)
        .filter(|(a, b)| a != b)
        .count() as u64)
}

pub fn logical_error_rate(predictions: &[u64], actual: &[u64]) -> Result<LogicalErrorRate> {
    let f = count_failures(predictions, actual)?;
    Ok(LogicalErrorRate::from_counts(f, actual.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_rates() {
        let r = logical_error_rate(&[0, 1, 3], &[0, 1, 3]).unwrap();
        assert_eq!((r.failures, r.rate), (0, 0.0));
        let r = logical_error_rate(&[1, 0], &[0, 1]).unwrap();
        assert_eq!(r.rate, 1.0);
        assert!(logical_error_rate(&[0], &[0, 0]).is_err());
    }

    #[test]
    fn wilson_closed_form() {
        // Oracle: direct evaluation of the score interval for 10/1000.
        let (p, n, z) = (0.01f64, 1000f64, 1.959964f64);
        let c = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
        let h = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        let r = LogicalErrorRate::from_counts(10, 1000);
        assert!((r.ci_lo - (c - h)).abs() < 1e-15 && (r.ci_hi - (c + h)).abs() < 1e-15);
        assert!((r.ci_lo - 0.0054).abs() < 5e-5, "{}", r.ci_lo);
        assert!((r.ci_hi - 0.0183).abs() < 5e-5, "{}", r.ci_hi);
        let zero = LogicalErrorRate::from_counts(0, 100);
        assert_eq!(zero.ci_lo, 0.0);
        assert!(zero.ci_hi > 0.03 && zero.ci_hi < 0.04);
    }
}
