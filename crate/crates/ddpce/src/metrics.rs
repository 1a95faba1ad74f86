//! Quantile and deviation statistics for comparing surrogate output
//! distributions against a Monte Carlo reference.
//!
//! Conventions are fixed here because tail deviations of a percent or two
//! are sensitive to them: quantiles interpolate order statistics at
//! position h = (n - 1) * level + 1, and the standard deviation is the
//! population form (divide by n) to match the empirical measure used for
//! basis construction.

use crate::error::{Error, Result};

/// Linear-interpolation quantile on the sorted sample.
pub fn quantile(samples: &[f64], level: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("quantile of an empty sample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, level))
}

/// Quantile of an already-sorted sample; used to avoid re-sorting when many
/// levels are requested.
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * level + 1.0;
    let lo = h.floor() as usize; // 1-based
    let frac = h - lo as f64;
    if lo >= n {
        return sorted[n - 1];
    }
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

/// Signed percent deviation of a surrogate statistic from its reference:
/// 100 (s - r) / |r|.
pub fn percent_deviation(surrogate_stat: f64, reference_stat: f64) -> Result<f64> {
    if reference_stat == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(100.0 * (surrogate_stat - reference_stat) / reference_stat.abs())
}

/// Mean, population standard deviation and selected quantiles of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    pub mean: f64,
    pub std: f64,
    /// (level, value) pairs in the order requested.
    pub quantiles: Vec<(f64, f64)>,
}

impl DistributionSummary {
    /// Value at a previously requested level, if present.
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|(l, _)| *l == level).map(|(_, v)| *v)
    }
}

/// Summarizes a sample at the requested quantile levels.
pub fn summarize(samples: &[f64], levels: &[f64]) -> Result<DistributionSummary> {
    if samples.is_empty() {
        return Err(Error::Empty("summary of an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut quantiles = Vec::with_capacity(levels.len());
    for &level in levels {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Config(format!("quantile level must lie in (0, 1), got {level}")));
        }
        quantiles.push((level, quantile_sorted(&sorted, level)));
    }
    Ok(DistributionSummary { mean, std: var.sqrt(), quantiles })
}

/// One report row: signed percent deviations of a surrogate distribution
/// from the Monte Carlo reference, plus stability indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    /// Scheme label, e.g. `ols` or `alpha:1.2`.
    pub label: String,
    /// Sweep value for tempered rows; the applied exponent may differ in
    /// sign depending on the configured direction.
    pub alpha: Option<f64>,
    pub p5_dev: f64,
    pub p95_dev: f64,
    pub mean_dev: f64,
    pub std_dev: f64,
    /// Stability score of the weighted system (varies with alpha).
    pub score_lr: f64,
    /// Stability score of the unweighted design (constant across a sweep).
    pub score_lr_unweighted: f64,
    pub weighted_gram_condition: f64,
}

/// Builds a deviation row from reference and surrogate summaries.
pub fn deviation_row(
    label: String,
    alpha: Option<f64>,
    reference: &DistributionSummary,
    surrogate: &DistributionSummary,
    score_lr: f64,
    score_lr_unweighted: f64,
    weighted_gram_condition: f64,
) -> Result<DeviationRow> {
    let ref_q = |level: f64| {
        reference
            .quantile(level)
            .ok_or_else(|| Error::Config(format!("reference summary lacks level {level}")))
    };
    let sur_q = |level: f64| {
        surrogate
            .quantile(level)
            .ok_or_else(|| Error::Config(format!("surrogate summary lacks level {level}")))
    };
    let row = DeviationRow {
        label,
        alpha,
        p5_dev: percent_deviation(sur_q(0.05)?, ref_q(0.05)?)?,
        p95_dev: percent_deviation(sur_q(0.95)?, ref_q(0.95)?)?,
        mean_dev: percent_deviation(surrogate.mean, reference.mean)?,
        std_dev: percent_deviation(surrogate.std, reference.std)?,
        score_lr,
        score_lr_unweighted,
        weighted_gram_condition,
    };
    let entries = [row.p5_dev, row.p95_dev, row.mean_dev, row.std_dev, row.score_lr];
    if entries.iter().any(|v| !v.is_finite()) || !(row.score_lr > 0.0) {
        return Err(Error::NumericRange(format!(
            "degenerate deviation row for {}: {entries:?}",
            row.label
        )));
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn interpolated_quantile_of_1_to_100() {
        let samples: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_abs_diff_eq!(quantile(&samples, 0.95).unwrap(), 95.05, epsilon = 1e-12);
    }

    #[test]
    fn single_sample_quantile() {
        assert_eq!(quantile(&[5.0], 0.3).unwrap(), 5.0);
        assert_eq!(quantile(&[5.0], 0.99).unwrap(), 5.0);
    }

    #[test]
    fn two_sample_midpoint() {
        assert_abs_diff_eq!(quantile(&[2.0, 1.0], 0.5).unwrap(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn quantile_rejects_bad_inputs() {
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0], 0.0).is_err());
        assert!(quantile(&[1.0], 1.0).is_err());
    }

    #[test]
    fn percent_deviation_examples() {
        assert_abs_diff_eq!(percent_deviation(95.0, 100.0).unwrap(), -5.0, epsilon = 1e-12);
        assert_eq!(percent_deviation(3.25, 3.25).unwrap(), 0.0);
        let r = 40.0;
        let s = 1.93 * r / 100.0 + r;
        assert_abs_diff_eq!(percent_deviation(s, r).unwrap(), 1.93, epsilon = 1e-12);
        assert!(matches!(percent_deviation(1.0, 0.0), Err(Error::ZeroReference)));
    }

    #[test]
    fn percent_deviation_keeps_sign_for_negative_reference() {
        // deviation is relative to |r| but signed by (s - r)
        assert_abs_diff_eq!(percent_deviation(-95.0, -100.0).unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn summary_of_constant_vector() {
        let s = summarize(&[3.0; 10], &[0.05, 0.5, 0.95]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.std, 0.0);
        assert!(s.quantiles.iter().all(|&(_, v)| v == 3.0));
    }

    #[test]
    fn summary_uses_population_std() {
        let s = summarize(&[-1.0, 1.0], &[0.5]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.std, 1.0);
    }

    proptest! {
        #[test]
        fn quantile_is_monotone_in_level(
            mut samples in proptest::collection::vec(-1e6f64..1e6, 1..200),
            a in 0.01f64..0.99,
            b in 0.01f64..0.99,
        ) {
            samples.sort_by(f64::total_cmp);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantile_sorted(&samples, lo) <= quantile_sorted(&samples, hi) + 1e-9);
        }

        #[test]
        fn quantile_translation_and_scale_equivariance(
            samples in proptest::collection::vec(-1e3f64..1e3, 1..100),
            shift in -1e3f64..1e3,
            scale in 0.01f64..100.0,
            level in 0.01f64..0.99,
        ) {
            let q = quantile(&samples, level).unwrap();
            let shifted: Vec<f64> = samples.iter().map(|v| v + shift).collect();
            let scaled: Vec<f64> = samples.iter().map(|v| v * scale).collect();
            prop_assert!((quantile(&shifted, level).unwrap() - (q + shift)).abs() < 1e-6);
            prop_assert!((quantile(&scaled, level).unwrap() - q * scale).abs() < 1e-6 * scale.max(1.0));
        }

        #[test]
        fn deviation_is_linear_in_the_difference(
            r in proptest::num::f64::NORMAL.prop_filter("nonzero", |v| v.abs() > 1e-6 && v.abs() < 1e12),
            delta in -1e3f64..1e3,
        ) {
            let d = percent_deviation(r + delta, r).unwrap();
            prop_assert!((d - 100.0 * delta / r.abs()).abs() < 1e-6 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn uniform_tail_quantile_converges() {
        // 10^6 uniform draws: the 0.95 quantile lands within +-0.002.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let samples: Vec<f64> = (0..1_000_000).map(|_| rng.gen::<f64>()).collect();
        let q = quantile(&samples, 0.95).unwrap();
        assert!((q - 0.95).abs() < 0.002, "q95 = {q}");
    }
}
