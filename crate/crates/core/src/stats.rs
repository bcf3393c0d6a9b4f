//! Small statistical helpers shared by the sampler and the verification suite.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::{Error, Result};

pub fn normal_cdf(z: f64) -> f64 {
    // Normal::new(0, 1) cannot fail
    Normal::standard().cdf(z)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and the
/// standard normal.
pub fn ks_distance_normal(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// KS distance for standardized samples supported on a lattice of spacing
/// `step`, comparing the empirical CDF at each support point with the normal
/// CDF at the upper cell edge (continuity correction).
pub fn ks_distance_lattice(samples: &[f64], step: f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let lo = normal_cdf(v - 0.5 * step);
        let before = i as f64 / n;
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        let after = i as f64 / n;
        d = d.max((after - normal_cdf(v + 0.5 * step)).abs()).max((before - lo).abs());
    }
    d
}

/// Upper-tail p-value of Pearson's chi-square test of `counts` against equal
/// cell probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<(f64, f64)> {
    if counts.len() < 2 {
        return Err(Error::InvalidParameter("chi-square needs at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::TooFewSamples { have: 0, need: 1 });
    }
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist =
        ChiSquared::new((counts.len() - 1) as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((stat, dist.sf(stat)))
}

/// Delete-one jackknife for a ratio of per-group sums `sum(num) / sum(den)`.
/// Returns the full-sample estimate and its standard error.
pub fn jackknife_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let g = num.len();
    let total_num: f64 = num.iter().sum();
    let total_den: f64 = den.iter().sum();
    let estimate = total_num / total_den;
    if g < 2 {
        return (estimate, f64::NAN);
    }
    let loo: Vec<f64> = (0..g).map(|k| (total_num - num[k]) / (total_den - den[k])).collect();
    let mean = loo.iter().sum::<f64>() / g as f64;
    let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
    (estimate, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 2000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                // bisection for the quantile
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid
                    } else {
                        hi = mid
                    }
                }
                lo
            })
            .collect();
        assert!(ks_distance_normal(&xs) <= 0.5 / n as f64 + 1e-9);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance_normal(&xs) > 0.45);
    }

    #[test]
    fn lattice_ks_is_zero_for_a_fine_discretization_of_the_normal() {
        // put mass Phi(v+h/2) - Phi(v-h/2) at each lattice point, exactly
        let h = 0.05;
        let reps = 1_000_000.0;
        let mut xs = Vec::new();
        let mut carry = 0.0;
        for k in -120..=120 {
            let v = k as f64 * h;
            let mass = normal_cdf(v + 0.5 * h) - normal_cdf(v - 0.5 * h);
            carry += mass * reps;
            while carry >= 1.0 {
                xs.push(v);
                carry -= 1.0;
            }
        }
        assert!(ks_distance_lattice(&xs, h) < 1e-4);
    }

    #[test]
    fn chi_square_examples() {
        let (stat, p) = chi_square_uniform(&[100, 100, 100, 100]).unwrap();
        assert_eq!(stat, 0.0);
        assert_relative_eq!(p, 1.0);
        let (_, p) = chi_square_uniform(&[400, 0, 0, 0]).unwrap();
        assert!(p < 1e-10);
        assert!(chi_square_uniform(&[0, 0]).is_err());
    }

    #[test]
    fn jackknife_ratio_of_equal_groups_has_zero_error() {
        let (est, se) = jackknife_ratio(&[2.0, 2.0, 2.0], &[4.0, 4.0, 4.0]);
        assert_eq!(est, 0.5);
        assert!(se.abs() < 1e-15);
    }

    #[test]
    fn jackknife_matches_standard_error_of_mean() {
        // equal denominators reduce to the usual SE of the mean
        let num = [1.0, 3.0, 2.0, 6.0, 4.0];
        let den = [1.0; 5];
        let (est, se) = jackknife_ratio(&num, &den);
        let mean = 16.0 / 5.0;
        let s2: f64 = num.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert_relative_eq!(est, mean);
        assert_relative_eq!(se, (s2 / 5.0).sqrt(), max_relative = 1e-12);
    }
}
