//! Brute-force ground truth for small systems.
//!
//! Nothing here uses the closed forms it is meant to check: partition sums
//! are integrated sector by sector, the moment-matrix Pfaffian is formed from
//! its antidiagonal integrals, and `|det V|` of the confluent Vandermonde
//! matrix is taken from an LU factorization.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, TAU};

use crate::angle::{chord, sgn, wrap};
use crate::ensemble::{Configuration, EnsembleParams};
use crate::pfaffian::{log_pfaffian, AntisymmetricMatrix};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Largest `N` accepted by [`oracle_partition`].
pub const MAX_ORACLE_N: usize = 4;

/// Size beyond which the Vandermonde determinant is poorly conditioned.
pub const VANDERMONDE_WARN_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMethod {
    /// Tensor Gauss–Legendre on `[0, 2 pi)` per remaining dimension.
    Tensor { points_per_dim: usize },
    /// Randomly shifted rank-1 lattice (Kronecker) points.
    QuasiMonteCarlo { samples: usize, shifts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub method: OracleMethod,
    pub seed: u64,
}

impl OracleSettings {
    /// Quadrature for `N <= 2`, where the reduced integrand is smooth on the
    /// open interval, and `10^7` quasi-random points otherwise.
    pub fn default_for(n: usize) -> Self {
        let method = if n <= 2 {
            OracleMethod::Tensor { points_per_dim: 64 }
        } else {
            OracleMethod::QuasiMonteCarlo { samples: 10_000_000, shifts: 16 }
        };
        Self { method, seed: 0x5eed }
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            OracleMethod::Tensor { points_per_dim } if points_per_dim < 16 => {
                Err(Error::InvalidParameter(format!("need >= 16 points per dimension, got {points_per_dim}")))
            }
            OracleMethod::QuasiMonteCarlo { samples, shifts } if shifts < 2 || samples < shifts => {
                Err(Error::InvalidParameter(format!(
                    "need >= 2 shifts and samples >= shifts, got {samples} samples, {shifts} shifts"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Estimate with a standard error (quasi-MC) or an error bound (quadrature).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Generator of the `d`-dimensional golden lattice: `phi_d^{-k}` for
/// `k = 1..=d`, where `phi_d` is the positive root of `x^{d+1} = x + 1`.
fn kronecker_alpha(d: usize) -> Vec<f64> {
    let mut phi = 2.0_f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| phi.powi(-(k as i32))).collect()
}

/// Randomized quasi-MC estimate of `int_{[0, 2pi)^dim} f`, with the
/// standard error taken from the spread over independent random shifts.
pub fn qmc_integrate<F>(dim: usize, samples: usize, shifts: usize, seed: u64, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim == 0 {
        return Estimate { value: f(&[]), error: 0.0 };
    }
    let alpha = kronecker_alpha(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<Vec<f64>> =
        (0..shifts).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let per_shift = samples / shifts;
    let volume = TAU.powi(dim as i32);
    let means: Vec<f64> = offsets
        .par_iter()
        .map(|off| {
            let mut point = vec![0.0; dim];
            let mut acc = 0.0;
            for k in 0..per_shift {
                let kf = k as f64;
                for j in 0..dim {
                    point[j] = TAU * (off[j] + kf * alpha[j]).fract();
                }
                acc += f(&point);
            }
            volume * acc / per_shift as f64
        })
        .collect();
    let m = shifts as f64;
    let value = means.iter().sum::<f64>() / m;
    let var = means.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (m - 1.0);
    Estimate { value, error: (var / m).sqrt() }
}

/// Tensor Gauss–Legendre estimate of `int_{[0, 2pi)^dim} f`; the error is
/// the difference from the rule with half as many points, floored at a
/// rounding level of `1e-13` relative.
pub fn tensor_integrate<F: Fn(&[f64]) -> f64>(dim: usize, points: usize, f: F) -> Estimate {
    let full = tensor_rule(dim, points, &f);
    let half = tensor_rule(dim, points / 2, &f);
    Estimate { value: full, error: (full - half).abs().max(1e-13 * full.abs()) }
}

fn tensor_rule<F: Fn(&[f64]) -> f64>(dim: usize, points: usize, f: &F) -> f64 {
    let rule = GaussLegendre::new(points);
    let nodes: Vec<f64> = rule.nodes().iter().map(|t| TAU * t).collect();
    let weights: Vec<f64> = rule.weights().iter().map(|w| TAU * w).collect();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..dim {
            point[j] = nodes[idx[j]];
            w *= weights[idx[j]];
        }
        total += w * f(&point);
        let mut j = 0;
        loop {
            if j == dim {
                return total;
            }
            idx[j] += 1;
            if idx[j] < points {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `e^{-E}` for `charges[0]` fixed at angle 0 and the rest at `angles`.
fn reduced_boltzmann(charges: &[f64], angles: &[f64]) -> f64 {
    let at = |k: usize| if k == 0 { 0.0 } else { angles[k - 1] };
    let mut w = 1.0;
    for i in 0..charges.len() {
        for j in 0..i {
            w *= chord(at(i), at(j)).powf(charges[i] * charges[j]);
        }
    }
    w
}

/// Sectors `(L, M)` with `L + 2M = N`.
fn sectors(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=n / 2).map(move |m| (n - 2 * m, m))
}

/// `Z_N(X)` by direct integration of every sector, with one particle pinned
/// at angle 0 by rotation invariance.
pub fn oracle_partition(n: usize, fugacity: f64, settings: &OracleSettings) -> Result<Estimate> {
    EnsembleParams::new(n, fugacity)?;
    if n > MAX_ORACLE_N {
        return Err(Error::OracleTooLarge { n, max: MAX_ORACLE_N });
    }
    settings.validate()?;
    let secs: Vec<(f64, Vec<f64>)> = sectors(n)
        .filter(|&(l, _)| l == 0 || fugacity > 0.0)
        .map(|(l, m)| {
            let log_pref = l as f64 * if l == 0 { 0.0 } else { fugacity.ln() }
                - ln_gamma(l as f64 + 1.0)
                - ln_gamma(m as f64 + 1.0);
            let charges = std::iter::repeat_n(1.0, l).chain(std::iter::repeat_n(2.0, m)).collect();
            (TAU * log_pref.exp(), charges)
        })
        .collect();
    match settings.method {
        OracleMethod::Tensor { points_per_dim } => {
            let mut value = 0.0;
            let mut error = 0.0;
            for (pref, charges) in &secs {
                let dim = charges.len() - 1;
                let e = tensor_integrate(dim, points_per_dim, |a| reduced_boltzmann(charges, a));
                value += pref * e.value;
                error += pref * e.error;
            }
            Ok(Estimate { value, error })
        }
        OracleMethod::QuasiMonteCarlo { samples, shifts } => {
            // the same shifts for every sector keep the error estimate honest
            // for the total
            let dims: Vec<usize> = secs.iter().map(|(_, c)| c.len() - 1).collect();
            let max_dim = dims.iter().copied().max().unwrap_or(0);
            let total = qmc_integrate(max_dim.max(1), samples, shifts, settings.seed, |a| {
                secs.iter()
                    .zip(&dims)
                    .map(|((pref, charges), &d)| {
                        pref * reduced_boltzmann(charges, &a[..d]) * TAU.powi(d as i32)
                    })
                    .sum()
            });
            let scale = TAU.powi(max_dim.max(1) as i32);
            Ok(Estimate { value: total.value / scale, error: total.error / scale })
        }
    }
}

/// The antisymmetric moment matrix `X^2 A_N + B_N`: only antidiagonal
/// entries survive, `8 pi X^2 / c + 2 pi c` at `(n, N + 1 - n)` with
/// `c = N - 2n + 1`.
pub fn moment_matrix(n: usize, fugacity: f64) -> Result<AntisymmetricMatrix> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    EnsembleParams::new(n, fugacity)?;
    let x2 = fugacity * fugacity;
    AntisymmetricMatrix::from_fn(n, |i, j| {
        if i + j + 1 == n {
            let c = n as f64 - 2.0 * (i as f64 + 1.0) + 1.0;
            Complex64::new(8.0 * PI * x2 / c + 2.0 * PI * c, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `log Pf(X^2 A_N + B_N)` together with the phase of the Pfaffian.
pub fn moment_matrix_log_pfaffian(n: usize, fugacity: f64) -> Result<(f64, Complex64)> {
    Ok(log_pfaffian(&moment_matrix(n, fugacity)?))
}

/// `Pf(X^2 A_N + B_N)`; overflows to `inf` for large `N`, where
/// [`moment_matrix_log_pfaffian`] should be used instead.
pub fn moment_matrix_partition(n: usize, fugacity: f64) -> Result<f64> {
    let (la, phase) = moment_matrix_log_pfaffian(n, fugacity)?;
    Ok(phase.re * la.exp())
}

/// Confluent Vandermonde determinant on `e^{i theta}`: one column
/// `(z^k)_k` per charge-one particle and a pair `(z^k)_k, (k z^{k-1})_k` per
/// charge-two particle.
pub fn vandermonde_det(config: &Configuration) -> Complex64 {
    let n = config.total_charge();
    if n > VANDERMONDE_WARN_N {
        warn!("confluent Vandermonde determinant at N = {n} is poorly conditioned");
    }
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let power_col = |z: Complex64| (0..n).map(|k| z.powu(k as u32)).collect::<Vec<_>>();
    for &a in config.charge_one() {
        cols.push(power_col(Complex64::from_polar(1.0, a)));
    }
    for &a in config.charge_two() {
        let z = Complex64::from_polar(1.0, a);
        cols.push(power_col(z));
        cols.push(
            (0..n)
                .map(|k| if k == 0 { Complex64::new(0.0, 0.0) } else { z.powu(k as u32 - 1) * k as f64 })
                .collect(),
        );
    }
    DMatrix::from_fn(n, n, |i, j| cols[j][i]).determinant()
}

/// Both sides of `|zeta - xi| = -i (zeta - xi) xi^{-1/2} zeta^{-1/2} sgn(theta - psi)`
/// for `zeta = e^{i theta}`, `xi = e^{i psi}`, square roots on the principal
/// branch.
pub fn sgn_factorization_sides(theta: f64, psi: f64) -> Result<(f64, Complex64)> {
    let (theta, psi) = (wrap(theta), wrap(psi));
    if theta == psi {
        return Err(Error::CoincidentParticles(theta));
    }
    let zeta = Complex64::from_polar(1.0, theta);
    let xi = Complex64::from_polar(1.0, psi);
    let lhs = (zeta - xi).norm();
    let inv_sqrt = |z: Complex64| Complex64::new(1.0, 0.0) / z.sqrt();
    let rhs = Complex64::new(0.0, -1.0) * (zeta - xi) * inv_sqrt(xi) * inv_sqrt(zeta) * sgn(theta - psi);
    Ok((lhs, rhs))
}

pub fn sgn_factorization_check(theta: f64, psi: f64) -> Result<bool> {
    let (lhs, rhs) = sgn_factorization_sides(theta, psi)?;
    Ok((rhs - lhs).norm() <= 1e-12)
}

/// Exact `(l, m)`-intensities of the two-particle system, as densities with
/// respect to Lebesgue measure: `R_{1,0} = 8X^2/Z_2`, `R_{0,1} = 1/Z_2`,
/// `R_{2,0}(a, b) = X^2 |e^{ia} - e^{ib}| / Z_2`, and zero for every other
/// `(l, m)`.
pub fn oracle_intensity(n: usize, fugacity: f64, x: &[f64], z: &[f64]) -> Result<f64> {
    if n != 2 {
        return Err(Error::OracleTooLarge { n, max: 2 });
    }
    EnsembleParams::new(n, fugacity)?;
    let x2 = fugacity * fugacity;
    let z2 = TAU * (4.0 * x2 + 1.0);
    Ok(match (x.len(), z.len()) {
        (1, 0) => 8.0 * x2 / z2,
        (0, 1) => 1.0 / z2,
        (2, 0) => x2 * chord(x[0], x[1]) / z2,
        (0, 0) => return Err(Error::InvalidParameter("an intensity needs at least one argument".into())),
        _ => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{energy, log_partition};
    use approx::assert_relative_eq;

    #[test]
    fn alpha_solves_its_polynomial() {
        for d in 1..=3 {
            let a = kronecker_alpha(d);
            let phi = 1.0 / a[0];
            assert_relative_eq!(phi.powi(d as i32 + 1), phi + 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(1.0 / kronecker_alpha(1)[0], (1.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn single_particle_partition() {
        let e = oracle_partition(1, 1.5, &OracleSettings::default_for(1)).unwrap();
        assert_relative_eq!(e.value, TAU * 1.5, max_relative = 1e-14);
    }

    #[test]
    fn two_particle_partition() {
        let e = oracle_partition(2, 1.0, &OracleSettings::default_for(2)).unwrap();
        assert!((e.value - 10.0 * PI).abs() < 1e-6, "{e:?}");
        assert!(e.error < 1e-4);
        let e0 = oracle_partition(2, 0.0, &OracleSettings::default_for(2)).unwrap();
        assert_relative_eq!(e0.value, TAU, max_relative = 1e-14);
    }

    #[test]
    fn small_qmc_run_is_consistent() {
        let settings =
            OracleSettings { method: OracleMethod::QuasiMonteCarlo { samples: 200_000, shifts: 8 }, seed: 1 };
        let e = oracle_partition(3, 1.0, &settings).unwrap();
        let exact = log_partition(&EnsembleParams::new(3, 1.0).unwrap()).exp();
        assert!((e.value - exact).abs() < 5.0 * e.error + 1e-2 * exact, "{e:?} vs {exact}");
    }

    #[test]
    fn oracle_rejects_large_n_and_bad_settings() {
        assert!(matches!(
            oracle_partition(5, 1.0, &OracleSettings::default_for(5)),
            Err(Error::OracleTooLarge { n: 5, max: 4 })
        ));
        let bad = OracleSettings { method: OracleMethod::Tensor { points_per_dim: 4 }, seed: 0 };
        assert!(oracle_partition(2, 1.0, &bad).is_err());
    }

    #[test]
    fn moment_matrix_examples() {
        assert_relative_eq!(moment_matrix_partition(2, 1.0).unwrap(), 10.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(moment_matrix_partition(4, 0.0).unwrap(), TAU * TAU * 3.0, max_relative = 1e-14);
        assert!(moment_matrix(3, 1.0).is_err());
    }

    #[test]
    fn moment_matrix_pfaffian_is_positive() {
        for n in (2..=40).step_by(2) {
            let (_, phase) = moment_matrix_log_pfaffian(n, 0.7).unwrap();
            assert!((phase - Complex64::new(1.0, 0.0)).norm() < 1e-14, "N = {n}: {phase}");
        }
    }

    #[test]
    fn vandermonde_examples() {
        // xi = (1, -1)
        let c = Configuration::new(vec![0.0, -PI], vec![]).unwrap();
        let d = vandermonde_det(&c);
        assert!((d - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
        let c = Configuration::new(vec![], vec![0.9]).unwrap();
        assert!((vandermonde_det(&c) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn vandermonde_modulus_is_boltzmann_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=8usize {
            for _ in 0..100 {
                let m = rng.random_range(0..=n / 2);
                let l = n - 2 * m;
                let xi = (0..l).map(|_| rng.random_range(-PI..PI)).collect();
                let zeta = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
                let c = Configuration::new(xi, zeta).unwrap();
                let v = vandermonde_det(&c).norm();
                assert_relative_eq!(v, (-energy(&c)).exp(), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn sgn_factorization_examples() {
        let (lhs, rhs) = sgn_factorization_sides(1.0, 0.0).unwrap();
        assert_relative_eq!(lhs, 2.0 * 0.5f64.sin(), max_relative = 1e-15);
        assert!((rhs - lhs).norm() < 1e-15);
        assert!(sgn_factorization_check(0.0, PI - 1e-6).unwrap());
        assert!(sgn_factorization_check(-PI, PI - 1e-9).unwrap());
        let (a, _) = sgn_factorization_sides(0.3, 2.0).unwrap();
        let (b, _) = sgn_factorization_sides(2.0, 0.3).unwrap();
        assert_eq!(a, b);
        assert!(sgn_factorization_check(0.5, 0.5).is_err());
    }

    #[test]
    fn two_particle_intensities() {
        assert_relative_eq!(
            oracle_intensity(2, 1.0, &[0.1], &[]).unwrap(),
            4.0 / (5.0 * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            oracle_intensity(2, 1.0, &[], &[0.1]).unwrap(),
            1.0 / (10.0 * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            oracle_intensity(2, 1.0, &[0.0, PI], &[]).unwrap(),
            1.0 / (5.0 * PI),
            max_relative = 1e-14
        );
        assert_eq!(oracle_intensity(2, 1.0, &[0.0], &[1.0]).unwrap(), 0.0);
        assert!(oracle_intensity(4, 1.0, &[0.0], &[]).is_err());
    }
}
