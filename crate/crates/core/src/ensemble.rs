//! Ensemble parameters, configurations, energies, partition functions and
//! the exact law of the charge-one count.
//!
//! Densities are taken with respect to Lebesgue measure on angles, so the
//! circle has total mass `2 pi`.
//!
//! The partition function factorizes as
//!
//! ```text
//! Z_N(X) = (2 pi)^{floor((N+1)/2)} X^{N mod 2} prod_{n=1}^{floor(N/2)} ((2X)^2 + c_n^2) / c_n,
//! c_n = N - 2n + 1,
//! ```
//!
//! so `Z_N(TX) / Z_N(X) = T^{N mod 2} prod_n (1 - q_n + q_n T^2)` with
//! `q_n = 4X^2 / (4X^2 + c_n^2)`: the charge-one count is the parity plus
//! twice a Poisson-binomial variable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::angle::{chord, wrap};
use crate::quadrature::CompensatedSum;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Total charge `N`, fugacity `X`, and the inverse temperature, which is
/// pinned to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    n: usize,
    fugacity: f64,
}

impl EnsembleParams {
    pub fn new(n: usize, fugacity: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("total charge N must be at least 1".into()));
        }
        if !(fugacity >= 0.0) || !fugacity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fugacity must be finite and nonnegative, got {fugacity}"
            )));
        }
        Ok(Self { n, fugacity })
    }

    /// Accepts an explicit inverse temperature; only `b = 1` is solvable.
    pub fn with_inverse_temperature(n: usize, fugacity: f64, b: f64) -> Result<Self> {
        if b != 1.0 {
            return Err(Error::InvalidParameter(format!("inverse temperature is fixed at 1, got {b}")));
        }
        Self::new(n, fugacity)
    }

    /// Fugacity scaled with the system size, `X = N r`.
    pub fn from_ratio(n: usize, r: f64) -> Result<Self> {
        Self::new(n, n as f64 * r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fugacity(&self) -> f64 {
        self.fugacity
    }

    pub fn inverse_temperature(&self) -> f64 {
        1.0
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.n)
    }

    /// `c_n = N - 2n + 1` for `n = 1..=floor(N/2)`.
    fn odd_factors(&self) -> impl Iterator<Item = f64> {
        let n = self.n;
        (1..=n / 2).map(move |k| (n - 2 * k + 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Angular positions of the charge-one (`xi`) and charge-two (`zeta`)
/// particles, normalized into `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    xi: Vec<f64>,
    zeta: Vec<f64>,
}

impl Configuration {
    /// Normalizes the angles and rejects exact coincidences.
    pub fn new(xi: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        let xi: Vec<f64> = xi.into_iter().map(wrap).collect();
        let zeta: Vec<f64> = zeta.into_iter().map(wrap).collect();
        if let Some(&bad) = xi.iter().chain(&zeta).find(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(format!("angle {bad} is not finite")));
        }
        let mut all: Vec<f64> = xi.iter().chain(&zeta).copied().collect();
        all.sort_by(f64::total_cmp);
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::CoincidentParticles(w[0]));
        }
        Ok(Self { xi, zeta })
    }

    /// As [`Configuration::new`], additionally checking `L + 2M = N`.
    pub fn for_params(params: &EnsembleParams, xi: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        let c = Self::new(xi, zeta)?;
        if c.total_charge() != params.n() {
            return Err(Error::ChargeMismatch {
                l: c.l(),
                m: c.m(),
                total: c.total_charge(),
                expected: params.n(),
            });
        }
        Ok(c)
    }

    /// Skips validation; callers guarantee wrapped, distinct angles.
    pub(crate) fn from_raw(xi: Vec<f64>, zeta: Vec<f64>) -> Self {
        Self { xi, zeta }
    }

    pub fn charge_one(&self) -> &[f64] {
        &self.xi
    }

    pub fn charge_two(&self) -> &[f64] {
        &self.zeta
    }

    pub(crate) fn charge_one_mut(&mut self) -> &mut Vec<f64> {
        &mut self.xi
    }

    pub(crate) fn charge_two_mut(&mut self) -> &mut Vec<f64> {
        &mut self.zeta
    }

    pub fn l(&self) -> usize {
        self.xi.len()
    }

    pub fn m(&self) -> usize {
        self.zeta.len()
    }

    pub fn total_charge(&self) -> usize {
        self.l() + 2 * self.m()
    }

    /// Rigid rotation of every particle by `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            xi: self.xi.iter().map(|a| wrap(a + phi)).collect(),
            zeta: self.zeta.iter().map(|a| wrap(a + phi)).collect(),
        }
    }
}

/// `log Z_N(X)`, accumulated term by term. Odd `N` with `X = 0` gives `-inf`.
pub fn log_partition(params: &EnsembleParams) -> f64 {
    let n = params.n();
    let x = params.fugacity();
    let mut acc = CompensatedSum::new();
    acc.add(n.div_ceil(2) as f64 * LN_2PI);
    if params.parity() == Parity::Odd {
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc.add(x.ln());
    }
    let four_x2 = 4.0 * x * x;
    for c in params.odd_factors() {
        acc.add((four_x2 + c * c).ln() - c.ln());
    }
    acc.value()
}

/// Pair energy `-q_a q_b log|e^{ia} - e^{ib}|`.
pub(crate) fn pair_energy(charge_product: f64, a: f64, b: f64) -> f64 {
    -charge_product * chord(a, b).ln()
}

/// Interaction energy `E_{L,M}`; `+inf` if two particles coincide.
pub fn energy(config: &Configuration) -> f64 {
    let xi = config.charge_one();
    let zeta = config.charge_two();
    let mut e = CompensatedSum::new();
    let pairs = xi
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| xi[..k].iter().map(move |&b| (1.0, a, b)))
        .chain(zeta.iter().enumerate().flat_map(|(k, &a)| zeta[..k].iter().map(move |&b| (4.0, a, b))))
        .chain(zeta.iter().flat_map(|&a| xi.iter().map(move |&b| (2.0, a, b))));
    for (q, a, b) in pairs {
        let term = pair_energy(q, a, b);
        if term == f64::INFINITY {
            return f64::INFINITY;
        }
        e.add(term);
    }
    e.value()
}

/// `log(X^L e^{-E} / (L! M!))`, the log of the labeled grand-canonical weight.
pub fn log_boltzmann_weight(config: &Configuration, fugacity: f64) -> f64 {
    let l = config.l();
    let m = config.m();
    let x_term = if l == 0 { 0.0 } else { l as f64 * fugacity.ln() };
    x_term - energy(config) - ln_gamma(l as f64 + 1.0) - ln_gamma(m as f64 + 1.0)
}

/// `X^L e^{-E} / (L! M!)`; divide by `Z_N(X)` for the density with respect
/// to Lebesgue measure on `[-pi, pi)^{L+M}`.
pub fn boltzmann_weight(config: &Configuration, fugacity: f64) -> f64 {
    log_boltzmann_weight(config, fugacity).exp()
}

/// Probability generating function `E[T^L] = Z_N(TX) / Z_N(X)`.
pub fn count_pgf(params: &EnsembleParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("PGF argument must be >= 0, got {t}")));
    }
    let x = params.fugacity();
    if params.parity() == Parity::Odd && x == 0.0 {
        return Err(Error::EmptyEnsemble(params.n()));
    }
    let mut acc = CompensatedSum::new();
    if params.parity() == Parity::Odd {
        if t == 0.0 {
            return Ok(0.0);
        }
        acc.add(t.ln());
    }
    let four_x2 = 4.0 * x * x;
    for c in params.odd_factors() {
        let c2 = c * c;
        acc.add(((four_x2 * t * t + c2) / (four_x2 + c2)).ln());
    }
    Ok(acc.value().exp())
}

/// `N -> infinity` PGF at fixed `X > 0`: `cosh(pi X T)/cosh(pi X)` for even
/// `N`, `sinh(pi X T)/sinh(pi X)` for odd.
pub fn limiting_pgf(fugacity: f64, t: f64, parity: Parity) -> f64 {
    let a = PI * fugacity * t;
    let b = PI * fugacity;
    match parity {
        // cosh ratio written to stay finite for large X
        Parity::Even => (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp()),
        Parity::Odd => (a - b).exp() * (1.0 - (-2.0 * a).exp()) / (1.0 - (-2.0 * b).exp()),
    }
}

/// Exact law of the charge-one count: `L = parity + 2 sum_n Bernoulli(q_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    parity: Parity,
    q: Vec<f64>,
}

impl CountDistribution {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        let x = params.fugacity();
        if params.parity() == Parity::Odd && x == 0.0 {
            return Err(Error::EmptyEnsemble(params.n()));
        }
        let four_x2 = 4.0 * x * x;
        let q = params.odd_factors().map(|c| four_x2 / (four_x2 + c * c)).collect();
        Ok(Self { parity: params.parity(), q })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `q_n` in order `n = 1..=floor(N/2)`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn mean(&self) -> f64 {
        let s: CompensatedSum = self.q.iter().copied().collect();
        self.parity.as_usize() as f64 + 2.0 * s.value()
    }

    pub fn variance(&self) -> f64 {
        let s: CompensatedSum = self.q.iter().map(|q| q * (1.0 - q)).collect();
        4.0 * s.value()
    }

    /// `T^parity prod_n (1 - q_n + q_n T^2)`.
    pub fn pgf(&self, t: f64) -> f64 {
        let base = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => t,
        };
        self.q.iter().fold(base, |acc, &q| acc * (1.0 - q + q * t * t))
    }

    /// Probabilities of `L = parity + 2k` for `k = 0..=floor(N/2)`.
    pub fn pmf(&self) -> Vec<(usize, f64)> {
        let mut p = vec![1.0];
        for &q in &self.q {
            let mut next = vec![0.0; p.len() + 1];
            for (k, &pk) in p.iter().enumerate() {
                next[k] += pk * (1.0 - q);
                next[k + 1] += pk * q;
            }
            p = next;
        }
        let base = self.parity.as_usize();
        p.into_iter().enumerate().map(|(k, pk)| (base + 2 * k, pk)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let heads = self.q.iter().filter(|&&q| rng.random::<f64>() < q).count();
        self.parity.as_usize() + 2 * heads
    }
}

pub fn mean_count(params: &EnsembleParams) -> Result<f64> {
    Ok(CountDistribution::new(params)?.mean())
}

pub fn var_count(params: &EnsembleParams) -> Result<f64> {
    Ok(CountDistribution::new(params)?.variance())
}

/// `lim E[L_N(Nr)]/N = 2r arctan(1/(2r))`.
pub fn limiting_mean_fraction(r: f64) -> f64 {
    2.0 * r * (1.0 / (2.0 * r)).atan()
}

/// `lim var(L_N(Nr))/N = 2r arctan(1/(2r)) - 4r^2/(1 + 4r^2)`.
pub fn limiting_var_fraction(r: f64) -> f64 {
    let r2 = r * r;
    limiting_mean_fraction(r) - 4.0 * r2 / (1.0 + 4.0 * r2)
}

/// One exact draw of `L` from a seeded ChaCha stream.
pub fn sample_count_exact(params: &EnsembleParams, seed: u64) -> Result<usize> {
    let dist = CountDistribution::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dist.sample(&mut rng))
}

/// Centering and scale of the charge-one count CLT at `X = N r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltScaling {
    pub mu: f64,
    pub sigma: f64,
}

impl CltScaling {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "CLT scaling needs r > 0 and N >= 2 (got r = {r}, N = {n})"
            )));
        }
        let n = n as f64;
        Ok(Self { mu: n * limiting_mean_fraction(r), sigma: (n * limiting_var_fraction(r)).sqrt() })
    }

    pub fn standardize(&self, l: f64) -> f64 {
        (l - self.mu) / self.sigma
    }
}

/// `(L - mu_N) / sigma_N`.
pub fn clt_standardize(l: usize, n: usize, r: f64) -> Result<f64> {
    Ok(CltScaling::new(n, r)?.standardize(l as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, LN_2};

    fn params(n: usize, x: f64) -> EnsembleParams {
        EnsembleParams::new(n, x).unwrap()
    }

    /// Direct linear-space product, kept independent of `log_partition`.
    fn partition_product(n: usize, x: f64) -> f64 {
        let mut z = (2.0 * PI).powi(n.div_ceil(2) as i32);
        if n % 2 == 1 {
            z *= x;
        }
        for k in 1..=n / 2 {
            let c = (n - 2 * k + 1) as f64;
            z *= ((2.0 * x).powi(2) + c * c) / c;
        }
        z
    }

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::new(0, 1.0).is_err());
        assert!(EnsembleParams::new(3, -0.1).is_err());
        assert!(EnsembleParams::new(3, f64::NAN).is_err());
        assert!(EnsembleParams::with_inverse_temperature(4, 1.0, 2.0).is_err());
        let p = EnsembleParams::with_inverse_temperature(4, 1.0, 1.0).unwrap();
        assert_eq!(p.inverse_temperature(), 1.0);
        assert_eq!(EnsembleParams::from_ratio(10, 0.5).unwrap().fugacity(), 5.0);
    }

    #[test]
    fn log_partition_examples() {
        assert_relative_eq!(log_partition(&params(2, 1.0)), (10.0 * PI).ln(), max_relative = 1e-14);
        assert_relative_eq!(log_partition(&params(1, 1.0)), (2.0 * PI).ln(), max_relative = 1e-14);
        assert_relative_eq!(
            log_partition(&params(4, 0.0)),
            ((2.0 * PI).powi(2) * 3.0).ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(log_partition(&params(3, 1.0)), (16.0 * PI * PI).ln(), max_relative = 1e-14);
        assert_eq!(log_partition(&params(5, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn log_partition_matches_direct_product() {
        for n in 1..=40 {
            for &x in &[0.0, 0.5, 1.0, 2.0] {
                let direct = partition_product(n, x);
                let via_log = log_partition(&params(n, x)).exp();
                if direct == 0.0 {
                    assert_eq!(via_log, 0.0);
                } else {
                    assert_relative_eq!(via_log, direct, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn log_partition_survives_large_n() {
        let v = log_partition(&EnsembleParams::from_ratio(2000, 0.5).unwrap());
        assert!(v.is_finite() && v > 700.0);
    }

    #[test]
    fn energy_examples() {
        let single_two = Configuration::new(vec![], vec![0.4]).unwrap();
        assert_eq!(energy(&single_two), 0.0);
        let pair = Configuration::new(vec![0.0, PI], vec![]).unwrap();
        assert_relative_eq!(energy(&pair), -LN_2, max_relative = 1e-14);
        let cross = Configuration::new(vec![0.0], vec![PI]).unwrap();
        assert_relative_eq!(energy(&cross), -2.0 * LN_2, max_relative = 1e-14);
    }

    #[test]
    fn configuration_rejects_coincidence_and_wraps() {
        assert!(matches!(
            Configuration::new(vec![0.5], vec![0.5 + 2.0 * PI]),
            Err(Error::CoincidentParticles(_))
        ));
        let c = Configuration::new(vec![3.5 * PI], vec![]).unwrap();
        assert_relative_eq!(c.charge_one()[0], -0.5 * PI, epsilon = 1e-14);
        let p = params(4, 1.0);
        assert!(Configuration::for_params(&p, vec![0.1], vec![1.0]).is_err());
        assert!(Configuration::for_params(&p, vec![0.1, 0.2], vec![1.0]).is_ok());
    }

    #[test]
    fn energy_is_infinite_at_coincidence() {
        let c = Configuration::from_raw(vec![0.3, 0.3], vec![]);
        assert_eq!(energy(&c), f64::INFINITY);
        assert_eq!(boltzmann_weight(&c, 1.0), 0.0);
    }

    #[test]
    fn boltzmann_weight_examples() {
        let single_two = Configuration::new(vec![], vec![1.1]).unwrap();
        for &x in &[0.0, 0.3, 7.0] {
            assert_relative_eq!(boltzmann_weight(&single_two, x), 1.0, max_relative = 1e-14);
        }
        let pair = Configuration::new(vec![0.0, PI], vec![]).unwrap();
        assert_relative_eq!(boltzmann_weight(&pair, 1.0), 1.0, max_relative = 1e-14);
        assert_eq!(boltzmann_weight(&pair, 0.0), 0.0);
    }

    #[test]
    fn pgf_examples() {
        for &(n, x) in &[(2, 1.0), (5, 0.3), (12, 4.0)] {
            assert_relative_eq!(count_pgf(&params(n, x), 1.0).unwrap(), 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(count_pgf(&params(2, 1.0), 0.0).unwrap(), 0.2, max_relative = 1e-14);
        // the tail of the product costs a relative 3/N at T = 2
        let v = count_pgf(&params(4000, 1.0), 2.0).unwrap();
        let lim = (2.0 * PI).cosh() / PI.cosh();
        assert!(((v - lim) / lim).abs() < 2e-3);
        assert!(matches!(count_pgf(&params(3, 0.0), 0.5), Err(Error::EmptyEnsemble(3))));
    }

    #[test]
    fn limiting_pgf_examples() {
        for &x in &[0.1, 1.0, 50.0] {
            assert_relative_eq!(limiting_pgf(x, 1.0, Parity::Even), 1.0, max_relative = 1e-14);
            assert_relative_eq!(limiting_pgf(x, 1.0, Parity::Odd), 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(limiting_pgf(1.0, 0.0, Parity::Even), 1.0 / PI.cosh(), max_relative = 1e-14);
        assert!((limiting_pgf(1.0, 0.0, Parity::Even) - 0.086266).abs() < 1e-6);
        assert_eq!(limiting_pgf(1.0, 0.0, Parity::Odd), 0.0);
        assert_relative_eq!(
            limiting_pgf(1.0, 0.5, Parity::Odd),
            (0.5 * PI).sinh() / PI.sinh(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn count_distribution_examples() {
        let d = CountDistribution::new(&params(2, 0.5)).unwrap();
        assert_eq!(d.q(), &[0.5]);
        assert_relative_eq!(d.mean(), 1.0);
        assert_relative_eq!(d.variance(), 1.0);

        let d = CountDistribution::new(&params(2, 0.0)).unwrap();
        assert_eq!(d.q(), &[0.0]);
        assert_eq!(d.mean(), 0.0);
        assert_eq!(d.variance(), 0.0);

        let d = CountDistribution::new(&params(4, 1.0)).unwrap();
        assert_relative_eq!(d.q()[0], 4.0 / 13.0, max_relative = 1e-15);
        assert_relative_eq!(d.q()[1], 4.0 / 5.0, max_relative = 1e-15);

        assert!(CountDistribution::new(&params(7, 0.0)).is_err());
    }

    #[test]
    fn pmf_sums_to_one_and_matches_pgf() {
        let d = CountDistribution::new(&params(9, 1.7)).unwrap();
        let pmf = d.pmf();
        let total: f64 = pmf.iter().map(|(_, p)| p).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-14);
        assert!(pmf.iter().all(|(l, _)| l % 2 == 1));
        let t: f64 = 0.7;
        let via_pmf: f64 = pmf.iter().map(|&(l, p)| p * t.powi(l as i32)).sum();
        assert_relative_eq!(via_pmf, d.pgf(t), max_relative = 1e-13);
    }

    #[test]
    fn mean_matches_summand_form_for_even_n() {
        // sum_{n=1}^{N/2} 8X^2 / (4X^2 + (2n-1)^2)
        for n in (2..=200).step_by(2) {
            for &x in &[0.25, 1.0, 3.5] {
                let closed: f64 = (1..=n / 2)
                    .map(|k| {
                        let c = (2 * k - 1) as f64;
                        8.0 * x * x / (4.0 * x * x + c * c)
                    })
                    .sum();
                let var_closed: f64 = (1..=n / 2)
                    .map(|k| {
                        let c = (2 * k - 1) as f64;
                        (4.0 * x * c / (4.0 * x * x + c * c)).powi(2)
                    })
                    .sum();
                let p = params(n, x);
                assert_relative_eq!(mean_count(&p).unwrap(), closed, max_relative = 1e-13);
                assert_relative_eq!(var_count(&p).unwrap(), var_closed, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn mean_and_variance_limits() {
        let p = EnsembleParams::from_ratio(2000, 0.5).unwrap();
        assert!((mean_count(&p).unwrap() / 2000.0 - FRAC_PI_4).abs() < 1e-4);
        let p0 = params(10, 0.0);
        assert_eq!(mean_count(&p0).unwrap(), 0.0);
        assert_eq!(var_count(&p0).unwrap(), 0.0);
    }

    #[test]
    fn limiting_fraction_examples() {
        assert_relative_eq!(limiting_mean_fraction(0.5), FRAC_PI_4, max_relative = 1e-15);
        assert!((limiting_mean_fraction(1e6) - 1.0).abs() < 1e-6);
        assert_relative_eq!(limiting_var_fraction(0.5), FRAC_PI_4 - 0.5, max_relative = 1e-14);
        for &r in &[1e-3, 0.1, 1.0, 30.0] {
            let m = limiting_mean_fraction(r);
            assert!(m > 0.0 && m < 1.0);
            assert!(limiting_var_fraction(r) >= 0.0);
        }
    }

    #[test]
    fn midpoint_rule_error_is_second_order() {
        // |mean/N - limit| should drop ~4x per doubling of N
        let r = 0.5;
        let err = |n: usize| {
            (mean_count(&EnsembleParams::from_ratio(n, r).unwrap()).unwrap() / n as f64
                - limiting_mean_fraction(r))
            .abs()
        };
        for &n in &[100usize, 200, 400, 800] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 4.0).abs() < 0.1, "N = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn exact_sampler_edge_cases() {
        let p = params(10, 0.0);
        for seed in 0..50 {
            assert_eq!(sample_count_exact(&p, seed).unwrap(), 0);
        }
        let p = params(11, 2.5);
        let d = CountDistribution::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let l = d.sample(&mut rng);
            assert_eq!(l % 2, 1);
            assert!(l <= 11);
        }
    }

    #[test]
    fn exact_sampler_two_particle_frequency() {
        // q_1 = 4/5 at N = 2, X = 1
        let d = CountDistribution::new(&params(2, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 200_000;
        let hits = (0..draws).filter(|_| d.sample(&mut rng) == 2).count();
        let p_hat = hits as f64 / draws as f64;
        let se = (0.8 * 0.2 / draws as f64).sqrt();
        assert!((p_hat - 0.8).abs() < 3.0 * se, "{p_hat}");
    }

    #[test]
    fn clt_standardization_examples() {
        let s = CltScaling::new(1000, 0.5).unwrap();
        assert_relative_eq!(s.mu, 250.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(s.sigma * s.sigma, 1000.0 * (FRAC_PI_4 - 0.5), max_relative = 1e-13);
        assert_eq!(s.standardize(s.mu), 0.0);
        assert!(clt_standardize(10, 1, 0.5).is_err());
        assert!(clt_standardize(10, 100, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn pgf_factorization_matches_closed_form(n in 1usize..=200, x in 0.01f64..5.0, t in 0.0f64..3.0) {
            let p = params(n, x);
            let d = CountDistribution::new(&p).unwrap();
            let a = count_pgf(&p, t).unwrap();
            let b = d.pgf(t);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{} vs {}", a, b);
        }

        #[test]
        fn energy_is_rotation_and_permutation_invariant(
            xi in proptest::collection::vec(-3.1f64..3.1, 0..5),
            zeta in proptest::collection::vec(-3.1f64..3.1, 0..4),
            phi in -10.0f64..10.0,
        ) {
            let Ok(c) = Configuration::new(xi.clone(), zeta.clone()) else { return Ok(()); };
            let e = energy(&c);
            prop_assume!(e.is_finite());
            let e_rot = energy(&c.rotated(phi));
            prop_assert!((e - e_rot).abs() <= 1e-10 * (1.0 + e.abs()));
            let mut xi_r = xi; xi_r.reverse();
            let mut zeta_r = zeta; zeta_r.reverse();
            let c_perm = Configuration::new(xi_r, zeta_r).unwrap();
            // reversal changes summation order only; allow last-ulp drift
            prop_assert!((e - energy(&c_perm)).abs() <= 1e-13 * (1.0 + e.abs()));
        }
    }
}
