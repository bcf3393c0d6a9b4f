//! Matrix kernels of the two-charge Pfaffian point process.
//!
//! Every species pair `(s, t)` carries a 2x2 kernel laid out as
//!
//! ```text
//! K^{s,t}(theta, psi) = [[ DS^{s,t}(theta, psi),   S^{s,t}(theta, psi) ],
//!                        [ -S^{t,s}(psi, theta),  IS^{s,t}(theta, psi) ]]
//! ```
//!
//! with `K^{2,1}(theta, psi) = -K^{1,2}(psi, theta)^T`. Finite-`N` entries
//! (even `N` only) are sums over the half-integer frequencies `n - 1/2`, so
//! they are anti-periodic in the angle difference and angles are reduced to
//! `[-pi, pi)` before evaluation. The bulk scaling limit at `X = N r` is
//! evaluated by Gauss–Legendre quadrature on `[0, 1]`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::angle::{sgn, wrap};
use crate::quadrature::{unit_rule, CompensatedSum};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    One,
    Two,
}

impl Species {
    pub fn index(self) -> usize {
        match self {
            Species::One => 0,
            Species::Two => 1,
        }
    }

    pub fn charge(self) -> usize {
        self.index() + 1
    }

    pub fn from_charge(c: usize) -> Option<Self> {
        match c {
            1 => Some(Species::One),
            2 => Some(Species::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    S,
    DS,
    IS,
}

impl Entry {
    pub const ALL: [Entry; 3] = [Entry::S, Entry::DS, Entry::IS];
}

/// The ten distinct `(s, t, entry)` combinations; the `(2, 1)` derivative and
/// integral entries coincide with their `(1, 2)` counterparts.
pub const DISTINCT_ENTRIES: [(Species, Species, Entry); 10] = [
    (Species::One, Species::One, Entry::S),
    (Species::One, Species::One, Entry::DS),
    (Species::One, Species::One, Entry::IS),
    (Species::Two, Species::Two, Entry::S),
    (Species::Two, Species::Two, Entry::DS),
    (Species::Two, Species::Two, Entry::IS),
    (Species::One, Species::Two, Entry::S),
    (Species::Two, Species::One, Entry::S),
    (Species::One, Species::Two, Entry::DS),
    (Species::One, Species::Two, Entry::IS),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    Raw,
    /// Diagonal congruence by `diag(sqrt(r/X), sqrt(X/r))` on charge-one rows
    /// and its inverse on charge-two rows; determinant 1.
    Rescaled {
        r: f64,
    },
}

/// One finite-`N` kernel entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub s: Species,
    pub t: Species,
    pub entry: Entry,
    pub gauge: Gauge,
    pub n: usize,
    pub fugacity: f64,
    pub theta: f64,
    pub psi: f64,
}

/// One scaling-limit entry; angles are in units of the mean spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledKernelQuery {
    pub s: Species,
    pub t: Species,
    pub entry: Entry,
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
}

pub type Block = [[Complex64; 2]; 2];

/// A family of 2x2 matrix kernels indexed by species pairs.
pub trait MatrixKernel {
    fn entry(&self, s: Species, t: Species, entry: Entry, theta: f64, psi: f64) -> Result<Complex64>;

    fn block(&self, s: Species, t: Species, theta: f64, psi: f64) -> Result<Block> {
        Ok([
            [self.entry(s, t, Entry::DS, theta, psi)?, self.entry(s, t, Entry::S, theta, psi)?],
            [-self.entry(t, s, Entry::S, psi, theta)?, self.entry(s, t, Entry::IS, theta, psi)?],
        ])
    }
}

fn check_finite(n: usize, fugacity: f64) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    if !(fugacity >= 0.0) || !fugacity.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "fugacity must be finite and nonnegative, got {fugacity}"
        )));
    }
    Ok(())
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    Ok(())
}

/// `sum_{n=1}^{N/2} f(c, den, cos((n - 1/2) delta), sin((n - 1/2) delta))`
/// with `c = 2n - 1` and `den = 4X^2 + c^2`.
fn mode_sum(n: usize, fugacity: f64, delta: f64, f: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    let four_x2 = 4.0 * fugacity * fugacity;
    let mut acc = CompensatedSum::new();
    for k in 1..=n / 2 {
        let c = (2 * k - 1) as f64;
        let (sn, cs) = (0.5 * c * delta).sin_cos();
        acc.add(f(c, four_x2 + c * c, cs, sn));
    }
    acc.value()
}

fn raw_entry(s: Species, t: Species, entry: Entry, n: usize, x: f64, theta: f64, psi: f64) -> Complex64 {
    use Entry::*;
    use Species::*;
    let (theta, psi) = (wrap(theta), wrap(psi));
    let d = theta - psi;
    let x2 = x * x;
    let real = |v: f64| Complex64::new(v, 0.0);
    match (s, t, entry) {
        (One, One, S) => real(4.0 * x2 / PI * mode_sum(n, x, d, |_, den, cs, _| cs / den)),
        (One, One, DS) => I * (x2 / PI * mode_sum(n, x, d, |c, den, _, sn| c * sn / den)),
        (One, One, IS) => {
            let sum = mode_sum(n, x, d, |c, den, _, sn| sn / (c * den));
            -I * (16.0 * x2 / PI * sum + sgn(psi - theta))
        }
        (Two, Two, S) => real(mode_sum(n, x, d, |c, den, cs, _| c * c * cs / den) / (2.0 * PI)),
        (Two, Two, DS) => I * (mode_sum(n, x, d, |c, den, _, sn| c * sn / den) / PI),
        (Two, Two, IS) => -I * (mode_sum(n, x, d, |c, den, _, sn| c * c * c * sn / den) / (4.0 * PI)),
        (One, Two, S) => real(x / (2.0 * PI) * mode_sum(n, x, d, |c, den, cs, _| c * c * cs / den)),
        (Two, One, S) => real(4.0 * x / PI * mode_sum(n, x, d, |_, den, cs, _| cs / den)),
        (One, Two, DS) | (Two, One, DS) => I * (x / PI * mode_sum(n, x, d, |c, den, _, sn| c * sn / den)),
        (One, Two, IS) | (Two, One, IS) => {
            -I * (2.0 * x / PI * mode_sum(n, x, d, |c, den, _, sn| c * sn / den))
        }
    }
}

/// Factor `D_s[a] D_t[b]` picked up by the `(a, b)` slot of `K^{s,t}`.
fn gauge_factor(s: Species, t: Species, entry: Entry, x: f64, r: f64) -> f64 {
    // D_1 = (sqrt(r/X), sqrt(X/r)), D_2 = (sqrt(X/r), sqrt(r/X))
    let d = |sp: Species, slot: usize| {
        let up = matches!((sp, slot), (Species::One, 0) | (Species::Two, 1));
        if up {
            (r / x).sqrt()
        } else {
            (x / r).sqrt()
        }
    };
    let (a, b) = match entry {
        Entry::DS => (0, 0),
        Entry::S => (0, 1),
        Entry::IS => (1, 1),
    };
    d(s, a) * d(t, b)
}

/// Finite-`N` entry in the query's gauge.
pub fn finite_entry(q: &KernelQuery) -> Result<Complex64> {
    check_finite(q.n, q.fugacity)?;
    let raw = raw_entry(q.s, q.t, q.entry, q.n, q.fugacity, q.theta, q.psi);
    match q.gauge {
        Gauge::Raw => Ok(raw),
        Gauge::Rescaled { r } => {
            check_ratio(r)?;
            if q.fugacity == 0.0 {
                return Err(Error::InvalidParameter("rescaled gauge needs X > 0".into()));
            }
            Ok(raw * gauge_factor(q.s, q.t, q.entry, q.fugacity, r))
        }
    }
}

/// Finite-`N` entry in the rescaled gauge with ratio `r`.
pub fn rescaled_entry(q: &KernelQuery, r: f64) -> Result<Complex64> {
    finite_entry(&KernelQuery { gauge: Gauge::Rescaled { r }, ..*q })
}

/// `(2 pi / N)` times the rescaled entry at `X = N r` and angles
/// `2 pi theta / N`, `2 pi psi / N`: the finite-`N` approximant of
/// [`scaled_entry`].
pub fn normalized_finite_entry(
    s: Species,
    t: Species,
    entry: Entry,
    n: usize,
    r: f64,
    theta: f64,
    psi: f64,
) -> Result<Complex64> {
    let scale = 2.0 * PI / n as f64;
    let q = KernelQuery {
        s,
        t,
        entry,
        gauge: Gauge::Rescaled { r },
        n,
        fugacity: n as f64 * r,
        theta: scale * theta,
        psi: scale * psi,
    };
    Ok(finite_entry(&q)? * scale)
}

fn unit_integral(f: impl Fn(f64) -> f64) -> f64 {
    unit_rule().integrate(f)
}

/// `sin(a t) / t`, continued to `a` at the origin.
fn sin_over_t(a: f64, t: f64) -> f64 {
    if t < 1e-8 {
        a
    } else {
        (a * t).sin() / t
    }
}

/// Bulk scaling limit of an entry at fugacity ratio `r`.
pub fn scaled_entry(q: &ScaledKernelQuery) -> Result<Complex64> {
    use Entry::*;
    use Species::*;
    check_ratio(q.r)?;
    let r = q.r;
    let r2 = r * r;
    let four_r2 = 4.0 * r2;
    let a = PI * (q.theta - q.psi);
    let real = |v: f64| Complex64::new(v, 0.0);
    let cos_int = |p: i32| unit_integral(|t| t.powi(p) * (a * t).cos() / (four_r2 + t * t));
    let sin_int = |p: i32| unit_integral(|t| t.powi(p) * (a * t).sin() / (four_r2 + t * t));
    Ok(match (q.s, q.t, q.entry) {
        (One, One, S) => real(four_r2 * cos_int(0)),
        (One, One, DS) => I * (r2 * sin_int(1)),
        (One, One, IS) => {
            let v = unit_integral(|t| sin_over_t(a, t) / (four_r2 + t * t));
            -I * (16.0 * r2 * v + 2.0 * PI * sgn(q.psi - q.theta))
        }
        (Two, Two, S) => real(0.5 * cos_int(2)),
        (Two, Two, DS) => I * sin_int(1),
        (Two, Two, IS) => -I * (0.25 * sin_int(3)),
        (One, Two, S) => real(0.5 * r * cos_int(2)),
        (Two, One, S) => real(4.0 * r * cos_int(0)),
        (One, Two, DS) | (Two, One, DS) => I * (r * sin_int(1)),
        (One, Two, IS) | (Two, One, IS) => -I * (2.0 * r * sin_int(1)),
    })
}

/// `sin(x)/x^2 - cos(x)/x`, with its Taylor series near the origin.
fn spherical_j1(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 10.0)
    } else {
        x.sin() / (x * x) - x.cos() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `Si(x) = int_0^x sin(u)/u du`.
fn sine_integral(x: f64) -> f64 {
    unit_integral(|t| sin_over_t(x, t))
}

/// `r -> infinity` (COE) limit of an entry at separation `delta`.
pub fn coe_limit_entry(s: Species, t: Species, entry: Entry, delta: f64) -> Complex64 {
    let x = PI * delta;
    match (s, t, entry) {
        (Species::One, Species::One, Entry::S) => Complex64::new(sinc(x), 0.0),
        (Species::One, Species::One, Entry::DS) => I * (0.25 * spherical_j1(x)),
        (Species::One, Species::One, Entry::IS) => -I * (4.0 * sine_integral(x) + 2.0 * PI * sgn(-delta)),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `r -> 0+` (CSE) limit of an entry at separation `delta`, including the
/// residual sign constant of `IS^{1,1}`.
pub fn cse_limit_entry(s: Species, t: Species, entry: Entry, delta: f64) -> Complex64 {
    let x = PI * delta;
    match (s, t, entry) {
        (Species::Two, Species::Two, Entry::S) => Complex64::new(0.5 * sinc(x), 0.0),
        (Species::Two, Species::Two, Entry::DS) => I * sine_integral(x),
        (Species::Two, Species::Two, Entry::IS) => -I * (0.25 * spherical_j1(x)),
        (Species::One, Species::One, Entry::IS) => -I * (2.0 * PI * sgn(-delta)),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Finite-`N` kernels at fugacity `X` in a chosen gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteKernel {
    pub n: usize,
    pub fugacity: f64,
    pub gauge: Gauge,
}

impl FiniteKernel {
    pub fn new(n: usize, fugacity: f64, gauge: Gauge) -> Result<Self> {
        check_finite(n, fugacity)?;
        if let Gauge::Rescaled { r } = gauge {
            check_ratio(r)?;
            if fugacity == 0.0 {
                return Err(Error::InvalidParameter("rescaled gauge needs X > 0".into()));
            }
        }
        Ok(Self { n, fugacity, gauge })
    }
}

impl MatrixKernel for FiniteKernel {
    fn entry(&self, s: Species, t: Species, entry: Entry, theta: f64, psi: f64) -> Result<Complex64> {
        finite_entry(&KernelQuery {
            s,
            t,
            entry,
            gauge: self.gauge,
            n: self.n,
            fugacity: self.fugacity,
            theta,
            psi,
        })
    }
}

/// Scaling-limit kernels at ratio `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledKernel {
    pub r: f64,
}

impl ScaledKernel {
    pub fn new(r: f64) -> Result<Self> {
        check_ratio(r)?;
        Ok(Self { r })
    }
}

impl MatrixKernel for ScaledKernel {
    fn entry(&self, s: Species, t: Species, entry: Entry, theta: f64, psi: f64) -> Result<Complex64> {
        scaled_entry(&ScaledKernelQuery { s, t, entry, r: self.r, theta, psi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Coe,
    Cse,
}

/// Closed-form endpoint kernels. `sign_constant = false` drops the
/// `2 pi sgn` term from `IS^{1,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitKernel {
    pub endpoint: Endpoint,
    pub sign_constant: bool,
}

impl LimitKernel {
    pub fn new(endpoint: Endpoint) -> Self {
        Self { endpoint, sign_constant: true }
    }
}

impl MatrixKernel for LimitKernel {
    fn entry(&self, s: Species, t: Species, entry: Entry, theta: f64, psi: f64) -> Result<Complex64> {
        let delta = theta - psi;
        let mut v = match self.endpoint {
            Endpoint::Coe => coe_limit_entry(s, t, entry, delta),
            Endpoint::Cse => cse_limit_entry(s, t, entry, delta),
        };
        if !self.sign_constant && (s, t, entry) == (Species::One, Species::One, Entry::IS) {
            v += I * (2.0 * PI * sgn(-delta));
        }
        Ok(v)
    }
}
