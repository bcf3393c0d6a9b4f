//! Pfaffians of complex antisymmetric matrices and the `(l, m)`-point
//! intensities built from the matrix kernels.

use num_complex::Complex64;

use crate::angle::wrap;
use crate::kernels::{FiniteKernel, Gauge, MatrixKernel, ScaledKernel, Species};
use crate::{Error, Result};

/// Relative antisymmetry tolerance accepted by the constructors.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Largest imaginary residue `|Im| / (1 + |Re|)` tolerated in an intensity.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

/// Even-dimensional complex matrix with `A = -A^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl AntisymmetricMatrix {
    /// Checks antisymmetry to `1e-12 max(1, max|A|)` and then averages `A`
    /// with `-A^T` so the stored matrix is exactly antisymmetric.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim % 2 == 1 {
            return Err(Error::OddDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut out = data.clone();
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                let defect = (a + b).norm();
                if defect > ANTISYMMETRY_TOL * scale {
                    return Err(Error::NotAntisymmetric(defect));
                }
                let avg = 0.5 * (a - b);
                out[i * dim + j] = avg;
                out[j * dim + i] = -avg;
            }
        }
        Ok(Self { dim, data: out })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::new(dim, data)
    }

    /// Fills the strict upper triangle from `f` and mirrors it.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// Parlett–Reid elimination. Returns the 2x2 pivots `A[k][k+1]` and the
/// number of row/column exchanges, or `None` when a zero pivot column makes
/// the Pfaffian vanish.
fn eliminate(a: &AntisymmetricMatrix) -> Option<(Vec<Complex64>, usize)> {
    let n = a.dim;
    let mut m = a.data.clone();
    let at = |i: usize, j: usize| i * n + j;
    let mut pivots = Vec::with_capacity(n / 2);
    let mut swaps = 0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = m[at(k + 1, k)].norm();
        for i in k + 2..n {
            let v = m[at(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                m.swap(at(k + 1, j), at(kp, j));
            }
            for i in 0..n {
                m.swap(at(i, k + 1), at(i, kp));
            }
            swaps += 1;
        }
        let p = m[at(k, k + 1)];
        if p == Complex64::new(0.0, 0.0) {
            return None;
        }
        pivots.push(p);
        let zero = Complex64::new(0.0, 0.0);
        if k + 2 < n && (k + 2..n).any(|j| m[at(k, j)] != zero) {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| m[at(k, j)] / p).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| m[at(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[at(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    Some((pivots, swaps))
}

fn swap_sign(swaps: usize) -> f64 {
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `Pf(A)` by skew-symmetric `L T L^T` elimination with partial pivoting.
pub fn pfaffian(a: &AntisymmetricMatrix) -> Complex64 {
    match eliminate(a) {
        Some((pivots, swaps)) => pivots.iter().product::<Complex64>() * swap_sign(swaps),
        None => Complex64::new(0.0, 0.0),
    }
}

/// `(log|Pf(A)|, Pf(A)/|Pf(A)|)`; the modulus is `-inf` when `Pf(A) = 0`.
pub fn log_pfaffian(a: &AntisymmetricMatrix) -> (f64, Complex64) {
    match eliminate(a) {
        Some((pivots, swaps)) => {
            let mut log_abs = 0.0;
            let mut phase = Complex64::new(swap_sign(swaps), 0.0);
            for p in pivots {
                let r = p.norm();
                log_abs += r.ln();
                phase *= p / r;
            }
            (log_abs, phase)
        }
        None => (f64::NEG_INFINITY, Complex64::new(0.0, 0.0)),
    }
}

/// Charge-one arguments `x` and charge-two arguments `z` of an `(l, m)`
/// intensity at finite `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationQuery {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub n: usize,
    pub fugacity: f64,
    pub gauge: Gauge,
}

impl CorrelationQuery {
    /// Wraps every angle into `[-pi, pi)`.
    pub fn new(x: Vec<f64>, z: Vec<f64>, n: usize, fugacity: f64, gauge: Gauge) -> Result<Self> {
        let x = x.into_iter().map(wrap).collect();
        let z = z.into_iter().map(wrap).collect();
        let q = Self { x, z, n, fugacity, gauge };
        validate_arguments(&q.x, &q.z)?;
        Ok(q)
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            x: self.x.iter().map(|a| wrap(a + c)).collect(),
            z: self.z.iter().map(|a| wrap(a + c)).collect(),
            ..self.clone()
        }
    }
}

fn validate_arguments(x: &[f64], z: &[f64]) -> Result<()> {
    if x.is_empty() && z.is_empty() {
        return Err(Error::InvalidParameter("an intensity needs at least one argument".into()));
    }
    for list in [x, z] {
        if let Some(&bad) = list.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(format!("angle {bad} is not finite")));
        }
        let mut sorted = list.to_vec();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::CoincidentParticles(w[0]));
        }
    }
    Ok(())
}

/// Block matrix `[K^{s_i, s_j}(a_i, a_j)]` over the arguments `x` (charge
/// one) followed by `z` (charge two).
pub fn assemble_with<K: MatrixKernel + ?Sized>(
    kernel: &K,
    x: &[f64],
    z: &[f64],
) -> Result<AntisymmetricMatrix> {
    let args: Vec<(Species, f64)> =
        x.iter().map(|&a| (Species::One, a)).chain(z.iter().map(|&a| (Species::Two, a))).collect();
    let k = args.len();
    let dim = 2 * k;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, &(si, ai)) in args.iter().enumerate() {
        for (j, &(sj, aj)) in args.iter().enumerate() {
            let b = kernel.block(si, sj, ai, aj)?;
            for (u, row) in b.iter().enumerate() {
                for (v, &val) in row.iter().enumerate() {
                    data[(2 * i + u) * dim + 2 * j + v] = val;
                }
            }
        }
    }
    AntisymmetricMatrix::new(dim, data)
}

pub fn assemble(q: &CorrelationQuery) -> Result<AntisymmetricMatrix> {
    let kernel = FiniteKernel::new(q.n, q.fugacity, q.gauge)?;
    assemble_with(&kernel, &q.x, &q.z)
}

fn real_part(pf: Complex64) -> Result<f64> {
    if pf.im.abs() > IMAGINARY_RESIDUE_TOL * (1.0 + pf.re.abs()) {
        return Err(Error::ComplexIntensity { re: pf.re, im: pf.im });
    }
    Ok(pf.re)
}

/// `R_{l,m}` for an arbitrary kernel family.
pub fn intensity_with<K: MatrixKernel + ?Sized>(kernel: &K, x: &[f64], z: &[f64]) -> Result<f64> {
    validate_arguments(x, z)?;
    real_part(pfaffian(&assemble_with(kernel, x, z)?))
}

/// Finite-`N` intensity `R_{l,m}(x, z)`, a density with respect to Lebesgue
/// measure in each argument.
pub fn intensity(q: &CorrelationQuery) -> Result<f64> {
    real_part(pfaffian(&assemble(q)?))
}

/// Scaling-limit intensity at ratio `r`; arguments in mean-spacing units.
pub fn scaled_intensity(x: &[f64], z: &[f64], r: f64) -> Result<f64> {
    intensity_with(&ScaledKernel::new(r)?, x, z)
}
