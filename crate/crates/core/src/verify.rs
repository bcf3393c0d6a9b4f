//! Numbered acceptance checks, shared by the test suite and `twocharge verify`.
//!
//! Each criterion returns one or more [`CheckOutcome`] rows. A row either
//! passes, fails, or is informational (reported but not gating).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

use crate::ensemble::{
    count_pgf, limiting_mean_fraction, limiting_pgf, limiting_var_fraction, log_partition, mean_count,
    var_count, CltScaling, CountDistribution, EnsembleParams, Parity,
};
use crate::kernels::{
    coe_limit_entry, cse_limit_entry, normalized_finite_entry, scaled_entry, Entry, Gauge, ScaledKernelQuery,
    Species, DISTINCT_ENTRIES,
};
use crate::oracle::{moment_matrix_log_pfaffian, oracle_intensity, oracle_partition, OracleSettings};
use crate::pfaffian::{intensity, pfaffian, AntisymmetricMatrix, CorrelationQuery};
use crate::quadrature::GaussLegendre;
use crate::sampler::{
    density_uniformity, estimate_count_probability, estimate_intensity, estimate_mean_count, run_chains,
    ChainConfig, PairKind,
};
use crate::stats::{ks_distance_lattice, ks_distance_normal};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Everything except the brute-force partition integrals and the sampler.
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    /// Criterion number, with a letter for sub-checks.
    pub criterion: String,
    /// The identity or law under test.
    pub anchor: &'static str,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub status: Status,
    pub detail: String,
}

impl CheckOutcome {
    fn at_most(criterion: &str, anchor: &'static str, name: String, measured: f64, threshold: f64) -> Self {
        let status = if measured <= threshold { Status::Pass } else { Status::Fail };
        Self { criterion: criterion.into(), anchor, name, measured, threshold, status, detail: String::new() }
    }

    fn at_least(criterion: &str, anchor: &'static str, name: String, measured: f64, threshold: f64) -> Self {
        let status = if measured >= threshold { Status::Pass } else { Status::Fail };
        Self { criterion: criterion.into(), anchor, name, measured, threshold, status, detail: String::new() }
    }

    fn info(criterion: &str, anchor: &'static str, name: String, measured: f64, threshold: f64) -> Self {
        Self {
            criterion: criterion.into(),
            anchor,
            name,
            measured,
            threshold,
            status: Status::Info,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn from_error(criterion: &str, anchor: &'static str, name: String, err: crate::Error) -> Self {
        Self {
            criterion: criterion.into(),
            anchor,
            name,
            measured: f64::NAN,
            threshold: f64::NAN,
            status: Status::Fail,
            detail: err.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:<4} {:<28} {}: measured {:.3e}, threshold {:.3e}",
            self.status.as_str(),
            self.criterion,
            self.anchor,
            self.name,
            self.measured,
            self.threshold
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn catch(
    criterion: &str,
    anchor: &'static str,
    f: impl FnOnce() -> Result<Vec<CheckOutcome>>,
) -> Vec<CheckOutcome> {
    f().unwrap_or_else(|e| vec![CheckOutcome::from_error(criterion, anchor, "evaluation".into(), e)])
}

/// Runs every criterion for the level, in order.
pub fn run(level: Level) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    if level == Level::Full {
        out.extend(partition_brute_force());
    }
    out.extend(moment_matrix_consistency());
    out.extend(global_statistics());
    out.extend(limiting_pgf_check());
    out.extend(count_clt());
    out.extend(kernel_scaling_limits());
    out.extend(density_identities());
    out.extend(endpoint_recovery());
    out.extend(pfaffian_engine());
    out.extend(two_particle_end_to_end());
    if level == Level::Full {
        out.extend(sampler_correctness());
    }
    out
}

const A1: &str = "partition-product";

/// 1: brute-force sector integrals against the closed-form partition function.
pub fn partition_brute_force() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for n in 1..=4 {
        for &x in &[0.5, 1.0, 2.0] {
            let name = format!("N={n} X={x}");
            let start = Instant::now();
            let est = match oracle_partition(n, x, &OracleSettings::default_for(n)) {
                Ok(e) => e,
                Err(e) => {
                    out.push(CheckOutcome::from_error("1", A1, name, e));
                    continue;
                }
            };
            let secs = start.elapsed().as_secs_f64();
            let exact = log_partition(&EnsembleParams::new(n, x).expect("valid")).exp();
            let diff = (est.value - exact).abs();
            let rel = diff / exact;
            let in_se = diff <= 3.0 * est.error;
            let mut row = CheckOutcome::at_most("1", A1, name, rel, 5e-3).with_detail(format!(
                "oracle {:.8} +- {:.2e}, closed form {:.8}, {:.2} SE, {:.2} s",
                est.value,
                est.error,
                exact,
                diff / est.error,
                secs
            ));
            if !in_se || secs >= 60.0 {
                row.status = Status::Fail;
            }
            out.push(row);
        }
    }
    out
}

const A2: &str = "moment-matrix-pfaffian";

/// 2: `Pf(X^2 A_N + B_N)` against the closed form, in log space.
pub fn moment_matrix_consistency() -> Vec<CheckOutcome> {
    catch("2", A2, || {
        let start = Instant::now();
        let mut worst: f64 = 0.0;
        let mut worst_phase: f64 = 0.0;
        for n in (2..=200).step_by(2) {
            for &x in &[0.5, 1.0, 2.0] {
                let (la, phase) = moment_matrix_log_pfaffian(n, x)?;
                let lz = log_partition(&EnsembleParams::new(n, x)?);
                worst = worst.max(((la - lz) / lz).abs());
                worst_phase = worst_phase.max((phase - Complex64::new(1.0, 0.0)).norm());
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let mut row = CheckOutcome::at_most("2", A2, "even N<=200, log relative error".into(), worst, 1e-10)
            .with_detail(format!("max phase defect {worst_phase:.1e}, {secs:.3} s"));
        if secs >= 1.0 || worst_phase > 1e-12 {
            row.status = Status::Fail;
        }
        Ok(vec![row])
    })
}

const A3: &str = "count-mean-variance-limit";

/// 3: mean and variance fractions at `N = 2000`.
pub fn global_statistics() -> Vec<CheckOutcome> {
    catch("3", A3, || {
        let n = 2000;
        let mut out = Vec::new();
        for &r in &[0.1, 0.5, 2.0] {
            let p = EnsembleParams::from_ratio(n, r)?;
            let me = (mean_count(&p)? / n as f64 - limiting_mean_fraction(r)).abs();
            let ve = (var_count(&p)? / n as f64 - limiting_var_fraction(r)).abs();
            out.push(CheckOutcome::at_most("3", A3, format!("mean fraction r={r}"), me, 1e-4));
            out.push(CheckOutcome::at_most("3", A3, format!("variance fraction r={r}"), ve, 1e-3));
        }
        Ok(out)
    })
}

const A4: &str = "limiting-count-pgf";

/// 4: finite-`N` PGF against `cosh(pi X T)/cosh(pi X)`.
pub fn limiting_pgf_check() -> Vec<CheckOutcome> {
    catch("4", A4, || {
        let p = EnsembleParams::new(4000, 1.0)?;
        let mut out = Vec::new();
        for &t in &[0.5, 2.0] {
            let v = count_pgf(&p, t)?;
            let lim = limiting_pgf(1.0, t, Parity::Even);
            let err = (v - lim).abs();
            out.push(
                CheckOutcome::at_most("4", A4, format!("N=4000 X=1 T={t}, absolute"), err, 1e-2)
                    .with_detail(format!("finite {v:.6}, limit {lim:.6}, relative {:.2e}", err / lim)),
            );
        }
        Ok(out)
    })
}

const A5: &str = "count-clt";

/// 5: KS distance of standardized exact count samples to the normal law.
/// `L` lives on a lattice of step 2, so the primary statistic compares the
/// empirical CDF with the normal CDF at cell edges.
pub fn count_clt() -> Vec<CheckOutcome> {
    catch("5", A5, || {
        let (n, r) = (1000, 0.5);
        let start = Instant::now();
        let dist = CountDistribution::new(&EnsembleParams::from_ratio(n, r)?)?;
        let scaling = CltScaling::new(n, r)?;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let z: Vec<f64> = (0..100_000).map(|_| scaling.standardize(dist.sample(&mut rng) as f64)).collect();
        let ks = ks_distance_lattice(&z, 2.0 / scaling.sigma);
        let secs = start.elapsed().as_secs_f64();
        let raw = ks_distance_normal(&z);
        let mut row = CheckOutcome::at_most("5", A5, "KS, 1e5 samples, N=1000 r=0.5".into(), ks, 0.015)
            .with_detail(format!("continuity-corrected; uncorrected {raw:.4}; {secs:.2} s"));
        if secs >= 5.0 {
            row.status = Status::Fail;
        }
        Ok(vec![row])
    })
}

fn entry_label(s: Species, t: Species, e: Entry) -> String {
    format!("{e:?}{}{}", s.charge(), t.charge())
}

const A6: &str = "kernel-scaling-limit";

/// 6: `(2 pi / N)` times rescaled finite kernels at `N = 4000` against the
/// quadrature limit.
pub fn kernel_scaling_limits() -> Vec<CheckOutcome> {
    catch("6", A6, || {
        let (n, r) = (4000, 0.5);
        let mut out = Vec::new();
        for &(s, t, e) in DISTINCT_ENTRIES.iter() {
            let mut worst: f64 = 0.0;
            for &d in &[0.0, 0.5, 1.0, 2.0] {
                let f = normalized_finite_entry(s, t, e, n, r, d, 0.0)?;
                let g = scaled_entry(&ScaledKernelQuery { s, t, entry: e, r, theta: d, psi: 0.0 })?;
                worst = worst.max((f - g).norm());
            }
            out.push(CheckOutcome::at_most("6", A6, entry_label(s, t, e), worst, 1e-3));
        }
        Ok(out)
    })
}

const A7: &str = "local-density";

fn scaled_s(s: Species, r: f64) -> Result<f64> {
    Ok(scaled_entry(&ScaledKernelQuery { s, t: s, entry: Entry::S, r, theta: 0.0, psi: 0.0 })?.re)
}

/// 7: one-point scaled densities and the charge sum rule.
pub fn density_identities() -> Vec<CheckOutcome> {
    catch("7", A7, || {
        let mut out = Vec::new();
        for &r in &[0.05f64, 0.5, 5.0] {
            let s11 = scaled_s(Species::One, r)?;
            let s22 = scaled_s(Species::Two, r)?;
            let at = r * (1.0 / (2.0 * r)).atan();
            out.push(CheckOutcome::at_most("7", A7, format!("S11 r={r}"), (s11 - 2.0 * at).abs(), 1e-10));
            out.push(CheckOutcome::at_most("7", A7, format!("S22 r={r}"), (s22 - (0.5 - at)).abs(), 1e-10));
            out.push(CheckOutcome::at_most(
                "7",
                A7,
                format!("S11+2S22 r={r}"),
                (s11 + 2.0 * s22 - 1.0).abs(),
                1e-10,
            ));
        }
        Ok(out)
    })
}

const A8: &str = "coe-cse-endpoints";

fn endpoint_error(
    r: f64,
    s: Species,
    t: Species,
    e: Entry,
    limit: fn(Species, Species, Entry, f64) -> Complex64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=30 {
        let d = 0.1 * k as f64;
        let v = scaled_entry(&ScaledKernelQuery { s, t, entry: e, r, theta: d, psi: 0.0 })?;
        worst = worst.max((v - limit(s, t, e, d)).norm());
    }
    Ok(worst)
}

/// 8: scaled kernels at `r = 100` and `r = 0.01` against the COE and CSE
/// closed forms over `delta` in `[0, 3]`.
pub fn endpoint_recovery() -> Vec<CheckOutcome> {
    catch("8", A8, || {
        use Entry::*;
        use Species::*;
        let mut out = Vec::new();
        let tol = 2e-2;
        out.push(CheckOutcome::at_most(
            "8a",
            A8,
            "COE S11 at r=100".into(),
            endpoint_error(100.0, One, One, S, coe_limit_entry)?,
            tol,
        ));
        out.push(CheckOutcome::at_most(
            "8b",
            A8,
            "CSE S22 at r=0.01".into(),
            endpoint_error(0.01, Two, Two, S, cse_limit_entry)?,
            tol,
        ));
        for e in [DS, IS] {
            out.push(CheckOutcome::at_most(
                "8c",
                A8,
                format!("COE {e:?}11 at r=100"),
                endpoint_error(100.0, One, One, e, coe_limit_entry)?,
                tol,
            ));
        }
        for e in [DS, IS] {
            let err = endpoint_error(0.01, Two, Two, e, cse_limit_entry)?;
            out.push(CheckOutcome::at_most("8d", A8, format!("CSE {e:?}22 at r=0.01"), err, tol));
        }
        out.push(
            CheckOutcome::info(
                "8",
                A8,
                "CSE IS11 sign residual at r=0.01".into(),
                endpoint_error(0.01, One, One, IS, cse_limit_entry)?,
                tol,
            )
            .with_detail("convergence is O(r delta); not gating"),
        );
        let gating: Vec<&CheckOutcome> = out.iter().filter(|c| c.status != Status::Info).collect();
        let worst = gating.iter().map(|c| c.measured).fold(0.0, f64::max);
        let summary = CheckOutcome::at_most("8", A8, "all gating endpoint checks".into(), worst, tol);
        out.push(summary);
        Ok(out)
    })
}

const A9: &str = "pfaffian-engine";

fn random_antisymmetric(dim: usize, rng: &mut ChaCha8Rng) -> Result<AntisymmetricMatrix> {
    AntisymmetricMatrix::from_upper(dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn to_dmatrix(a: &AntisymmetricMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_row_slice(a.dim(), a.dim(), a.as_slice())
}

/// 9: `Pf^2 = det`, congruence, and gauge invariance of intensities.
pub fn pfaffian_engine() -> Vec<CheckOutcome> {
    catch("9", A9, || {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut out = Vec::new();

        let mut worst: f64 = 0.0;
        for k in 0..100 {
            let dim = 2 * (1 + k % 10);
            let a = random_antisymmetric(dim, &mut rng)?;
            let pf = pfaffian(&a);
            let det = to_dmatrix(&a).determinant();
            worst = worst.max((pf * pf - det).norm() / det.norm());
        }
        out.push(CheckOutcome::at_most("9a", A9, "Pf^2 = det, 100 matrices to 20x20".into(), worst, 1e-8));

        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let dim = 2 * (1 + k % 10);
            let a = random_antisymmetric(dim, &mut rng)?;
            let q = nalgebra::DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let qaqt = &q * to_dmatrix(&a) * q.transpose();
            let b = AntisymmetricMatrix::from_fn(dim, |i, j| qaqt[(i, j)])?;
            let expect = q.determinant() * pfaffian(&a);
            worst = worst.max((pfaffian(&b) - expect).norm() / expect.norm());
        }
        out.push(CheckOutcome::at_most("9b", A9, "Pf(QAQ^T) = det Q Pf A, relative".into(), worst, 1e-8));

        let (n, x) = (8, 2.0);
        let r = x / n as f64;
        let mut worst: f64 = 0.0;
        for (l, m) in [(1, 0), (0, 1), (2, 0), (1, 1)] {
            for _ in 0..10 {
                let xs: Vec<f64> = (0..l).map(|_| rng.random_range(-PI..PI)).collect();
                let zs: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
                let raw = intensity(&CorrelationQuery::new(xs.clone(), zs.clone(), n, x, Gauge::Raw)?)?;
                let res = intensity(&CorrelationQuery::new(xs, zs, n, x, Gauge::Rescaled { r })?)?;
                worst = worst.max((raw - res).abs());
            }
        }
        out.push(CheckOutcome::at_most(
            "9c",
            A9,
            "raw vs rescaled intensities, N=8 X=2".into(),
            worst,
            1e-10,
        ));
        Ok(out)
    })
}

const A10: &str = "two-particle-intensities";

/// 10: Pfaffian intensities at `N = 2` against the sector formulas.
pub fn two_particle_end_to_end() -> Vec<CheckOutcome> {
    catch("10", A10, || {
        let mut out = Vec::new();
        for &x in &[0.5, 1.0, 2.0] {
            let mut worst: f64 = 0.0;
            for k in 0..20 {
                let d = -PI + (k as f64 + 0.5) * (2.0 * PI / 20.0);
                let cases: [(Vec<f64>, Vec<f64>); 3] =
                    [(vec![d], vec![]), (vec![], vec![d]), (vec![0.0, d], vec![])];
                for (xs, zs) in cases {
                    let q = CorrelationQuery::new(xs.clone(), zs.clone(), 2, x, Gauge::Raw)?;
                    let pf = intensity(&q)?;
                    let exact = oracle_intensity(2, x, &xs, &zs)?;
                    worst = worst.max((pf - exact).abs());
                }
            }
            out.push(CheckOutcome::at_most("10", A10, format!("R10, R01, R20 at X={x}"), worst, 1e-8));
        }
        Ok(out)
    })
}

const A11: &str = "sampler";

/// Bin average of `R_{2,0}(0, s)` over `s` in `[lo, hi]`.
fn binned_pair_intensity(n: usize, x: f64, lo: f64, hi: f64) -> Result<f64> {
    let rule = GaussLegendre::new(8);
    let mut acc = 0.0;
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let s = lo + (hi - lo) * t;
        acc += w * intensity(&CorrelationQuery::new(vec![0.0, s], vec![], n, x, Gauge::Raw)?)?;
    }
    Ok(acc)
}

/// Settings used by criterion 11 for the `N = 8` run.
pub fn sampler_config(n: usize, x: f64, steps: u64, seed: u64) -> Result<ChainConfig> {
    let mut cfg = ChainConfig::new(EnsembleParams::new(n, x)?);
    cfg.steps = steps;
    cfg.seed = seed;
    Ok(cfg)
}

/// 11: sampler counts, densities and pair intensities against exact values.
pub fn sampler_correctness() -> Vec<CheckOutcome> {
    catch("11", A11, || {
        let start = Instant::now();
        let mut out = Vec::new();

        let run = run_chains(&sampler_config(2, 1.0, 1_000_000, 11)?)?;
        let p2 = estimate_count_probability(&run, 2);
        let z = (p2.value - 0.8).abs() / p2.se;
        out.push(
            CheckOutcome::at_most("11a", A11, "N=2 X=1 P(L=2), in SE".into(), z, 3.0)
                .with_detail(format!("{:.5} +- {:.5} vs 0.8", p2.value, p2.se)),
        );

        let (n, x) = (8, 2.0);
        let cfg = sampler_config(n, x, 1_000_000, 12)?;
        let run = run_chains(&cfg)?;
        let exact = mean_count(&EnsembleParams::new(n, x)?)?;
        let el = estimate_mean_count(&run);
        let z = (el.value - exact).abs() / el.se;
        out.push(
            CheckOutcome::at_most("11b", A11, "N=8 X=2 E[L], in SE".into(), z, 3.0)
                .with_detail(format!("{:.5} +- {:.5} vs {exact:.5}", el.value, el.se)),
        );

        for sp in [Species::One, Species::Two] {
            let (stat, p) = density_uniformity(&run.merged, sp)?;
            out.push(
                CheckOutcome::at_least(
                    "11c",
                    A11,
                    format!("species {} density chi-square p", sp.charge()),
                    p,
                    0.01,
                )
                .with_detail(format!("statistic {stat:.2}, {} degrees of freedom", cfg.density_bins - 1)),
            );
        }

        let bins = estimate_intensity(&run, PairKind::OneOne)?;
        let mut within = 0;
        for b in &bins {
            let exact = binned_pair_intensity(n, x, b.lo, b.hi)?;
            if (b.estimate - exact).abs() <= 3.0 * b.se {
                within += 1;
            }
        }
        let frac = within as f64 / bins.len() as f64;
        out.push(
            CheckOutcome::at_least("11d", A11, "R20 bins within 3 SE (fraction)".into(), frac, 0.9)
                .with_detail(format!("{within}/{} bins", bins.len())),
        );

        let secs = start.elapsed().as_secs_f64();
        out.push(
            CheckOutcome::at_most("11e", A11, "runtime, seconds".into(), secs, 600.0)
                .with_detail(format!("max energy drift {:.1e}", run.merged.max_energy_drift)),
        );
        Ok(out)
    })
}
