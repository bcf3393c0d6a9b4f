//! Two-particle intensities against raw quasi-MC moments of bin counts.
//!
//! At `N = 2` the ensemble is a mixture of two labeled charge-one particles
//! with weight `X^2 |e^{ia} - e^{ib}| / 2` and one charge-two particle with
//! weight 1. Moments of the counts `N_A`, `N_B` are integrated directly over
//! those sectors and compared with integrals of the intensities.

use std::f64::consts::{PI, TAU};

use twocharge::angle::chord;
use twocharge::kernels::Gauge;
use twocharge::oracle::{oracle_intensity, qmc_integrate};
use twocharge::pfaffian::{intensity, CorrelationQuery};
use twocharge::quadrature::GaussLegendre;

const A: (f64, f64) = (-2.5, -1.0);
const B: (f64, f64) = (0.3, 1.4);

fn inside(bin: (f64, f64), t: f64) -> bool {
    let t = if t >= PI { t - TAU } else { t };
    t >= bin.0 && t < bin.1
}

fn partition(x: f64) -> f64 {
    TAU * (4.0 * x * x + 1.0)
}

/// `E[f(xi_1, xi_2)]` restricted to the charge-one sector.
fn pair_moment(x: f64, f: impl Fn(f64, f64) -> f64 + Sync) -> (f64, f64) {
    let est = qmc_integrate(2, 1 << 22, 16, 7, |p| 0.5 * x * x * chord(p[0], p[1]) * f(p[0], p[1]));
    (est.value / partition(x), est.error / partition(x))
}

fn integrate_box(a: (f64, f64), b: (f64, f64), f: impl Fn(f64, f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(32);
    let mut acc = 0.0;
    for (&s, &ws) in rule.nodes().iter().zip(rule.weights()) {
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            acc += ws * wt * f(a.0 + (a.1 - a.0) * s, b.0 + (b.1 - b.0) * t);
        }
    }
    acc * (a.1 - a.0) * (b.1 - b.0)
}

#[test]
fn first_moments_match_one_point_intensities() {
    for x in [0.5, 1.0, 2.0] {
        let (mean, se) = pair_moment(x, |a, b| (inside(A, a) as u8 + inside(A, b) as u8) as f64);
        let r10 = oracle_intensity(2, x, &[0.0], &[]).unwrap();
        assert!((mean - r10 * (A.1 - A.0)).abs() < 4.0 * se + 1e-6, "X={x}: {mean} vs {}", r10 * (A.1 - A.0));

        let pf = intensity(&CorrelationQuery::new(vec![], vec![0.4], 2, x, Gauge::Raw).unwrap()).unwrap();
        // the charge-two sector contributes |A| / (2 pi) with probability 2 pi / Z
        let exact = (A.1 - A.0) / partition(x);
        assert!((pf * (A.1 - A.0) - exact).abs() < 1e-12);
    }
}

#[test]
fn cross_moments_match_pair_intensity() {
    for x in [0.5, 1.0, 2.0] {
        let (mean, se) = pair_moment(x, |a, b| {
            let ab = inside(A, a) && inside(B, b);
            let ba = inside(A, b) && inside(B, a);
            (ab as u8 + ba as u8) as f64
        });
        let oracle = integrate_box(A, B, |s, t| oracle_intensity(2, x, &[s, t], &[]).unwrap());
        let pf = integrate_box(A, B, |s, t| {
            intensity(&CorrelationQuery::new(vec![s, t], vec![], 2, x, Gauge::Raw).unwrap()).unwrap()
        });
        assert!((oracle - pf).abs() < 1e-10);
        assert!((mean - oracle).abs() < 4.0 * se + 1e-6, "X={x}: {mean} +- {se} vs {oracle}");
    }
}
