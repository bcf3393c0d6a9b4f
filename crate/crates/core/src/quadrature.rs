//! Gauss–Legendre rules and compensated summation.

use std::sync::OnceLock;

/// Number of nodes used for all scaling-limit integrals on `[0, 1]`.
pub const UNIT_INTERVAL_ORDER: usize = 64;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[order - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[order - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `\int_0^1 f(t) dt`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// `\int_a^b f(t) dt`.
    pub fn integrate_over<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        h * self.integrate(|t| f(a + h * t))
    }
}

/// Returns `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The shared 64-point rule on `[0, 1]`.
pub fn unit_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(UNIT_INTERVAL_ORDER))
}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // exact up to degree 15
        for k in 0..16 {
            let v = rule.integrate(|t| t.powi(k));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}: {v}");
        }
    }

    #[test]
    fn unit_rule_is_normalized_and_symmetric() {
        let rule = unit_rule();
        assert_eq!(rule.order(), 64);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for (a, b) in rule.nodes().iter().zip(rule.nodes().iter().rev()) {
            assert!((a + b - 1.0).abs() < 1e-14);
        }
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unit_rule_resolves_narrow_lorentzian() {
        // 4r^2 \int_0^1 dt / (4r^2 + t^2) = 2r arctan(1/(2r))
        for &r in &[0.05_f64, 0.5, 5.0] {
            let v = 4.0 * r * r * unit_rule().integrate(|t| 1.0 / (4.0 * r * r + t * t));
            let exact = 2.0 * r * (1.0 / (2.0 * r)).atan();
            assert!((v - exact).abs() < 1e-13, "r = {r}: {v} vs {exact}");
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-12).abs() < 1e-20);
    }
}
