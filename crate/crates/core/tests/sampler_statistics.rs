use std::f64::consts::PI;

use twocharge::ensemble::{CountDistribution, EnsembleParams};
use twocharge::sampler::{
    estimate_count_probability, estimate_intensity, run_chains, spacing_histogram, ChainConfig, PairKind,
    SpacingGroup,
};

fn config(n: usize, x: f64, steps: u64, seed: u64) -> ChainConfig {
    let mut cfg = ChainConfig::new(EnsembleParams::new(n, x).unwrap());
    cfg.steps = steps;
    cfg.seed = seed;
    cfg
}

#[test]
fn count_distribution_at_four() {
    let params = EnsembleParams::new(4, 1.5).unwrap();
    let run = run_chains(&config(4, 1.5, 400_000, 3)).unwrap();
    for (l, p) in CountDistribution::new(&params).unwrap().pmf() {
        let est = estimate_count_probability(&run, l);
        assert!((est.value - p).abs() < 4.0 * est.se.max(1e-4), "L={l}: {} +- {} vs {p}", est.value, est.se);
    }
}

#[test]
fn antipodal_pair_intensity_at_two() {
    let run = run_chains(&config(2, 1.0, 1_000_000, 5)).unwrap();
    let bins = estimate_intensity(&run, PairKind::OneOne).unwrap();
    let last = bins.last().unwrap();
    // bin-averaged X^2 2 sin(s/2) / Z_2 with Z_2 = 10 pi
    let exact = 4.0 * ((last.lo / 2.0).cos() - (last.hi / 2.0).cos()) / (last.hi - last.lo) / (10.0 * PI);
    assert!((exact - 1.0 / (5.0 * PI)).abs() < 1e-3);
    assert!((last.estimate - exact).abs() < 3.0 * last.se, "{} +- {} vs {exact}", last.estimate, last.se);
    assert!(!last.underfilled);
}

#[test]
fn bin_width_bias_shrinks_with_the_bin() {
    // R vanishes at s = 0 with slope 1 / (10 pi), so the first bin read as a
    // point value at s = 0 carries a bias of about w / (20 pi)
    let mut biases = Vec::new();
    for bins in [8, 16] {
        let mut cfg = config(2, 1.0, 2_000_000, 9);
        cfg.pair_bins = bins;
        let run = run_chains(&cfg).unwrap();
        let first = estimate_intensity(&run, PairKind::OneOne).unwrap()[0];
        assert_eq!(first.lo, 0.0);
        biases.push(first.estimate);
    }
    let ratio = biases[0] / biases[1];
    assert!((ratio - 2.0).abs() < 0.4, "bias ratio {ratio}, {biases:?}");
}

#[test]
fn charge_two_gas_repels_more_than_the_mixed_gas() {
    let mut cse = config(16, 0.0, 300_000, 21);
    cse.chains = 4;
    let mut mixed = config(16, 32.0, 300_000, 22);
    mixed.chains = 4;
    let cse = spacing_histogram(&run_chains(&cse).unwrap().merged, SpacingGroup::Two);
    let mixed = spacing_histogram(&run_chains(&mixed).unwrap().merged, SpacingGroup::Pooled);
    assert!(cse.bins[0].2 < mixed.bins[0].2, "{} vs {}", cse.bins[0].2, mixed.bins[0].2);
}
