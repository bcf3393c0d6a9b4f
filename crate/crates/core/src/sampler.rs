//! Split/merge Metropolis–Hastings sampler for the grand-canonical ensemble
//! at fixed total charge.
//!
//! States are labeled: the target density on each sector `(L, M)` is
//! `X^L e^{-E} / (L! M!)` with respect to Lebesgue measure on
//! `[-pi, pi)^{L+M}`. Three moves are used.
//!
//! * Rotate: displace one particle by a Gaussian increment.
//! * Split: replace the charge-two particle at `phi` by charge-one particles
//!   at `phi + delta` and `phi - delta`, with `delta` half-normal and below
//!   `pi/2`. The new particles go to uniformly random label slots.
//! * Merge: the reverse. A uniformly chosen unordered charge-one pair on a
//!   short arc of length `2 delta < pi` is replaced by one charge-two particle
//!   at the arc midpoint, inserted at a random label slot.
//!
//! The map `(phi, delta) -> (phi + delta, phi - delta)` has Jacobian 2.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::angle::{chord, separation, wrap};
use crate::ensemble::{energy, Configuration, EnsembleParams, Parity};
use crate::kernels::Species;
use crate::stats::{chi_square_uniform, jackknife_ratio};
use crate::{Error, Result};

/// Steps between full energy recomputations.
pub const RESYNC_INTERVAL: u64 = 10_000;

/// Upper edge of the scaled-spacing histogram.
pub const SPACING_MAX: f64 = 4.0;

/// Minimum number of recorded samples for intensity estimates.
pub const MIN_SAMPLES: u64 = 1000;

/// Bins with fewer raw pair counts than this are flagged as under-filled.
pub const UNDERFILLED_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub params: EnsembleParams,
    pub p_rotate: f64,
    pub p_split: f64,
    pub p_merge: f64,
    pub sigma_rotate: f64,
    pub sigma_split: f64,
    pub burn_in: u64,
    /// Recorded steps per chain, after burn-in.
    pub steps: u64,
    pub thin: u64,
    /// Spacing of the angular density snapshots. Much coarser than `thin`
    /// so that snapshots are close to independent for the uniformity test.
    pub density_thin: u64,
    pub chains: usize,
    pub seed: u64,
    pub density_bins: usize,
    pub pair_bins: usize,
    pub spacing_bins: usize,
}

impl ChainConfig {
    /// Defaults: move probabilities 0.8/0.1/0.1, `sigma_rotate = 2 pi / N`,
    /// `sigma_split = 2 pi / (4N)`.
    pub fn new(params: EnsembleParams) -> Self {
        let n = params.n() as f64;
        Self {
            params,
            p_rotate: 0.8,
            p_split: 0.1,
            p_merge: 0.1,
            sigma_rotate: TAU / n,
            sigma_split: TAU / (4.0 * n),
            burn_in: 10_000,
            steps: 1_000_000,
            thin: 10,
            density_thin: 1000,
            chains: 8,
            seed: 0,
            density_bins: 16,
            pair_bins: 16,
            spacing_bins: 40,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = [self.p_rotate, self.p_split, self.p_merge];
        if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "move probabilities must be nonnegative and sum to 1, got {p:?}"
            )));
        }
        if (self.p_split > 0.0) != (self.p_merge > 0.0) {
            return Err(Error::InvalidParameter(
                "split and merge must both be enabled or both disabled".into(),
            ));
        }
        if !(self.sigma_rotate > 0.0) || !(self.sigma_split > 0.0) {
            return Err(Error::InvalidParameter("proposal widths must be positive".into()));
        }
        if self.thin == 0 || self.density_thin == 0 || self.chains == 0 {
            return Err(Error::InvalidParameter("thinning and chain counts must be positive".into()));
        }
        if self.density_bins == 0 || self.pair_bins == 0 || self.spacing_bins == 0 {
            return Err(Error::InvalidParameter("histograms need at least one bin".into()));
        }
        if self.params.parity() == Parity::Odd && self.params.fugacity() == 0.0 {
            return Err(Error::EmptyEnsemble(self.params.n()));
        }
        Ok(())
    }

    fn log_move_ratio(&self) -> f64 {
        (self.p_merge / self.p_split).ln()
    }

    /// `log` of the half-normal density of `delta`.
    fn log_split_density(&self, delta: f64) -> f64 {
        let s = self.sigma_split;
        (2.0 / (s * (TAU).sqrt())).ln() - 0.5 * (delta / s).powi(2)
    }
}

/// A configuration with its cached energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    config: Configuration,
    energy: f64,
}

impl ChainState {
    pub fn new(config: Configuration) -> Self {
        let energy = energy(&config);
        Self { config, energy }
    }

    /// All charge two, evenly spaced, plus one charge-one particle for odd `N`.
    pub fn initial(params: &EnsembleParams) -> Self {
        let m = params.n() / 2;
        let zeta = (0..m).map(|k| -PI + (k as f64 + 0.5) * TAU / m as f64).collect();
        let xi = match params.parity() {
            Parity::Even => vec![],
            Parity::Odd => vec![-PI],
        };
        Self::new(Configuration::from_raw(xi, zeta))
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn l(&self) -> usize {
        self.config.l()
    }

    pub fn m(&self) -> usize {
        self.config.m()
    }

    /// Recomputes the energy and returns the drift of the cached value.
    pub fn resync(&mut self) -> f64 {
        let fresh = energy(&self.config);
        let drift = (fresh - self.energy).abs();
        self.energy = fresh;
        drift
    }

    /// Interaction of a charge-`q` particle at `angle` with every particle
    /// except `skip`.
    fn interaction(&self, q: f64, angle: f64, skip: &[(Species, usize)]) -> f64 {
        let mut e = 0.0;
        for (sp, list, q2) in
            [(Species::One, self.config.charge_one(), 1.0), (Species::Two, self.config.charge_two(), 2.0)]
        {
            for (k, &b) in list.iter().enumerate() {
                if !skip.contains(&(sp, k)) {
                    e -= q * q2 * chord(angle, b).ln();
                }
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Rotate,
    Split,
    Merge,
}

impl MoveKind {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    pub accepted: bool,
}

fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

/// Log acceptance ratio of splitting `zeta[j]` into `phi +- delta`.
pub(crate) fn split_log_ratio(state: &ChainState, cfg: &ChainConfig, j: usize, delta: f64) -> f64 {
    let x = cfg.params.fugacity();
    let l = state.l() as f64;
    let m = state.m() as f64;
    let phi = state.config.charge_two()[j];
    let (a, b) = (wrap(phi + delta), wrap(phi - delta));
    let skip = [(Species::Two, j)];
    let old = state.interaction(2.0, phi, &skip);
    let new = state.interaction(1.0, a, &skip) + state.interaction(1.0, b, &skip) - chord(a, b).ln();
    let d_energy = new - old;
    2.0 * x.ln() - d_energy + (4.0 * m).ln() - ((l + 2.0) * (l + 1.0)).ln() - cfg.log_split_density(delta)
        + cfg.log_move_ratio()
}

/// Short-arc midpoint and half-length of the pair `(a, b)`.
fn midpoint(a: f64, b: f64) -> (f64, f64) {
    let d = wrap(a - b);
    (wrap(b + 0.5 * d), 0.5 * d.abs())
}

/// Log acceptance ratio of merging `xi[i]`, `xi[k]`.
pub(crate) fn merge_log_ratio(state: &ChainState, cfg: &ChainConfig, i: usize, k: usize) -> f64 {
    let x = cfg.params.fugacity();
    let l = state.l() as f64;
    let m = state.m() as f64;
    let xi = state.config.charge_one();
    let (phi, delta) = midpoint(xi[i], xi[k]);
    if delta >= FRAC_PI_2 {
        return f64::NEG_INFINITY;
    }
    let skip = [(Species::One, i), (Species::One, k)];
    let old = state.interaction(1.0, xi[i], &skip) + state.interaction(1.0, xi[k], &skip)
        - chord(xi[i], xi[k]).ln();
    let new = state.interaction(2.0, phi, &skip);
    let d_energy = new - old;
    -(2.0 * x.ln() + d_energy + (4.0 * (m + 1.0)).ln() - (l * (l - 1.0)).ln() - cfg.log_split_density(delta)
        + cfg.log_move_ratio())
}

fn rotate<R: Rng + ?Sized>(state: &mut ChainState, cfg: &ChainConfig, rng: &mut R) -> bool {
    let total = state.l() + state.m();
    let pick = rng.random_range(0..total);
    let (sp, idx, q) =
        if pick < state.l() { (Species::One, pick, 1.0) } else { (Species::Two, pick - state.l(), 2.0) };
    let list = match sp {
        Species::One => state.config.charge_one(),
        Species::Two => state.config.charge_two(),
    };
    let old_angle = list[idx];
    let step: f64 = rng.sample(StandardNormal);
    let new_angle = wrap(old_angle + cfg.sigma_rotate * step);
    let skip = [(sp, idx)];
    let d_energy = state.interaction(q, new_angle, &skip) - state.interaction(q, old_angle, &skip);
    if !accept(-d_energy, rng) {
        return false;
    }
    match sp {
        Species::One => state.config.charge_one_mut()[idx] = new_angle,
        Species::Two => state.config.charge_two_mut()[idx] = new_angle,
    }
    state.energy += d_energy;
    true
}

fn split<R: Rng + ?Sized>(state: &mut ChainState, cfg: &ChainConfig, rng: &mut R) -> bool {
    if state.m() == 0 {
        return false;
    }
    let j = rng.random_range(0..state.m());
    let g: f64 = rng.sample(StandardNormal);
    let delta = (cfg.sigma_split * g).abs();
    if delta >= FRAC_PI_2 || delta == 0.0 {
        return false;
    }
    let log_ratio = split_log_ratio(state, cfg, j, delta);
    if !accept(log_ratio, rng) {
        return false;
    }
    let phi = state.config.charge_two_mut().remove(j);
    let l = state.l();
    let xi = state.config.charge_one_mut();
    xi.insert(rng.random_range(0..=l), wrap(phi + delta));
    xi.insert(rng.random_range(0..=l + 1), wrap(phi - delta));
    state.energy = energy(&state.config);
    true
}

fn merge<R: Rng + ?Sized>(state: &mut ChainState, cfg: &ChainConfig, rng: &mut R) -> bool {
    let l = state.l();
    if l < 2 {
        return false;
    }
    let i = rng.random_range(0..l);
    let mut k = rng.random_range(0..l - 1);
    if k >= i {
        k += 1;
    }
    let log_ratio = merge_log_ratio(state, cfg, i, k);
    if !accept(log_ratio, rng) {
        return false;
    }
    let xi = state.config.charge_one();
    let (phi, _) = midpoint(xi[i], xi[k]);
    let (hi, lo) = if i > k { (i, k) } else { (k, i) };
    let xi = state.config.charge_one_mut();
    xi.remove(hi);
    xi.remove(lo);
    let m = state.m();
    state.config.charge_two_mut().insert(rng.random_range(0..=m), phi);
    state.energy = energy(&state.config);
    true
}

/// One Metropolis–Hastings step. Illegal moves (split with `M = 0`, merge
/// with `L < 2`) count as rejected proposals.
pub fn mcmc_step<R: Rng + ?Sized>(state: &mut ChainState, cfg: &ChainConfig, rng: &mut R) -> MoveOutcome {
    let u: f64 = rng.random();
    let kind = if u < cfg.p_rotate {
        MoveKind::Rotate
    } else if u < cfg.p_rotate + cfg.p_split {
        MoveKind::Split
    } else {
        MoveKind::Merge
    };
    let accepted = match kind {
        MoveKind::Rotate => rotate(state, cfg, rng),
        MoveKind::Split => split(state, cfg, rng),
        MoveKind::Merge => merge(state, cfg, rng),
    };
    debug_assert_eq!(state.l() + 2 * state.m(), cfg.params.n());
    MoveOutcome { kind, accepted }
}

/// Species pairs with binned intensity estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    OneOne,
    TwoTwo,
    OneTwo,
}

impl PairKind {
    pub const ALL: [PairKind; 3] = [PairKind::OneOne, PairKind::TwoTwo, PairKind::OneTwo];

    fn index(self) -> usize {
        self as usize
    }
}

/// Nearest-neighbour spacing groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingGroup {
    One,
    Two,
    Pooled,
}

impl SpacingGroup {
    pub const ALL: [SpacingGroup; 3] = [SpacingGroup::One, SpacingGroup::Two, SpacingGroup::Pooled];

    fn index(self) -> usize {
        self as usize
    }
}

/// Streaming statistics of one or more chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulators {
    pub n: usize,
    pub samples: u64,
    /// Samples with each value of `L`, indexed `0..=N`.
    pub count_hist: Vec<u64>,
    /// Angular histograms on `[-pi, pi)`, per species.
    pub density: [Vec<u64>; 2],
    /// Ordered-pair counts by separation `|wrap(a - b)|` in `[0, pi]`.
    pub pairs: [Vec<u64>; 3],
    /// Scaled nearest-neighbour gaps on `[0, SPACING_MAX)`.
    pub spacing: [Vec<u64>; 3],
    pub spacing_overflow: [u64; 3],
    /// Samples in which a group held exactly one particle (gap = full circle).
    pub spacing_degenerate: [u64; 3],
    pub gap_sum: [f64; 3],
    pub gap_count: [u64; 3],
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
    pub max_energy_drift: f64,
}

impl Accumulators {
    pub fn new(cfg: &ChainConfig) -> Self {
        let n = cfg.params.n();
        Self {
            n,
            samples: 0,
            count_hist: vec![0; n + 1],
            density: std::array::from_fn(|_| vec![0; cfg.density_bins]),
            pairs: std::array::from_fn(|_| vec![0; cfg.pair_bins]),
            spacing: std::array::from_fn(|_| vec![0; cfg.spacing_bins]),
            spacing_overflow: [0; 3],
            spacing_degenerate: [0; 3],
            gap_sum: [0.0; 3],
            gap_count: [0; 3],
            proposed: [0; 3],
            accepted: [0; 3],
            max_energy_drift: 0.0,
        }
    }

    fn bin(value: f64, lo: f64, hi: f64, bins: usize) -> usize {
        (((value - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
    }

    pub fn record(&mut self, config: &Configuration) {
        self.samples += 1;
        self.count_hist[config.l()] += 1;
        let xi = config.charge_one();
        let zeta = config.charge_two();
        let pb = self.pairs[0].len();
        for (i, &a) in xi.iter().enumerate() {
            for &b in &xi[..i] {
                self.pairs[PairKind::OneOne.index()][Self::bin(separation(a, b), 0.0, PI, pb)] += 2;
            }
        }
        for (i, &a) in zeta.iter().enumerate() {
            for &b in &zeta[..i] {
                self.pairs[PairKind::TwoTwo.index()][Self::bin(separation(a, b), 0.0, PI, pb)] += 2;
            }
        }
        for &a in xi {
            for &b in zeta {
                self.pairs[PairKind::OneTwo.index()][Self::bin(separation(a, b), 0.0, PI, pb)] += 1;
            }
        }
        let pooled: Vec<f64> = xi.iter().chain(zeta).copied().collect();
        for (group, list) in
            [(SpacingGroup::One, xi), (SpacingGroup::Two, zeta), (SpacingGroup::Pooled, &pooled[..])]
        {
            self.record_spacings(group, list);
        }
    }

    pub fn record_density(&mut self, config: &Configuration) {
        for (k, list) in [config.charge_one(), config.charge_two()].into_iter().enumerate() {
            let bins = self.density[k].len();
            for &a in list {
                self.density[k][Self::bin(a, -PI, PI, bins)] += 1;
            }
        }
    }

    fn record_spacings(&mut self, group: SpacingGroup, angles: &[f64]) {
        let g = group.index();
        match angles.len() {
            0 => return,
            1 => {
                self.spacing_degenerate[g] += 1;
                return;
            }
            _ => {}
        }
        let mut sorted = angles.to_vec();
        sorted.sort_by(f64::total_cmp);
        let scale = self.n as f64 / TAU;
        let bins = self.spacing[g].len();
        let last = sorted.len() - 1;
        for k in 0..=last {
            let gap = if k < last { sorted[k + 1] - sorted[k] } else { sorted[0] + TAU - sorted[last] };
            self.gap_sum[g] += gap;
            self.gap_count[g] += 1;
            let s = gap * scale;
            if s >= SPACING_MAX {
                self.spacing_overflow[g] += 1;
            } else {
                self.spacing[g][Self::bin(s, 0.0, SPACING_MAX, bins)] += 1;
            }
        }
    }

    /// Elementwise sum; the drift is the maximum of the two.
    pub fn merge(&mut self, other: &Accumulators) {
        fn add(a: &mut [u64], b: &[u64]) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.samples += other.samples;
        add(&mut self.count_hist, &other.count_hist);
        for k in 0..2 {
            add(&mut self.density[k], &other.density[k]);
        }
        for k in 0..3 {
            add(&mut self.pairs[k], &other.pairs[k]);
            add(&mut self.spacing[k], &other.spacing[k]);
            self.gap_sum[k] += other.gap_sum[k];
        }
        add(&mut self.spacing_overflow, &other.spacing_overflow);
        add(&mut self.spacing_degenerate, &other.spacing_degenerate);
        add(&mut self.gap_count, &other.gap_count);
        add(&mut self.proposed, &other.proposed);
        add(&mut self.accepted, &other.accepted);
        self.max_energy_drift = self.max_energy_drift.max(other.max_energy_drift);
    }

    pub fn acceptance_rate(&self, kind: MoveKind) -> f64 {
        let k = kind.index();
        self.accepted[k] as f64 / self.proposed[k].max(1) as f64
    }

    pub fn mean_count(&self) -> f64 {
        let s: u64 = self.count_hist.iter().enumerate().map(|(l, &c)| l as u64 * c).sum();
        s as f64 / self.samples as f64
    }

    pub fn count_frequency(&self, l: usize) -> f64 {
        self.count_hist.get(l).copied().unwrap_or(0) as f64 / self.samples as f64
    }
}

/// Per-chain and merged statistics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub chains: Vec<Accumulators>,
    pub merged: Accumulators,
}

/// Runs one chain on ChaCha stream `index` of the configured seed.
pub fn run_chain(cfg: &ChainConfig, index: usize) -> Accumulators {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut state = ChainState::initial(&cfg.params);
    let mut acc = Accumulators::new(cfg);
    let total = cfg.burn_in + cfg.steps;
    for step in 1..=total {
        let out = mcmc_step(&mut state, cfg, &mut rng);
        if step > cfg.burn_in {
            acc.proposed[out.kind.index()] += 1;
            acc.accepted[out.kind.index()] += out.accepted as u64;
            if (step - cfg.burn_in).is_multiple_of(cfg.thin) {
                acc.record(state.config());
            }
            if (step - cfg.burn_in).is_multiple_of(cfg.density_thin) {
                acc.record_density(state.config());
            }
        }
        if step % RESYNC_INTERVAL == 0 {
            acc.max_energy_drift = acc.max_energy_drift.max(state.resync());
        }
    }
    acc
}

/// Runs `cfg.chains` independent chains in parallel. The result depends only
/// on `cfg`.
pub fn run_chains(cfg: &ChainConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let chains: Vec<Accumulators> = (0..cfg.chains).into_par_iter().map(|k| run_chain(cfg, k)).collect();
    let mut merged = Accumulators::new(cfg);
    for c in &chains {
        merged.merge(c);
    }
    Ok(RunSummary { chains, merged })
}

/// Estimate with a jackknife-over-chains standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEstimate {
    pub value: f64,
    pub se: f64,
}

/// `E[L]` over all recorded samples.
pub fn estimate_mean_count(run: &RunSummary) -> ChainEstimate {
    let num: Vec<f64> = run.chains.iter().map(|c| c.mean_count() * c.samples as f64).collect();
    let den: Vec<f64> = run.chains.iter().map(|c| c.samples as f64).collect();
    let (value, se) = jackknife_ratio(&num, &den);
    ChainEstimate { value, se }
}

/// `P(L = l)`.
pub fn estimate_count_probability(run: &RunSummary, l: usize) -> ChainEstimate {
    let num: Vec<f64> = run.chains.iter().map(|c| c.count_hist.get(l).copied().unwrap_or(0) as f64).collect();
    let den: Vec<f64> = run.chains.iter().map(|c| c.samples as f64).collect();
    let (value, se) = jackknife_ratio(&num, &den);
    ChainEstimate { value, se }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityBin {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub se: f64,
    pub pair_count: u64,
    pub underfilled: bool,
}

/// Binned pair intensity `R` for separations `|a - b|` in each bin, as a
/// density per unit angle in both arguments. An ordered pair count `c` over
/// `S` samples in a bin of width `w` estimates `R` as `c / (S 4 pi w)`.
pub fn estimate_intensity(run: &RunSummary, pair: PairKind) -> Result<Vec<IntensityBin>> {
    if run.merged.samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples { have: run.merged.samples, need: MIN_SAMPLES });
    }
    let p = pair.index();
    let bins = run.merged.pairs[p].len();
    let w = PI / bins as f64;
    let norm = 2.0 * TAU * w;
    Ok((0..bins)
        .map(|b| {
            let num: Vec<f64> = run.chains.iter().map(|c| c.pairs[p][b] as f64 / norm).collect();
            let den: Vec<f64> = run.chains.iter().map(|c| c.samples as f64).collect();
            let (estimate, se) = jackknife_ratio(&num, &den);
            let pair_count = run.merged.pairs[p][b];
            IntensityBin {
                lo: b as f64 * w,
                hi: (b + 1) as f64 * w,
                estimate,
                se,
                pair_count,
                underfilled: pair_count < UNDERFILLED_COUNT,
            }
        })
        .collect())
}

/// Chi-square uniformity test of one species' angular histogram.
pub fn density_uniformity(acc: &Accumulators, species: Species) -> Result<(f64, f64)> {
    chi_square_uniform(&acc.density[species.index()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingTable {
    /// `(lo, hi, frequency)` with frequencies of unit total mass, counting
    /// the overflow.
    pub bins: Vec<(f64, f64, f64)>,
    pub overflow: f64,
    /// Samples with a single particle in the group, left out of the bins.
    pub degenerate: u64,
    /// Mean unscaled gap.
    pub mean_gap: f64,
}

pub fn spacing_histogram(acc: &Accumulators, group: SpacingGroup) -> SpacingTable {
    let g = group.index();
    let counts = &acc.spacing[g];
    let total = counts.iter().sum::<u64>() + acc.spacing_overflow[g];
    let denom = total.max(1) as f64;
    let w = SPACING_MAX / counts.len() as f64;
    SpacingTable {
        bins: counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64 * w, (k + 1) as f64 * w, c as f64 / denom))
            .collect(),
        overflow: acc.spacing_overflow[g] as f64 / denom,
        degenerate: acc.spacing_degenerate[g],
        mean_gap: acc.gap_sum[g] / acc.gap_count[g].max(1) as f64,
    }
}
