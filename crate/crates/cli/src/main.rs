// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::TAU;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twocharge::ensemble::{
    limiting_mean_fraction, limiting_var_fraction, log_partition, CltScaling, CountDistribution,
    EnsembleParams,
};
use twocharge::kernels::{
    coe_limit_entry, cse_limit_entry, finite_entry, scaled_entry, Entry, Gauge, KernelQuery,
    ScaledKernelQuery, Species,
};
use twocharge::oracle::oracle_intensity;
use twocharge::pfaffian::{intensity, scaled_intensity, CorrelationQuery};
use twocharge::sampler::{
    density_uniformity, estimate_intensity, estimate_mean_count, run_chains, spacing_histogram, ChainConfig,
    MoveKind, PairKind, SpacingGroup,
};
use twocharge::stats::{ks_distance_lattice, ks_distance_normal};
use twocharge::verify::{self, Level};

mod output;

use output::{complex, Emitter, Format, Table, Value, C, P};

#[derive(Parser)]
#[command(
    name = "twocharge",
    version,
    about = "Two-charge circular ensemble: exact laws, kernels and sampling"
)]
struct Cli {
    /// Output format for tables.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition function Z_N(X).
    Partition(Fugacity),
    /// Law of the charge-one count L.
    Counts(CountsArgs),
    /// Kernel entries on a grid of separations.
    Kernel(KernelArgs),
    /// Correlation intensity at given points.
    Correlate(CorrelateArgs),
    /// Run Metropolis-Hastings chains.
    Sample(SampleArgs),
    /// Run the numbered verification checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Fugacity {
    /// Total charge N.
    #[arg(long)]
    n: usize,
    /// Fugacity X.
    #[arg(long, conflicts_with = "r", required_unless_present = "r")]
    fugacity: Option<f64>,
    /// Fugacity ratio, X = N r.
    #[arg(long)]
    r: Option<f64>,
}

impl Fugacity {
    fn params(&self) -> twocharge::Result<EnsembleParams> {
        match self.r {
            Some(r) => EnsembleParams::from_ratio(self.n, r),
            None => EnsembleParams::new(self.n, self.fugacity.unwrap_or_default()),
        }
    }
}

#[derive(Args)]
struct CountsArgs {
    #[command(flatten)]
    ensemble: Fugacity,
    /// Number of exact samples of L to draw.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpeciesPair {
    #[value(name = "11")]
    OneOne,
    #[value(name = "22")]
    TwoTwo,
    #[value(name = "12")]
    OneTwo,
    #[value(name = "21")]
    TwoOne,
}

impl SpeciesPair {
    fn species(self) -> (Species, Species) {
        use Species::*;
        match self {
            SpeciesPair::OneOne => (One, One),
            SpeciesPair::TwoTwo => (Two, Two),
            SpeciesPair::OneTwo => (One, Two),
            SpeciesPair::TwoOne => (Two, One),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EntryArg {
    #[value(name = "S")]
    S,
    #[value(name = "DS")]
    Ds,
    #[value(name = "IS")]
    Is,
}

impl From<EntryArg> for Entry {
    fn from(e: EntryArg) -> Self {
        match e {
            EntryArg::S => Entry::S,
            EntryArg::Ds => Entry::DS,
            EntryArg::Is => Entry::IS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaugeArg {
    Raw,
    Rescaled,
    Scaled,
    Coe,
    Cse,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    species: SpeciesPair,
    #[arg(long, value_enum)]
    entry: EntryArg,
    #[arg(long, value_enum, default_value_t = GaugeArg::Raw)]
    gauge: GaugeArg,
    /// Total charge N (raw and rescaled gauges).
    #[arg(long)]
    n: Option<usize>,
    /// Fugacity X (raw and rescaled gauges).
    #[arg(long, conflicts_with = "r")]
    x: Option<f64>,
    /// Fugacity ratio r; X = N r at finite N.
    #[arg(long)]
    r: Option<f64>,
    /// Separations as `start:stop:step` or a comma list. Angles for the
    /// finite gauges, unit-spacing coordinates otherwise.
    #[arg(long, default_value = "0:3:0.1")]
    delta_grid: String,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Total charge N.
    #[arg(long, required_unless_present = "scaled")]
    n: Option<usize>,
    /// Fugacity X.
    #[arg(long, required_unless_present = "scaled")]
    x: Option<f64>,
    /// Charge-one points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x_angles: Vec<f64>,
    /// Charge-two points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z_angles: Vec<f64>,
    /// Use the bulk scaling limit at ratio `--r`.
    #[arg(long, requires = "r")]
    scaled: bool,
    #[arg(long)]
    r: Option<f64>,
    /// Rotate every point by this angle before evaluating.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    ensemble: Fugacity,
    #[arg(long)]
    p_rotate: Option<f64>,
    #[arg(long)]
    p_split: Option<f64>,
    #[arg(long)]
    p_merge: Option<f64>,
    #[arg(long)]
    sigma_rotate: Option<f64>,
    #[arg(long)]
    sigma_split: Option<f64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long)]
    density_thin: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    density_bins: Option<usize>,
    #[arg(long)]
    pair_bins: Option<usize>,
    #[arg(long)]
    spacing_bins: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
}

enum Failure {
    Verification,
    Usage(String),
}

impl From<twocharge::Error> for Failure {
    fn from(e: twocharge::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("output error: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let bad = || format!("bad grid `{text}`; expected start:stop:step or a comma list");
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, h] => {
            let (a, b, h): (f64, f64, f64) =
                (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
            if !(h > 0.0) || !(b >= a) {
                return Err(bad());
            }
            let steps = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=steps).map(|k| a + k as f64 * h).collect())
        }
        [list] => list.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

fn partition<W: Write>(out: &mut Emitter<W>, args: &Fugacity) -> Outcome {
    let p = args.params()?;
    let log_z = log_partition(&p);
    let z = log_z.exp();
    let mut t = Table::new("partition", &[P("n"), P("x"), P("log_z"), P("z"), P("z_zero")]);
    t.push(vec![
        p.n().into(),
        p.fugacity().into(),
        log_z.into(),
        z.is_finite().then_some(z).into(),
        (log_z == f64::NEG_INFINITY).into(),
    ]);
    out.emit(&t)?;
    Ok(())
}

fn counts<W: Write>(out: &mut Emitter<W>, args: &CountsArgs) -> Outcome {
    let p = args.ensemble.params()?;
    let dist = CountDistribution::new(&p)?;
    let n = p.n();
    let x = p.fugacity();
    let r = x / n as f64;

    let mut q = Table::new("counts.q", &[P("index"), P("c"), P("q")]);
    for (k, &qk) in dist.q().iter().enumerate() {
        q.push(vec![(k + 1).into(), ((n - 2 * (k + 1) + 1) as f64).into(), qk.into()]);
    }
    out.emit(&q)?;

    let limits = r > 0.0;
    let mut s = Table::new(
        "counts.summary",
        &[
            P("n"),
            P("x"),
            P("parity"),
            P("mean"),
            P("variance"),
            P("mean_fraction"),
            P("var_fraction"),
            P("limit_mean_fraction"),
            P("limit_var_fraction"),
            P("degenerate"),
        ],
    );
    s.push(vec![
        n.into(),
        x.into(),
        dist.parity().as_usize().into(),
        dist.mean().into(),
        dist.variance().into(),
        (dist.mean() / n as f64).into(),
        (dist.variance() / n as f64).into(),
        limits.then(|| limiting_mean_fraction(r)).into(),
        limits.then(|| limiting_var_fraction(r)).into(),
        (dist.variance() == 0.0).into(),
    ]);
    out.emit(&s)?;

    if args.samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let draws: Vec<usize> = (0..args.samples).map(|_| dist.sample(&mut rng)).collect();
        let scaling = if limits && n >= 2 { Some(CltScaling::new(n, r)?) } else { None };
        let mut t = Table::new("counts.samples", &[P("index"), P("l"), P("standardized")]);
        for (k, &l) in draws.iter().enumerate() {
            t.push(vec![k.into(), l.into(), scaling.map(|c| c.standardize(l as f64)).into()]);
        }
        out.emit(&t)?;
        if let Some(c) = scaling {
            let z: Vec<f64> = draws.iter().map(|&l| c.standardize(l as f64)).collect();
            let mut ks = Table::new("counts.ks", &[P("samples"), P("ks_lattice"), P("ks_raw")]);
            ks.push(vec![
                z.len().into(),
                ks_distance_lattice(&z, 2.0 / c.sigma).into(),
                ks_distance_normal(&z).into(),
            ]);
            out.emit(&ks)?;
        }
    }
    Ok(())
}

fn kernel<W: Write>(out: &mut Emitter<W>, args: &KernelArgs) -> Outcome {
    let grid = parse_grid(&args.delta_grid).map_err(Failure::Usage)?;
    let (s, t) = args.species.species();
    let entry = Entry::from(args.entry);
    let label = format!("{}{}", s.charge(), t.charge());
    let gauge_name = format!("{:?}", args.gauge).to_lowercase();

    match args.gauge {
        GaugeArg::Raw | GaugeArg::Rescaled => {
            let n = args.n.ok_or_else(|| Failure::Usage("--n is required for finite gauges".into()))?;
            let x = match (args.x, args.r) {
                (Some(x), _) => x,
                (None, Some(r)) => n as f64 * r,
                (None, None) => return Err(Failure::Usage("one of --x or --r is required".into())),
            };
            let r = x / n as f64;
            let gauge = match args.gauge {
                GaugeArg::Raw => Gauge::Raw,
                _ => Gauge::Rescaled { r },
            };
            let rescaled = args.gauge == GaugeArg::Rescaled;
            let mut table = Table::new(
                "kernel.finite",
                &[
                    P("gauge"),
                    P("species"),
                    P("entry"),
                    P("n"),
                    P("x"),
                    P("delta"),
                    C("value"),
                    P("scaled_delta"),
                    C("limit"),
                    P("limit_error"),
                ],
            );
            for &d in &grid {
                let v =
                    finite_entry(&KernelQuery { s, t, entry, gauge, n, fugacity: x, theta: d, psi: 0.0 })?;
                let mut row = vec![
                    gauge_name.clone().into(),
                    label.clone().into(),
                    format!("{entry:?}").into(),
                    n.into(),
                    x.into(),
                    d.into(),
                ];
                row.extend(complex(v));
                if rescaled {
                    // (2 pi / N) times the rescaled entry approximates the
                    // bulk limit at separation N delta / (2 pi)
                    let sd = d * n as f64 / TAU;
                    let lim = scaled_entry(&ScaledKernelQuery { s, t, entry, r, theta: sd, psi: 0.0 })?;
                    row.push(sd.into());
                    row.extend(complex(lim));
                    row.push((v * (TAU / n as f64) - lim).norm().into());
                } else {
                    row.extend([Value::Missing, Value::Missing, Value::Missing, Value::Missing]);
                }
                table.push(row);
            }
            out.emit(&table)?;
        }
        GaugeArg::Scaled | GaugeArg::Coe | GaugeArg::Cse => {
            let r = match args.gauge {
                GaugeArg::Scaled => Some(
                    args.r.ok_or_else(|| Failure::Usage("--r is required for the scaled gauge".into()))?,
                ),
                _ => None,
            };
            let mut table = Table::new(
                "kernel.limit",
                &[P("gauge"), P("species"), P("entry"), P("r"), P("delta"), C("value")],
            );
            for &d in &grid {
                let v = match args.gauge {
                    GaugeArg::Scaled => scaled_entry(&ScaledKernelQuery {
                        s,
                        t,
                        entry,
                        r: r.unwrap_or_default(),
                        theta: d,
                        psi: 0.0,
                    })?,
                    GaugeArg::Coe => coe_limit_entry(s, t, entry, d),
                    _ => cse_limit_entry(s, t, entry, d),
                };
                let mut row = vec![
                    gauge_name.clone().into(),
                    label.clone().into(),
                    format!("{entry:?}").into(),
                    r.into(),
                    d.into(),
                ];
                row.extend(complex(v));
                table.push(row);
            }
            out.emit(&table)?;
        }
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn correlate<W: Write>(out: &mut Emitter<W>, args: &CorrelateArgs) -> Outcome {
    let x: Vec<f64> = args.x_angles.iter().map(|a| a + args.shift).collect();
    let z: Vec<f64> = args.z_angles.iter().map(|a| a + args.shift).collect();
    let mut table = Table::new(
        "correlate",
        &[P("l"), P("m"), P("n"), P("x"), P("r"), P("x_angles"), P("z_angles"), P("intensity"), P("oracle")],
    );
    let (n, fug, value, oracle) = if args.scaled {
        (None, None, scaled_intensity(&x, &z, args.r.unwrap_or_default())?, None)
    } else {
        let (n, fug) = (args.n.unwrap_or_default(), args.x.unwrap_or_default());
        let q = CorrelationQuery::new(x.clone(), z.clone(), n, fug, Gauge::Raw)?;
        let oracle = if n == 2 { Some(oracle_intensity(2, fug, &q.x, &q.z)?) } else { None };
        (Some(n), Some(fug), intensity(&q)?, oracle)
    };
    table.push(vec![
        x.len().into(),
        z.len().into(),
        n.into(),
        fug.into(),
        args.scaled.then_some(args.r).flatten().into(),
        join(&x).into(),
        join(&z).into(),
        value.into(),
        oracle.into(),
    ]);
    out.emit(&table)?;
    Ok(())
}

fn sample<W: Write>(out: &mut Emitter<W>, args: &SampleArgs) -> Outcome {
    let params = args.ensemble.params()?;
    let mut cfg = ChainConfig::new(params);
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { cfg.$f = v; })* };
    }
    set!(
        p_rotate,
        p_split,
        p_merge,
        sigma_rotate,
        sigma_split,
        burn_in,
        steps,
        thin,
        density_thin,
        chains,
        density_bins,
        pair_bins,
        spacing_bins
    );
    cfg.seed = args.seed;
    info!("running {} chains of {} steps", cfg.chains, cfg.steps);
    let run = run_chains(&cfg)?;
    let acc = &run.merged;

    let mut moves = Table::new("sample.moves", &[P("move"), P("proposed"), P("accepted"), P("rate")]);
    for (kind, name) in [(MoveKind::Rotate, "rotate"), (MoveKind::Split, "split"), (MoveKind::Merge, "merge")]
    {
        let k = kind.index();
        moves.push(vec![
            name.into(),
            acc.proposed[k].into(),
            acc.accepted[k].into(),
            acc.acceptance_rate(kind).into(),
        ]);
    }
    out.emit(&moves)?;

    let dist = CountDistribution::new(&params)?;
    let mut counts = Table::new("sample.counts", &[P("l"), P("frequency"), P("exact")]);
    for (l, p) in dist.pmf() {
        counts.push(vec![l.into(), acc.count_frequency(l).into(), p.into()]);
    }
    out.emit(&counts)?;

    let mean = estimate_mean_count(&run);
    let mut summary = Table::new(
        "sample.summary",
        &[
            P("n"),
            P("x"),
            P("chains"),
            P("samples"),
            P("mean_count"),
            P("mean_count_se"),
            P("exact_mean"),
            P("max_energy_drift"),
        ],
    );
    summary.push(vec![
        params.n().into(),
        params.fugacity().into(),
        cfg.chains.into(),
        acc.samples.into(),
        mean.value.into(),
        mean.se.into(),
        dist.mean().into(),
        acc.max_energy_drift.into(),
    ]);
    out.emit(&summary)?;

    let mut density = Table::new("sample.density", &[P("species"), P("lo"), P("hi"), P("count")]);
    let mut uniform = Table::new("sample.uniformity", &[P("species"), P("chi_square"), P("p_value")]);
    for sp in [Species::One, Species::Two] {
        let h = &acc.density[sp.index()];
        let w = TAU / h.len() as f64;
        for (b, &c) in h.iter().enumerate() {
            density.push(vec![
                sp.charge().into(),
                (-TAU / 2.0 + b as f64 * w).into(),
                (-TAU / 2.0 + (b + 1) as f64 * w).into(),
                c.into(),
            ]);
        }
        match density_uniformity(acc, sp) {
            Ok((stat, p)) => uniform.push(vec![sp.charge().into(), stat.into(), p.into()]),
            Err(_) => uniform.push(vec![sp.charge().into(), Value::Missing, Value::Missing]),
        }
    }
    out.emit(&density)?;
    out.emit(&uniform)?;

    let mut pairs = Table::new(
        "sample.pairs",
        &[P("pair"), P("lo"), P("hi"), P("estimate"), P("se"), P("pair_count"), P("underfilled")],
    );
    for (kind, name) in [(PairKind::OneOne, "11"), (PairKind::TwoTwo, "22"), (PairKind::OneTwo, "12")] {
        match estimate_intensity(&run, kind) {
            Ok(bins) => {
                for b in bins {
                    pairs.push(vec![
                        name.into(),
                        b.lo.into(),
                        b.hi.into(),
                        b.estimate.into(),
                        b.se.into(),
                        b.pair_count.into(),
                        b.underfilled.into(),
                    ]);
                }
            }
            Err(e) => warn!("no pair intensities for {name}: {e}"),
        }
    }
    out.emit(&pairs)?;

    let mut spacing = Table::new("sample.spacing", &[P("group"), P("lo"), P("hi"), P("frequency")]);
    let mut gaps =
        Table::new("sample.spacing_summary", &[P("group"), P("overflow"), P("degenerate"), P("mean_gap")]);
    for (group, name) in
        [(SpacingGroup::One, "1"), (SpacingGroup::Two, "2"), (SpacingGroup::Pooled, "pooled")]
    {
        let table = spacing_histogram(acc, group);
        for (lo, hi, f) in table.bins {
            spacing.push(vec![name.into(), lo.into(), hi.into(), f.into()]);
        }
        gaps.push(vec![name.into(), table.overflow.into(), table.degenerate.into(), table.mean_gap.into()]);
    }
    out.emit(&spacing)?;
    out.emit(&gaps)?;
    Ok(())
}

fn run_verify<W: Write>(out: &mut Emitter<W>, args: &VerifyArgs) -> Outcome {
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let rows = verify::run(level);
    let mut table = Table::new(
        "verify",
        &[P("criterion"), P("anchor"), P("check"), P("measured"), P("threshold"), P("status"), P("detail")],
    );
    for r in &rows {
        table.push(vec![
            r.criterion.clone().into(),
            r.anchor.into(),
            r.name.clone().into(),
            r.measured.into(),
            r.threshold.into(),
            r.status.as_str().into(),
            r.detail.clone().into(),
        ]);
    }
    out.emit(&table)?;
    if rows.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = Emitter::new(cli.format, stdout.lock());
    let result = match &cli.command {
        Command::Partition(a) => partition(&mut out, a),
        Command::Counts(a) => counts(&mut out, a),
        Command::Kernel(a) => kernel(&mut out, a),
        Command::Correlate(a) => correlate(&mut out, a),
        Command::Sample(a) => sample(&mut out, a),
        Command::Verify(a) => run_verify(&mut out, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
