use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tailrisk::approx::{c1, ApproxMethod};
use tailrisk::montecarlo::McConfig;
use tailrisk_cli::{
    load_spec, mc_report, moments_report, nr_sweep, point_report, sweep, table2, Measure, Reference, SweepConfig,
    DEFAULT_ALPHA_MAX, DEFAULT_GRID,
};

/// Tail-risk approximations (NPA, Cornish-Fisher, GC4 kurtosis variants)
/// against closed forms and Monte Carlo.
///
/// Loss distributions are given as key=value pairs, for example
/// `family=pareto a=5 c=10` or
/// `family=compound_poisson lambda=4 sev_family=lognormal sev_mu=3 sev_sigma_sq=1.21`.
#[derive(Parser)]
#[command(name = "tailrisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean, sd, skewness, excess kurtosis and validity thresholds.
    Moments {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// VaR approximations at one level.
    Var(PointArgs),
    /// ES approximations at one level.
    Es(PointArgs),
    /// Relative errors of the approximations over an α grid.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated methods.
        #[arg(long, value_delimiter = ',', default_value = "NPA,CF,KurtI,KurtIV")]
        methods: Vec<ApproxMethod>,
        /// Reference values; defaults to exact when a closed form exists.
        #[arg(long, value_enum)]
        reference: Option<ReferenceKind>,
        #[arg(long, value_enum, default_value = "var")]
        measure: MeasureKind,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Relative VaR errors after k Newton-Raphson steps.
    NrSweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated iteration counts.
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,10")]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "mc")]
        reference: ReferenceKind,
        #[arg(long = "mc-n", default_value_t = 10_000)]
        mc_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        streams: usize,
    },
    /// Compound Poisson λ=4 with Lognormal(3, 25) claims at α = 0.995, 0.999.
    Table2 {
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo VaR and ES with 99% bounds.
    Mc {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// File of key=value pairs; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value pairs, overriding the config file.
    pairs: Vec<String>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "NPA,CF,KurtI,KurtII,KurtIII,KurtIV")]
    methods: Vec<ApproxMethod>,
}

#[derive(Args)]
struct GridArgs {
    /// Exclusive lower end of the window [default: C1].
    #[arg(long = "alpha-min")]
    alpha_min: Option<f64>,
    #[arg(long = "alpha-max", default_value_t = DEFAULT_ALPHA_MAX)]
    alpha_max: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Args)]
struct McArgs {
    #[arg(long = "mc-n", default_value_t = 1_000_000)]
    mc_n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    streams: usize,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig { sample_count: self.mc_n, seed: self.seed, stream_count: self.streams }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceKind {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Var,
    Es,
}

impl From<MeasureKind> for Measure {
    fn from(m: MeasureKind) -> Measure {
        match m {
            MeasureKind::Var => Measure::Var,
            MeasureKind::Es => Measure::Es,
        }
    }
}

fn reference(kind: ReferenceKind, mc: McConfig) -> Reference {
    match kind {
        ReferenceKind::Exact => Reference::Exact,
        ReferenceKind::Mc => Reference::MonteCarlo(mc),
    }
}

fn sweep_config(grid: &GridArgs, methods: Vec<ApproxMethod>, measure: Measure, reference: Reference) -> SweepConfig {
    SweepConfig {
        alpha_min: grid.alpha_min.unwrap_or_else(c1),
        alpha_max: grid.alpha_max,
        grid: grid.grid,
        methods,
        measure,
        reference,
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moments { spec } => {
            let loss = load_spec(spec.config.as_deref(), &spec.pairs)?;
            emit(spec.out.as_ref(), &moments_report(&loss)?)
        }
        Command::Var(p) => point(p, Measure::Var),
        Command::Es(p) => point(p, Measure::Es),
        Command::Sweep { spec, grid, methods, reference: kind, measure, mc } => {
            let loss = load_spec(spec.config.as_deref(), &spec.pairs)?;
            let mc = mc.config();
            let reference = match kind {
                Some(k) => reference(k, mc),
                None => Reference::default_for(&loss, mc),
            };
            let cfg = sweep_config(&grid, methods, measure.into(), reference);
            emit(spec.out.as_ref(), &sweep(&loss, &cfg)?.to_csv())
        }
        Command::NrSweep { spec, grid, k, reference: kind, mc_n, seed, streams } => {
            let loss = load_spec(spec.config.as_deref(), &spec.pairs)?;
            let mc = McConfig { sample_count: mc_n, seed, stream_count: streams };
            let cfg = sweep_config(&grid, Vec::new(), Measure::Var, reference(kind, mc));
            emit(spec.out.as_ref(), &nr_sweep(&loss, &k, &cfg)?.to_csv())
        }
        Command::Table2 { mc, out } => emit(out.as_ref(), &table2(&mc.config())?.to_text()),
        Command::Mc { spec, alpha, mc } => {
            let loss = load_spec(spec.config.as_deref(), &spec.pairs)?;
            let (text, sparse) = mc_report(&loss, alpha, &mc.config())?;
            if sparse {
                eprintln!("warning: fewer than 20 draws beyond the quantile; increase --mc-n");
            }
            emit(spec.out.as_ref(), &text)
        }
    }
}

fn point(p: PointArgs, measure: Measure) -> Result<()> {
    let loss = load_spec(p.spec.config.as_deref(), &p.spec.pairs)?;
    emit(p.spec.out.as_ref(), &point_report(&loss, p.alpha, &p.methods, measure)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
