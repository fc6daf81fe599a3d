//! `finsler`: evaluate, test, deform and construct two-dimensional
//! (alpha, beta)-metrics from metric-definition files or the built-in catalog.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finsler_core::par::Execution;
use finsler_core::sampling::DEFAULT_SEED;

use report::Report;

#[derive(Parser)]
#[command(name = "finsler", version, about = "Numerical checks for two-dimensional (alpha, beta)-Finsler metrics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Global {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write sweep data to a CSV file (header x1,x2,y1,y2,value).
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Seed for sample points.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Override the verdict threshold of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Evaluate sample points one at a time.
    #[arg(long, global = true)]
    pub sequential: bool,
}

impl Global {
    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct Source {
    /// Metric-definition file.
    #[arg(long, value_name = "FILE", required_unless_present = "entry", conflicts_with = "entry")]
    pub metric: Option<PathBuf>,
    /// Take the metric from a catalog entry.
    #[arg(long, value_name = "NAME")]
    pub entry: Option<String>,
}

#[derive(Args, Clone, Debug)]
pub struct Sampling {
    /// Number of seeded sample points in [0.5, 1.5]^2.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F, the spray and the projective factor at (x, y).
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        x: [f64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        y: [f64; 2],
    },
    /// Douglas test at sample points.
    Douglas {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Projective flatness: Douglas plus K12 = 0, with the Hamel residual in the given chart.
    Pflat {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Riemann curvature, flag curvature, H-tensors and K12 at (x, y).
    Curvature {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "1,1")]
        x: [f64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        y: [f64; 2],
        /// Grid size per axis for the K12 sweep written by --csv.
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Douglas verdict and the r_ij case that explains it.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Deform a metric and emit the result as a metric file.
    Deform {
        kind: DeformKind,
        #[command(flatten)]
        source: Source,
        /// Exponent of the Kropina deformation.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        /// Linear coefficient of the m = -3 deformation.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Coefficient k in alpha-bar^2 = alpha^2 + k beta^2.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// Write the metric file here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Build a metric from a harmonic pair and emit it as a metric file.
    Construct {
        kind: ConstructKind,
        /// Real part u(x1, x2).
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        /// Imaginary part v(x1, x2).
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// B(x1, x2) for thm12_ii.
        #[arg(long, allow_hyphen_values = true)]
        bb: Option<String>,
        /// eta(x1, x2) for rem61.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        c: f64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Built-in examples with their expected verdicts.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// List the entries.
    List,
    /// Run one entry, or every entry with --all; exits 1 if a verdict differs from the expected one.
    Run {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Print an entry's metric file.
    Show { name: String },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum DeformKind {
    Kropina,
    M3,
    BarAlpha,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ConstructKind {
    #[value(name = "thm12_ii")]
    Thm12Ii,
    #[value(name = "rem61")]
    Rem61,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected two comma-separated numbers, got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([num(a)?, num(b)?])
}

fn run(cli: Cli) -> anyhow::Result<Report> {
    let g = &cli.global;
    if g.csv.is_some() && !matches!(cli.command, Command::Curvature { .. } | Command::Pflat { .. }) {
        anyhow::bail!("--csv is supported by `curvature` and `pflat`");
    }
    match cli.command {
        Command::Eval { source, x, y } => commands::eval(&source.load()?, x, y),
        Command::Douglas { source, sampling } => commands::douglas(&source.load()?, &sampling, g),
        Command::Pflat { source, sampling } => commands::pflat(&source.load()?, &sampling, g),
        Command::Curvature { source, x, y, grid } => commands::curvature(&source.load()?, x, y, grid, g),
        Command::Classify { source, sampling } => commands::classify(&source.load()?, &sampling, g),
        Command::Deform { kind, source, m, c, k, out } => {
            commands::deform(kind, &source.load()?, commands::DeformParams { m, c, k }, out, g)
        }
        Command::Construct { kind, u, v, bb, eta, m, c, out } => {
            commands::construct(kind, commands::ConstructParams { u, v, bb, eta, m, c }, out, g)
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => Ok(commands::catalog_list()),
            CatalogAction::Run { name, .. } => commands::catalog_run(name.as_deref(), g),
            CatalogAction::Show { name } => commands::catalog_show(&name),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.global.json;
    match run(cli) {
        Ok(report) => {
            if let Err(e) = report.print(json) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.verdict_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
