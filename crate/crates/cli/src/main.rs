mod commands;
mod config;
mod error;
mod manifest;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fragmenta::{LawDescriptor, SplitLaw};

use config::{Command, RunConfig};
use error::{CliError, CliResult};
use manifest::RunManifest;
use report::ReportInputs;

/// Random interval fragmentation: simulation, theory and checks.
#[derive(Debug, Parser)]
#[command(name = "fragmenta", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run config, or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// kakutani, ternary, buniformB, maryM, heavyA, catalan, or a JSON descriptor.
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    xc: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the greedy fragmentation and write spacings.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Stop after exactly this many splits instead of at the cutoff.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Solve for the stationary spacing distribution.
    Theory {
        #[command(flatten)]
        common: Common,
    },
    /// Characteristic roots of the m-ary subtree recurrence.
    Roots {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        m: Vec<u32>,
    },
    /// Subtree-size profile H(y) and expected subtree counts.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        m: Vec<u32>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        y_min: Option<f64>,
    },
    /// Integer-mass fragmentation with a discrete split law.
    Discrete {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u64>,
        /// Shorthand for `--law heavy<alpha>`.
        #[arg(long, conflicts_with = "law")]
        alpha: Option<f64>,
        #[arg(long)]
        stop_size: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<u64>,
    },
    /// Run the acceptance criteria and print PASS/FAIL per criterion.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
    /// Render SVG plots and a summary from CSV outputs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Spacing CSVs (`left,length`), pooled into one empirical CDF.
    #[arg(long)]
    spacings: Vec<PathBuf>,
    /// Stationary CDF table (`x,u`).
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Size profile (`size,count`).
    #[arg(long)]
    sizes: Option<PathBuf>,
    /// Root table (`m,i,re,im,residual`).
    #[arg(long)]
    roots: Option<PathBuf>,
    /// Output of `verify`.
    #[arg(long)]
    verify: Option<PathBuf>,
    /// Manifest supplying the law and cutoff.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    xc: Option<f64>,
    #[arg(long)]
    law: Option<String>,
    /// Size window of the slope fit, as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    fit: Vec<u64>,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

fn parse_law(text: &str) -> CliResult<LawDescriptor> {
    text.parse::<SplitLaw>()
        .map(|l| l.descriptor())
        .map_err(|e| CliError::usage("law", e.to_string()))
}

fn base_config(command: Command, common: &Common) -> CliResult<RunConfig> {
    let mut c = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(command),
    };
    if c.command != command {
        return Err(CliError::usage(
            "command",
            format!(
                "config is for `{}`, not `{}`",
                c.command.name(),
                command.name()
            ),
        ));
    }
    if let Some(law) = &common.law {
        c.law = Some(parse_law(law)?);
    }
    if let Some(x) = common.xc {
        c.x_c = x;
    }
    if common.replicates.is_some() {
        c.replicates = common.replicates;
    }
    if let Some(s) = common.seed {
        c.master_seed = s;
    }
    if let Some(o) = &common.out {
        c.output_dir = o.clone();
    }
    if common.grid.is_some() {
        c.grid = common.grid;
    }
    Ok(c)
}

fn build_config(cmd: Cmd) -> CliResult<Result<RunConfig, ReportArgs>> {
    let config = match cmd {
        Cmd::Simulate { common, steps } => {
            let mut c = base_config(Command::Simulate, &common)?;
            c.steps = steps.or(c.steps);
            c
        }
        Cmd::Theory { common } => base_config(Command::Theory, &common)?,
        Cmd::Roots { common, m } => {
            let mut c = base_config(Command::Roots, &common)?;
            if !m.is_empty() {
                c.m = m;
            }
            c
        }
        Cmd::Profile {
            common,
            m,
            n,
            y_min,
        } => {
            let mut c = base_config(Command::Profile, &common)?;
            if let Some(&arity) = m.first() {
                if m.len() > 1 {
                    return Err(CliError::usage("m", "profile takes a single arity"));
                }
                c.law = Some(LawDescriptor::MAry { m: arity });
            }
            c.n = n.or(c.n);
            c.y_min = y_min.or(c.y_min);
            c
        }
        Cmd::Discrete {
            common,
            n,
            alpha,
            stop_size,
            snapshots,
        } => {
            let mut c = base_config(Command::Discrete, &common)?;
            if let Some(alpha) = alpha {
                c.law = Some(LawDescriptor::HeavyTail { alpha });
            }
            c.n = n.or(c.n);
            c.stop_size = stop_size.or(c.stop_size);
            if !snapshots.is_empty() {
                c.snapshots = snapshots;
            }
            c
        }
        Cmd::Verify { common, criteria } => {
            let mut c = base_config(Command::Verify, &common)?;
            if !criteria.is_empty() {
                c.criteria = criteria;
            }
            c
        }
        Cmd::Report(args) => return Ok(Err(args)),
    };
    Ok(Ok(config))
}

fn report_inputs(args: ReportArgs) -> CliResult<ReportInputs> {
    let from_manifest = match &args.manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            let m: RunManifest = serde_json::from_str(&text).map_err(|source| CliError::Json {
                path: path.clone(),
                source,
            })?;
            Some(m.config)
        }
        None => None,
    };
    let law = match (&args.law, &from_manifest) {
        (Some(text), _) => Some(SplitLaw::try_from(parse_law(text)?)?),
        (None, Some(c)) => c.law()?,
        (None, None) => None,
    };
    let fit_range = match args.fit.as_slice() {
        [] => None,
        &[lo, hi] if 1 <= lo && lo < hi => Some((lo, hi)),
        _ => return Err(CliError::usage("fit", "expected `lo,hi` with 1 <= lo < hi")),
    };
    Ok(ReportInputs {
        spacings: args.spacings,
        theory: args.theory,
        sizes: args.sizes,
        roots: args.roots,
        verify: args.verify,
        x_c: args.xc.or(from_manifest.as_ref().map(|c| c.x_c)),
        law: law.or_else(|| from_manifest.as_ref().map(|_| SplitLaw::Kakutani)),
        fit_range,
        output_dir: args.out,
    })
}

fn execute(cmd: Cmd) -> CliResult<()> {
    match build_config(cmd)? {
        Ok(config) => {
            let manifest = commands::run(&config)?;
            eprintln!(
                "wrote {} file(s) and {} to {}",
                manifest.outputs.len(),
                manifest::MANIFEST_FILE,
                config.output_dir.display()
            );
            Ok(())
        }
        Err(args) => {
            let summary = report::render_report(&report_inputs(args)?)?;
            print!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
