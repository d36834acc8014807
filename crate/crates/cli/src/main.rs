use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use specdist_cli::commands::{self, Overrides, EXIT_USAGE};
use specdist_cli::config::RunConfig;
use specdist_cli::records::Format;

#[derive(Parser)]
#[command(name = "specdist", version, about = "Certified spectral distances on truncated spectral triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Target duality gap (overrides `tolerance` in the config).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of worker threads for independent solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; inferred from the `--out` extension by default.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Add a wall_time_s column.
    #[arg(long, global = true)]
    timing: bool,

    /// Log verbosity (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between the two configured states.
    Distance,
    /// One distance per value of a geometry parameter.
    Sweep,
    /// Run a named invariant suite, or `all`.
    Verify {
        suite: Option<String>,
    },
    /// Pairwise distances between all configured states.
    Table,
    /// Hausdorff distances between Fejér sample grids along a truncation ladder.
    Hausdorff,
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig { config_version: specdist_cli::config::CONFIG_VERSION, ..RunConfig::default() },
    };
    let o = Overrides {
        tol: cli.tol,
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out.clone(),
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        timing: cli.timing,
    };
    match &cli.command {
        Command::Distance => commands::distance(&config, &o),
        Command::Sweep => commands::sweep(&config, &o),
        Command::Verify { suite } => commands::verify(&config, suite.as_deref(), &o),
        Command::Table => commands::table(&config, &o),
        Command::Hausdorff => commands::hausdorff(&config, &o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
