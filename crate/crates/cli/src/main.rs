use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use skyplan::dimensioning::SitePolicy;
use skyplan::scenario::{
    load_config, render_report, render_table, report_tables, run_plan, Command, LoadError, PlanFailure,
    PlanOptions, ReportFormat,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTE: u8 = 3;
const EXIT_IO: u8 = 4;

/// Radio planning for satellite and RIS-assisted terrestrial coverage of a venue.
#[derive(Debug, Parser)]
#[command(name = "skyplan", version)]
struct Cli {
    /// Planning configuration (TOML).
    #[arg(long, global = true, default_value = "configs/quito-stadium.toml")]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Site-count rounding; overrides the config.
    #[arg(long, global = true, value_enum)]
    policy: Option<Policy>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Policy {
    Ceil,
    Nearest,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Satellite carrier-to-noise budget per link.
    NtnBudget,
    /// RIS link budget, coverage gap and deployment verdict.
    RisBudget,
    /// Cell areas and site counts for the target area.
    Coverage,
    /// Peak rates, subscribers and capacity-driven site counts.
    Capacity,
    /// Rasterize the venue and export the per-cell grid.
    Map,
    /// Every command above in one run.
    Report,
}

fn commands(sub: &Sub) -> Vec<Command> {
    match sub {
        Sub::NtnBudget => vec![Command::NtnBudget],
        Sub::RisBudget => vec![Command::RisBudget],
        Sub::Coverage => vec![Command::Coverage],
        Sub::Capacity => vec![Command::Capacity],
        Sub::Map => vec![Command::Map],
        Sub::Report => Command::ALL.to_vec(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e @ LoadError::Io(_)) => {
            eprintln!("error: cannot read configuration: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let options = PlanOptions {
        policy: cli.policy.map(|p| match p {
            Policy::Ceil => SitePolicy::Ceil,
            Policy::Nearest => SitePolicy::Nearest,
        }),
        out_dir: Some(out.clone()),
    };
    let report = match run_plan(&config, &commands(&cli.command), &options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                PlanFailure::Compute { .. } => EXIT_COMPUTE,
                PlanFailure::MissingSection { .. } => EXIT_CONFIG,
                PlanFailure::Io(_) => EXIT_IO,
            });
        }
    };
    let format = match cli.format {
        Format::Csv => ReportFormat::Csv,
        Format::Markdown => ReportFormat::Markdown,
    };
    for t in report_tables(&report) {
        println!("{}", render_table(&t, ReportFormat::Markdown));
    }
    match render_report(&report, format, &out) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
