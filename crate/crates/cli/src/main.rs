use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use posebench_cli::commands;
use posebench_cli::{CliError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "posebench",
    version,
    about = "Generate, store, replay, and score optimizer run traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides experiment.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent tasks.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem x algorithm x seed) and store compact archives.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Shift all run seeds: run i uses seed seed_base + i.
        #[arg(long)]
        seed_base: Option<u64>,
    },
    /// Expand one compact archive into per-iteration files and print sizes.
    Inflate {
        /// Archive directory holding meta.txt, fx.csv, and id.csv.
        archive: PathBuf,
        /// Target directory (default: `<archive>/naive`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feed stored traces to the configured criteria; write decisions.csv.
    Replay {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score decisions; write results.csv, averages.csv, and bhv series.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Early-stop penalty factor (overrides pose.alpha).
        #[arg(long)]
        alpha: Option<f64>,
        /// Best-so-far update range (overrides pose.delta).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Build rank tables and plot data; optional alpha/delta sweeps.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated penalty factors; one rank table per value.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        /// Comma-separated update ranges; one rank table per value.
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
    },
}

fn load(common: &CommonArgs, overrides: Overrides) -> Result<ExperimentConfig, CliError> {
    let overrides = Overrides {
        output_dir: common.out.clone(),
        ..overrides
    };
    ExperimentConfig::load(&common.config, &overrides)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { common, seed_base } => {
            let config = load(
                &common,
                Overrides {
                    seed_base,
                    ..Overrides::default()
                },
            )?;
            let report = commands::generate(&config, common.jobs)?;
            println!(
                "generated {} archives under {}",
                report.archive_names.len(),
                config.archives_dir().display()
            );
            println!("summary: {}", report.summary_path.display());
        }
        Command::Inflate { archive, out } => {
            let report = commands::inflate(&archive, out.as_deref())?;
            println!(
                "inflated {} into {} ({} files)",
                archive.display(),
                report.naive_dir.display(),
                report.file_count
            );
            println!("compact: {:>12} bytes", report.compact_bytes);
            println!("naive:   {:>12} bytes", report.naive_bytes);
            println!(
                "naive needs {:.2}x the storage ({:.2}% compact/naive)",
                report.blowup(),
                100.0 / report.blowup()
            );
        }
        Command::Replay { common } => {
            let config = load(&common, Overrides::default())?;
            let path = commands::replay(&config, common.jobs)?;
            println!("decisions: {}", path.display());
        }
        Command::Evaluate {
            common,
            alpha,
            delta,
        } => {
            let config = load(
                &common,
                Overrides {
                    alpha,
                    delta,
                    ..Overrides::default()
                },
            )?;
            let report = commands::evaluate(&config, common.jobs)?;
            println!(
                "results:  {} ({} rows)",
                report.results_path.display(),
                report.result_rows
            );
            println!(
                "averages: {} ({} rows)",
                report.averages_path.display(),
                report.average_rows
            );
            println!("series:   {}", report.bhv_dir.display());
        }
        Command::Report {
            common,
            alpha,
            delta,
        } => {
            let config = load(&common, Overrides::default())?;
            let paths = commands::report(&config, alpha.as_deref(), delta.as_deref())?;
            for path in &paths.rankings {
                println!("rankings: {}", path.display());
            }
            println!("markers:  {}", paths.markers.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage mistakes are configuration errors: exit code 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
