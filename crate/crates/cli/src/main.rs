use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_ho_cli::{config, load_config, run_to_dir, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "ris-ho-sim", version, about = "RIS-aided handover experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long, env = "RIS_HO_SEED")]
        seed: Option<u64>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Validate a config and print its normalized form.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the configuration schema.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schema => {
            print!("{}", config::schema_text());
            Ok(())
        }
        Command::Validate { config } => load_config(&config).map(|c| print!("{}", c.to_toml())),
        Command::Run {
            config,
            seed,
            out,
            no_plots,
        } => run(config, seed, out, no_plots),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, no_plots: bool) -> Result<(), CliError> {
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(dir) = out {
        cfg = cfg.with_output_dir(dir);
    }
    let m = run_to_dir(&cfg, RunOptions { plots: !no_plots })?;
    println!(
        "{}: {} rows -> {} ({})",
        m.experiment,
        m.rows,
        cfg.output_dir.display(),
        m.artifacts.join(", ")
    );
    Ok(())
}
