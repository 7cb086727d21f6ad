use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tat_cli::{cmd_compare, cmd_forward, cmd_phantom, cmd_recon, cmd_validate, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "tat", version, about = "Thermoacoustic tomography: forward data, reconstruction, identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured phantom on the reconstruction grid.
    Phantom {
        #[arg(short, long)]
        config: PathBuf,
        /// Accept phantoms reaching outside the unit ball.
        #[arg(long)]
        allow_exterior: bool,
    },
    /// Simulate detector data for the configured panel kinds.
    Forward {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        allow_exterior: bool,
    },
    /// Reconstruct from a panel file and write the grid plus metrics.
    Recon {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        panel: PathBuf,
        #[arg(long)]
        allow_exterior: bool,
    },
    /// Run the identity battery.
    Validate {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Compare a reference grid with a reconstruction.
    Compare {
        reference: PathBuf,
        candidate: PathBuf,
        /// Directory for diff.txt, slice.txt and compare.txt.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Slice direction: 0 = x, 1 = y, 2 = z.
        #[arg(long, default_value_t = 0)]
        axis: usize,
        /// Point the slice passes through, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..=3)]
        through: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Phantom { config, allow_exterior } => {
            cmd_phantom(&RunConfig::load(&config)?, allow_exterior)?;
        }
        Command::Forward { config, allow_exterior } => {
            cmd_forward(&RunConfig::load(&config)?, allow_exterior)?;
        }
        Command::Recon { config, panel, allow_exterior } => {
            let out = cmd_recon(&RunConfig::load(&config)?, &panel, allow_exterior)?;
            print!("{}", out.metrics);
        }
        Command::Validate { config } => {
            cmd_validate(&RunConfig::load(&config)?)?;
        }
        Command::Compare { reference, candidate, out, axis, through } => {
            let mut p = [0.0; 3];
            for (slot, v) in p.iter_mut().zip(through.unwrap_or_default()) {
                *slot = v;
            }
            print!("{}", cmd_compare(&reference, &candidate, &out, axis, &p)?.metrics);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
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
