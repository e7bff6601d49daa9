use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Numerical checks for collapsing hyper-Kähler metrics on the torus.
#[derive(Parser, Debug)]
#[command(name = "hkcollapse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random-matrix checks of the calibration inequality and triple reconstruction.
    CheckCalibration {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Evaluate h (and optionally one Green's function) at a point.
    GreenEval {
        config: PathBuf,
        /// Point as x,y,z.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        point: Vec<f64>,
        /// Source point of G(x, p) as x,y,z.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        pole: Option<Vec<f64>>,
    },
    /// Harmonicity, calibration and pole-asymptotic probes for a configuration.
    VerifyGh {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Overrides the seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// ε-sweep over the Gibbons-Hawking region; writes CSV and a summary JSON.
    Sweep {
        config: PathBuf,
        /// CSV path; defaults to the configuration's "output", then sweep.csv.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Least-squares fit over columns of a sweep CSV.
    Fit {
        csv: PathBuf,
        /// Predefined quantity; deficit fits need --config for the torus volume.
        #[arg(long, value_enum, conflicts_with = "y")]
        quantity: Option<Quantity>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "eps")]
        x: String,
        /// Column to fit when no --quantity is given.
        #[arg(long)]
        y: Option<String>,
        /// Fit a line instead of a power law.
        #[arg(long)]
        linear: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Quantity {
    /// 3π vol − E_num/ε, power law.
    DeficitNum,
    /// 3π vol − E_closed/ε, power law.
    DeficitClosed,
    /// vol/tr(I) − 1/3, linear.
    VolRatio,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::CheckCalibration { samples, seed } => commands::check_calibration(samples, seed),
        Command::GreenEval { config, point, pole } => commands::green_eval(&config, &point, pole.as_deref()),
        Command::VerifyGh { config, samples, seed } => commands::verify_gh(&config, samples, seed),
        Command::Sweep { config, output } => commands::sweep(&config, output),
        Command::Fit { csv, quantity, config, x, y, linear } => {
            commands::fit(&csv, quantity, config.as_deref(), &x, y.as_deref(), linear)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
