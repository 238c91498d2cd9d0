//! `eqkd-sim`: batch sweeps of entangled QKD key rates.
//!
//! Exit codes: 0 success, 1 config error, 2 partial failure, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eqkd_core::keyrate::{secret_key, DarkCountSign};
use eqkd_core::sweep::{emit_csv, load_config, run_sweep_with_threads, SweepSpec};

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eqkd-sim",
    version,
    about = "Entangled QKD secret key rate sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate the base scenario and print it as JSON.
    Point {
        #[command(flatten)]
        common: Common,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Pair-number tail tolerance.
    #[arg(long)]
    tail_eps: Option<f64>,
    /// Sign of dark-count bits in the key formula.
    #[arg(long, value_enum)]
    d_sign: Option<DSign>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DSign {
    Paper,
    Physical,
}

impl Common {
    fn load(&self) -> Result<SweepSpec, ExitCode> {
        let mut spec = load_config(&self.config).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        })?;
        if let Some(eps) = self.tail_eps {
            spec.base.tail_eps = eps;
        }
        if let Some(sign) = self.d_sign {
            spec.base.dark_count_sign = match sign {
                DSign::Paper => DarkCountSign::Paper,
                DSign::Physical => DarkCountSign::Physical,
            };
        }
        spec.validate().map_err(|problems| {
            eprintln!("error: invalid config:\n  {}", problems.join("\n  "));
            ExitCode::from(EXIT_CONFIG)
        })?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.command {
        Command::Run {
            common,
            out,
            threads,
        } => {
            if threads == Some(0) {
                eprintln!("error: --threads must be at least 1");
                return Err(ExitCode::from(EXIT_CONFIG));
            }
            let spec = common.load()?;
            let result = run_sweep_with_threads(&spec, threads);
            emit_csv(&result, &out).map_err(|e| {
                eprintln!("error: cannot write {}: {e}", out.display());
                ExitCode::from(EXIT_IO)
            })?;
            let failed = result.failed_rows();
            eprintln!(
                "wrote {} rows to {} ({failed} failed)",
                result.rows.len(),
                out.display()
            );
            if failed > 0 {
                return Err(ExitCode::from(EXIT_PARTIAL));
            }
        }
        Command::Point { common } => {
            let spec = common.load()?;
            let result = secret_key(&spec.base).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_PARTIAL)
            })?;
            let json = serde_json::to_string_pretty(&result).expect("result serializes");
            println!("{json}");
        }
        Command::Validate { config } => {
            load_config(&config).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
