use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sorption::io;
use sorption::{Error, IsothermKind};

#[derive(Parser)]
#[command(name = "sorption", version, about = "Multicomponent degenerate diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write diagnostics, snapshots and reports.
    Run {
        spec: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the structure report of an isotherm as CSV.
    CheckIsotherm {
        /// Freundlich exponent (with --phi).
        #[arg(long, conflicts_with_all = ["m", "linear"])]
        p: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Power-law exponent.
        #[arg(long, conflicts_with = "linear")]
        m: Option<f64>,
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 1e-4)]
        s_min: f64,
        #[arg(long, default_value_t = 1e3)]
        s_max: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Compare the full system with the two blocks split after species k.
    DivideRule {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        split: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Barenblatt accuracy and support-growth suite.
    Benchmark {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.0])]
        exponents: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [100, 200, 400])]
        levels: Vec<usize>,
    },
    /// Run a vacuum-boundary problem and check that the support never shrinks.
    Persistence {
        spec: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { spec, out } => {
            let m = io::run(&spec, &out)?;
            println!("{} steps, {} files in {}", m.steps, m.files.len(), m.output_dir);
        }
        Command::CheckIsotherm { p, phi, m, linear, s_min, s_max, samples } => {
            let kind = match (p, m, linear) {
                (Some(p), _, _) => IsothermKind::Freundlich { p, phi },
                (None, Some(m), _) => IsothermKind::PowerLaw { m },
                (None, None, true) => IsothermKind::Linear,
                (None, None, false) => {
                    return Err(Error::Invalid("give --p [--phi], --m or --linear".into()));
                }
            };
            print!("{}", io::check_isotherm(kind, s_min, s_max, samples)?);
        }
        Command::DivideRule { spec, split, out } => {
            let m = io::divide_rule(&spec, &out, split)?;
            println!("{} steps, {} files in {}", m.steps, m.files.len(), m.output_dir);
        }
        Command::Benchmark { out, exponents, levels } => {
            let (_, rows) = io::benchmark(&out, &exponents, &levels)?;
            println!("m,cells,l1_error,lambda_fit,lambda_exact,persistence_violations");
            for r in rows {
                println!(
                    "{},{},{:.6e},{:.6},{:.6},{}",
                    r.m, r.cells, r.l1_error, r.lambda_fit, r.lambda_exact, r.persistence_violations
                );
            }
        }
        Command::Persistence { spec, out } => {
            let (m, violations) = io::persistence(&spec, &out)?;
            println!("{violations} persistence violation(s), {} files in {}", m.files.len(), m.output_dir);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
