use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use redist_de::benchmarks::Suite;
use redist_de::harness::{self, OUTPUT_ENV};
use redist_de::{selftest, Result};

#[derive(Parser)]
#[command(name = "redist-de", version, about = "Differential evolution with individuals redistribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Recompute cells that are already complete.
        #[arg(long)]
        force: bool,
    },
    /// Rebuild summary tables and mean traces from an output directory.
    Report {
        #[arg(long, env = OUTPUT_ENV)]
        dir: PathBuf,
    },
    /// Print the benchmark functions with their optimum values.
    ListFunctions {
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = Suite::DEFAULT_SEED)]
        seed: u64,
    },
    /// Check the core formulas against brute-force recomputation.
    Selftest {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn print_report(r: &harness::ReportOutcome) {
    println!("{} of {} cells complete", r.completed_cells, r.expected_cells);
    print!("{}", r.summary.to_text());
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, force } => {
            let config = harness::parse_config(&config)?;
            let out = harness::run_experiment(&config, force)?;
            println!(
                "{}: {} cells ran, {} skipped, {} failed",
                config.output_dir.display(),
                out.ran,
                out.skipped,
                out.failed.len()
            );
            for (key, e) in &out.failed {
                eprintln!("cell {key}: {e}");
            }
            print_report(&out.report);
            Ok(out.failed.is_empty())
        }
        Command::Report { dir } => {
            print_report(&harness::report(&dir)?);
            Ok(true)
        }
        Command::ListFunctions { dim, seed } => {
            let suite = Suite::new(dim, seed)?;
            println!("{:<28} {:>14}  bounds", "name", "f_star");
            for name in suite.names() {
                let f = suite.build(name)?;
                let b = f.bounds();
                println!("{:<28} {:>14}  [{}, {}]^{}", name, f.f_star(), b.low()[0], b.up()[0], b.dim());
            }
            Ok(true)
        }
        Command::Selftest { instances, seed } => {
            let mut ok = true;
            for c in selftest::run_all(instances, seed) {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({} instances, {} failures)", c.name, c.instances, c.failures);
                if let Some(msg) = &c.first_failure {
                    println!("     {msg}");
                }
                ok &= c.passed();
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
