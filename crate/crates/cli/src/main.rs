use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use supervision_wage_cli::{reproduce_all, run_scenario, Command, Format};

#[derive(Parser)]
#[command(name = "supwage", version, about = "Wage dynamics under random supervision")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Additive worker: effort coefficients, wage moments, oracle check, exogenous paths.
    AdditiveProfile(RunArgs),
    /// Cobb-Douglas effort policy table.
    CdPolicy(RunArgs),
    /// Cobb-Douglas path of a worker evaluated every period.
    CdPath(RunArgs),
    /// Cobb-Douglas wage distribution by bracket, with a Monte Carlo check.
    CdDistribution(RunArgs),
    /// The firm's optimal contract, closed form and grid search.
    EmployerOptimum(RunArgs),
    /// Optimal contracts and wage moments across marginal products.
    TechSweep(RunArgs),
    /// Wage profiles and employment costs before and after a rise in marginal product.
    TechShock(RunArgs),
    /// Sensitivity of one-period effort to the contract terms.
    Statics(RunArgs),
    /// Runs every bundled scenario and writes a pass/fail report.
    ReproduceAll(ReproduceArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Treat reproduction warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::AdditiveProfile(a) => (Command::AdditiveProfile, a),
        Sub::CdPolicy(a) => (Command::CdPolicy, a),
        Sub::CdPath(a) => (Command::CdPath, a),
        Sub::CdDistribution(a) => (Command::CdDistribution, a),
        Sub::EmployerOptimum(a) => (Command::EmployerOptimum, a),
        Sub::TechSweep(a) => (Command::TechSweep, a),
        Sub::TechShock(a) => (Command::TechShock, a),
        Sub::Statics(a) => (Command::Statics, a),
        Sub::ReproduceAll(a) => {
            return match reproduce_all(&a.out, a.seed, a.format, a.strict) {
                Ok(report) => {
                    print!("{}", report.to_text());
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run_scenario(command, &args.config, &args.out, args.seed, args.format) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
