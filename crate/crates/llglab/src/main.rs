use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use llglab::commands::{self, CglArgs, LlgArgs, MorreyArgs, SemigroupArgs, EXIT_FAIL, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "llglab", version, about = "Numerical laboratory for the Landau-Lifshitz-Gilbert equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment listed in a config file.
    Run {
        config: PathBuf,
        /// Worker threads for independent experiments.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the compensated Morrey decay of the linear semigroup.
    VerifySemigroup(SemigroupArgs),
    /// Complex Ginzburg-Landau system in mild form.
    Cgl {
        #[command(subcommand)]
        command: CglCommand,
    },
    /// Direct LLG integration.
    Llg {
        #[command(subcommand)]
        command: LlgCommand,
    },
    /// Morrey norm of a snapshot's pointwise magnitude.
    Morrey(MorreyArgs),
}

#[derive(Subcommand)]
enum CglCommand {
    /// Picard iteration on a time grid.
    Solve(CglArgs),
}

#[derive(Subcommand)]
enum LlgCommand {
    Run(LlgArgs),
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn report(r: Result<String, llglab_core::LabError>) -> ExitCode {
    match r {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_FAIL)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, jobs, out } => match commands::run_config(&config, jobs.max(1), out.as_deref()) {
            Ok(o) => {
                for c in &o.summary.checks {
                    println!("[{}] {}/{}: {}", c.status.label(), c.experiment, c.name, c.note);
                }
                println!("output: {}", o.out.display());
                if o.summary.all_pass() {
                    ExitCode::SUCCESS
                } else {
                    code(EXIT_FAIL)
                }
            }
            Err(e) => {
                eprintln!("config error: {e}");
                code(EXIT_USAGE)
            }
        },
        Command::VerifySemigroup(a) => match commands::verify_semigroup(&a) {
            Ok((csv, pass)) => {
                print!("{csv}");
                if pass {
                    ExitCode::SUCCESS
                } else {
                    code(EXIT_FAIL)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(EXIT_FAIL)
            }
        },
        Command::Cgl { command: CglCommand::Solve(a) } => report(commands::cgl_solve(&a)),
        Command::Llg { command: LlgCommand::Run(a) } => report(commands::llg_run(&a)),
        Command::Morrey(a) => report(commands::morrey(&a)),
    }
}
