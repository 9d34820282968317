use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmp_nlp::config::load_config;
use mmp_nlp::problems::list_problems;
use mmp_nlp::runner::{output_dir, run_command, run_suite, suite_table};

#[derive(Parser)]
#[command(name = "mmp-nlp", version, about = "Majorization-minimization SQP solvers for smooth nonlinear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the problem and method described by a config file
    Run { config: PathBuf },
    /// List the builtin problems
    List,
    /// Run every builtin with every applicable method
    Suite {
        /// Worker threads (defaults to the available parallelism)
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (MMP_NLP_OUT takes precedence)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match load_config(&config) {
            Ok((cfg, problem)) => code(run_command(&cfg, &problem)),
            Err(e) => {
                eprintln!("error: {e}");
                code(1)
            }
        },
        Command::List => {
            print!("{}", list_problems());
            code(0)
        }
        Command::Suite { workers, out } => {
            let dir = output_dir(out.as_deref());
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            match run_suite(Some(&dir), workers) {
                Ok(rows) => {
                    let table = suite_table(&rows);
                    print!("{table}");
                    if let Err(e) = std::fs::write(dir.join("suite.txt"), &table) {
                        eprintln!("error: cannot write suite table: {e}");
                        return code(1);
                    }
                    code(if rows.iter().all(|r| r.as_expected()) { 0 } else { 1 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(1)
                }
            }
        }
    }
}
