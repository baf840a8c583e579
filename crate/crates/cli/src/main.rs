use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhlab_cli::{run_path, templates, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "nhlab", version, about = "Nonholonomic simulation and verification runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario config (TOML, or JSON by extension).
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies every check tolerance.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// List builtin scenario templates.
    List,
    /// Print a builtin template's config to stdout.
    Show { name: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", templates::listing());
            ExitCode::SUCCESS
        }
        Command::Show { name } => match templates::find(&name) {
            Ok(t) => {
                print!("{}", t.source);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            output_dir,
            seed,
            tolerance_scale,
        } => {
            let opts = RunOptions {
                output_dir,
                seed,
                tolerance_scale,
            };
            match run_path(&config, &opts) {
                Ok(outcome) => {
                    for c in &outcome.checks {
                        let verdict = if c.pass { "PASS" } else { "FAIL" };
                        println!("{verdict}  {}  max={:e} tol={:e}", c.name, c.max, c.tolerance);
                    }
                    println!("outputs written to {}", outcome.output_dir.display());
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
