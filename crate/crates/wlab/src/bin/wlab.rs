//! Thin command-line front end over the library's harness layer.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use wlab::harness::{self, ScenarioSource};

#[derive(Parser)]
#[command(name = "wlab", about = "damped nonlinear wave laboratory", version)]
struct Cli {
    /// Worker threads for sampled checks (overrides WLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its artifact set.
    Simulate {
        /// Scenario file in the laboratory's INI dialect.
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample the vector inequality battery.
    Inequalities {
        /// Check a single inequality id instead of the whole battery.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the battery table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure manufactured-solution convergence orders.
    Convergence {
        /// Manufactured solution name (standing-1d or standing-2d).
        #[arg(long, default_value = "standing-1d")]
        solution: String,
        #[arg(long, default_value_t = 32)]
        base_n: usize,
        #[arg(long, default_value_t = 0.005)]
        base_dt: f64,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Nonlinearity strength (0 gives the linear wave).
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        /// Damping exponent.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan second-derivative and Hölder diagnostics under refinement.
    Regularity {
        /// Scenario file to scan.
        #[arg(long, conflicts_with = "gallery")]
        scenario: Option<PathBuf>,
        /// Gallery entry to scan instead of a file.
        #[arg(long)]
        gallery: Option<String>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Interior window margin in cells at the coarsest level.
        #[arg(long, default_value_t = 2)]
        margin: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the curated scenario gallery.
    Gallery {
        /// Run a single entry.
        #[arg(long)]
        only: Option<String>,
        /// List entries without running them.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value = "gallery-out")]
        out: PathBuf,
    },
}

fn main() {
    // A closed stdout reader ends the process the way pipeline tools do,
    // without a panic backtrace.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let threads = cli.threads;
    let code = match cli.command {
        Command::Simulate { scenario, out } => harness::cmd_simulate(&harness::SimulateArgs {
            scenario_path: scenario,
            out_dir: out,
            threads,
        }),
        Command::Inequalities { only, samples, seed, out } => {
            harness::cmd_inequalities(&harness::InequalitiesArgs {
                samples,
                seed,
                out,
                threads,
                only,
            })
        }
        Command::Convergence { solution, base_n, base_dt, t_end, levels, k, q, out } => {
            harness::cmd_convergence(&harness::ConvergenceArgs {
                solution,
                base_n,
                base_dt,
                t_end,
                levels,
                k,
                q,
                out,
            })
        }
        Command::Regularity { scenario, gallery, levels, margin, out } => {
            let source = match (scenario, gallery) {
                (Some(path), None) => ScenarioSource::File(path),
                (None, Some(name)) => ScenarioSource::Gallery(name),
                _ => {
                    eprintln!("exactly one of --scenario or --gallery is required");
                    std::process::exit(harness::EXIT_USAGE);
                }
            };
            harness::cmd_regularity(&harness::RegularityArgs { source, levels, margin, out })
        }
        Command::Gallery { only, list, out } => {
            harness::cmd_gallery(&harness::GalleryArgs { out_dir: out, only, list })
        }
    };
    std::process::exit(code);
}
