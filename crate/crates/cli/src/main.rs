//! `wedgedg`: simulation, convergence, spectrum, mesh and benchmark workflows
//! driven by TOML config files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "wedgedg", version, about = "High-order DG acoustics on hybrid wedge/tet meshes")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true, env = "WEDGEDG_THREADS")]
    threads: Option<usize>,

    /// Write the reference operators of degree N as CSV files and exit.
    #[arg(long, value_name = "N")]
    dump_ref: Option<usize>,

    /// Output directory for --dump-ref.
    #[arg(long, default_value = "reference", requires = "dump_ref")]
    ref_dir: PathBuf,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time-domain simulation: energy log, snapshots and a run summary.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study of the standing-wave solution.
    Converge {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the assembled semi-discrete operator.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a mesh file.
    Mesh {
        config: PathBuf,
        /// Mesh file to write (overrides the config).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Per-phase RHS timings per DOF.
    Bench {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for an error: 2 config, 3 numerical instability, 4 mesh, 1 other.
fn exit_code(err: &anyhow::Error) -> u8 {
    let lib = err.chain().find_map(|e| e.downcast_ref::<wedgedg::Error>());
    match lib {
        Some(wedgedg::Error::Config(_)) => 2,
        Some(e) if e.is_numerical_instability() => 3,
        Some(e) if e.is_mesh_error() => 4,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.dump_ref.is_some() == cli.command.is_some() {
        Cli::command()
            .error(ErrorKind::ArgumentConflict, "give either --dump-ref or a subcommand")
            .exit();
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if let Some(n) = cli.dump_ref {
        return commands::dump_reference(n, &cli.ref_dir);
    }
    match cli.command {
        Some(Command::Run { config, out }) => commands::cmd_run(&config, out.as_deref()),
        Some(Command::Converge { config, out }) => commands::cmd_converge(&config, out.as_deref()),
        Some(Command::Spectrum { config, out }) => commands::cmd_spectrum(&config, out.as_deref()),
        Some(Command::Mesh { config, output }) => commands::cmd_mesh(&config, output.as_deref()),
        Some(Command::Bench { config, out }) => commands::cmd_bench(&config, out.as_deref()),
        None => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
