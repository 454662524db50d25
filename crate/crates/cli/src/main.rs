//! `covpovm`: build, validate and classify covariant POVMs from JSON
//! documents.
//!
//! Exit status is 0 on success, 2 when the input was read but failed
//! validation (the report is still written), and 1 when the input could not
//! be read or parsed.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{CliError, Workspace};
use covpovm_core::{io, Tolerances};

#[derive(Parser)]
#[command(name = "covpovm", version, about = "Covariant POVMs on finite homogeneous spaces")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check group, irrep and system documents.
    Validate {
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        irreps: Option<PathBuf>,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Kernel from seeded random isometries.
    KernelRandom {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Auxiliary dimension; defaults to the smallest admissible one.
        #[arg(long)]
        aux: Option<usize>,
    },
    /// Report the kernel conditions.
    KernelCheck {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Kernel to POVM.
    ToPovm {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// POVM to kernel.
    FromPovm {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Report the POVM conditions and whether it is projective.
    PovmCheck {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// POVM by averaging a seed operator over cosets.
    Davies {
        /// Block operator document for the seed operator.
        #[arg(long)]
        seed_op: Option<PathBuf>,
        /// Draw a random admissible seed operator instead.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Decide extremality of a kernel.
    Extremal {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Split a non-extremal kernel into two distinct kernels.
    Decompose {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
        /// Perturbation matrix document; defaults to the computed witness.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Experimental: keep splitting the plus part for up to N steps.
        #[arg(long, value_name = "N")]
        iterate: Option<usize>,
    },
    /// Rank-one certificates for a system.
    Rank1 {
        #[arg(long)]
        system: PathBuf,
        /// Also emit the kernel of each certificate.
        #[arg(long)]
        build: bool,
    },
    /// Outcome probabilities of a state.
    Prob {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Write the documents of a named fixture.
    Fixture {
        name: String,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn tolerances() -> Result<Tolerances, CliError> {
    match std::env::var("COVPOVM_TOL") {
        Ok(s) => s.parse().map_err(|e| CliError::Malformed(format!("COVPOVM_TOL: {e}"))),
        Err(_) => Ok(Tolerances::default()),
    }
}

fn run(command: Command) -> commands::CliResult {
    let tol = tolerances()?;
    let ws = |system: Option<&Path>| Workspace::new(tol, system);
    match command {
        Command::Validate { group, irreps, system } => {
            commands::validate(&tol, group.as_deref(), irreps.as_deref(), system.as_deref())
        }
        Command::KernelRandom { system, seed, aux } => commands::kernel_random(&ws(Some(&system))?, seed, aux),
        Command::KernelCheck { kernel, system } => commands::kernel_check(&ws(system.as_deref())?, &kernel),
        Command::ToPovm { kernel, system } => commands::to_povm(&ws(system.as_deref())?, &kernel),
        Command::FromPovm { povm, system } => commands::from_povm(&ws(system.as_deref())?, &povm),
        Command::PovmCheck { povm, system } => commands::povm_check(&ws(system.as_deref())?, &povm),
        Command::Davies { seed_op, seed, system } => {
            commands::davies(&ws(system.as_deref())?, seed_op.as_deref(), seed)
        }
        Command::Extremal { kernel, system } => commands::extremal(&ws(system.as_deref())?, &kernel),
        Command::Decompose { kernel, system, witness, iterate } => {
            commands::decompose(&ws(system.as_deref())?, &kernel, witness.as_deref(), iterate)
        }
        Command::Rank1 { system, build } => commands::rank1(&ws(Some(&system))?, build),
        Command::Prob { povm, state, system } => commands::prob(&ws(system.as_deref())?, &povm, &state),
        Command::Fixture { name, dir } => commands::fixture(&tol, &name, &dir),
    }
}

fn emit(out: Option<&Path>, doc: &serde_json::Value) -> Result<(), String> {
    let text = io::render(doc);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let out = cli.out.clone();
    let (doc, code) = match run(cli.command) {
        Ok(doc) => (doc, 0),
        Err(CliError::Invalid { message, document }) => {
            eprintln!("covpovm: {message}");
            (document, 2)
        }
        Err(CliError::Malformed(message)) => {
            eprintln!("covpovm: {message}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(out.as_deref(), &doc) {
        eprintln!("covpovm: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
