//! Command implementations behind the `propm` binary.
//!
//! Exit codes are the only success channel: output files are written to a
//! temporary file next to the target and renamed into place on success.

pub mod format;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use tempfile::NamedTempFile;

use propm::engine::TraceRecord;
use propm::oracle::{brute_force_propm, random_instance, DEFAULT_BUDGET};
use propm::verifier::verify_allocation;
use propm::{Error, Instance, SolveOptions, Solver};

use format::{emit_allocation, emit_instance, parse_allocation, parse_instance};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_FOUND: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONTRACT: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "propm", version, about = "Compute and check PROPm allocations of indivisible goods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and write the allocation
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Write a JSON Lines trace of the run to this file
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Check invariants during the run and verify the result
        #[arg(long)]
        check: bool,
    },
    /// Print per-agent PROPm reports for an allocation
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
    },
    /// Generate a seeded random instance
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        max_value: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Search every assignment for a PROPm allocation
    Brute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn from_core(err: Error) -> Self {
        let code = match err {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            ref e if e.is_input_error() => EXIT_INPUT,
            _ => EXIT_CONTRACT,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Solve {
            input,
            output,
            trace,
            check,
        } => cmd_solve(&input, &output, trace.as_deref(), check),
        Command::Verify { instance, allocation } => cmd_verify(&instance, &allocation),
        Command::Gen {
            seed,
            agents,
            items,
            max_value,
            output,
        } => cmd_gen(seed, agents, items, max_value, &output),
        Command::Brute { input, budget } => cmd_brute(&input, budget),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn temp_beside(path: &Path) -> Result<NamedTempFile, Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    NamedTempFile::new_in(dir).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn persist(file: NamedTempFile, path: &Path) -> Result<(), Failure> {
    file.persist(path)
        .map(|_| ())
        .map_err(|e| Failure::input(format!("{}: {}", path.display(), e.error)))
}

/// Writes `contents` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let mut file = temp_beside(path)?;
    file.write_all(contents.as_bytes())
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    persist(file, path)
}

pub fn cmd_solve(input: &Path, output: &Path, trace: Option<&Path>, check: bool) -> Result<u8, Failure> {
    let instance = load_instance(input)?;
    let options = SolveOptions {
        check_invariants: check,
        ..SolveOptions::default()
    };

    let mut trace_file = trace.map(temp_beside).transpose()?;
    let mut trace_error: Option<io::Error> = None;
    let allocation = {
        let mut writer = trace_file.as_mut().map(|f| BufWriter::new(f.as_file_mut()));
        let mut solver = Solver::new(options);
        if let Some(w) = writer.as_mut() {
            let err = &mut trace_error;
            solver = solver.with_trace(move |record: &TraceRecord| {
                if err.is_none() {
                    let line = serde_json::to_string(record).expect("trace record serializes");
                    if let Err(e) = writeln!(w, "{line}") {
                        *err = Some(e);
                    }
                }
            });
        }
        let result = solver.solve(&instance).map_err(Failure::from_core);
        drop(solver);
        if let Some(mut w) = writer {
            if let Err(e) = w.flush() {
                trace_error.get_or_insert(e);
            }
        }
        result?
    };
    if let Some(e) = trace_error {
        return Err(Failure::input(format!("trace: {e}")));
    }

    if check {
        let verdict = verify_allocation(&instance, &allocation).map_err(|e| Failure {
            code: EXIT_CONTRACT,
            message: format!("solver output rejected by verifier: {e}"),
        })?;
        if !verdict.propm {
            let agents: Vec<usize> = verdict.unsatisfied().map(|r| r.agent).collect();
            return Err(Failure {
                code: EXIT_CONTRACT,
                message: format!("solver output leaves agents {agents:?} unsatisfied"),
            });
        }
    }

    write_atomic(output, &emit_allocation(&allocation))?;
    if let (Some(file), Some(path)) = (trace_file, trace) {
        persist(file, path)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(instance: &Path, allocation: &Path) -> Result<u8, Failure> {
    let inst = load_instance(instance)?;
    let alloc = parse_allocation(&read(allocation)?)
        .map_err(|e| Failure::input(format!("{}: {e}", allocation.display())))?;
    let verdict = verify_allocation(&inst, &alloc).map_err(Failure::from_core)?;
    let reports = serde_json::to_string_pretty(&verdict.reports).expect("reports serialize");
    println!("{reports}");
    if verdict.propm {
        Ok(EXIT_OK)
    } else {
        for r in verdict.unsatisfied() {
            eprintln!("agent {} is not PROPm-satisfied: {} < {}", r.agent, r.lhs, r.rhs);
        }
        Ok(EXIT_NOT_FOUND)
    }
}

pub fn cmd_gen(seed: u64, agents: usize, items: usize, max_value: u64, output: &Path) -> Result<u8, Failure> {
    let instance = random_instance(seed, agents, items, max_value).map_err(Failure::from_core)?;
    write_atomic(output, &emit_instance(&instance))?;
    Ok(EXIT_OK)
}

pub fn cmd_brute(input: &Path, budget: u64) -> Result<u8, Failure> {
    let instance = load_instance(input)?;
    let witness = brute_force_propm(&instance, budget).map_err(Failure::from_core)?;
    let found = witness.is_some();
    let out = json!({
        "found": found,
        "witness": witness.map(|w| w.bundles),
    });
    println!("{out}");
    Ok(if found { EXIT_OK } else { EXIT_NOT_FOUND })
}
