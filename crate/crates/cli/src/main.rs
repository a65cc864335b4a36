use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fairdiv_core::engine::{EngineConfig, SolveOptions};
use fairdiv_core::gen::{generate, GenParams};
use fairdiv_core::harness::{run_spec, BenchSpec};
use fairdiv_core::market::{build_graph, reach_from};
use fairdiv_core::oracles::{verify, verify_fast, BruteConfig, DEFAULT_BRUTE_CAP};
use fairdiv_core::{io, solve_with, Error, Parallelism};

/// Exit status of `verify` when a check that ran did not hold.
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "fairdiv", version, about = "EF1 + fPO allocations of indivisible goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and self-verify the result.
    Solve {
        input: PathBuf,
        /// Solution file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the event trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Agent insertion order, e.g. `2,0,1`.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Write the final MBB graph of the normalized instance.
        #[arg(long)]
        graph_dump: Option<PathBuf>,
    },
    /// Check a solution; prints the report as JSON.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        /// Largest number of allocations the brute-force oracles enumerate.
        #[arg(long, env = "FAIRDIV_BRUTE_CAP", default_value_t = DEFAULT_BRUTE_CAP)]
        brute_cap: u64,
    },
    /// Generate a random instance with a planted perfect matching.
    Gen {
        #[arg(short = 'n', long)]
        agents: usize,
        #[arg(short = 'm', long)]
        goods: usize,
        #[arg(long, default_value_t = 10)]
        max: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a sweep described by a spec file.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// Report file; `.csv` selects CSV, anything else JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Run cases one after another regardless of the spec.
        #[arg(long)]
        sequential: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(
    input: &Path,
    output: Option<&Path>,
    trace: Option<&Path>,
    order: Option<Vec<usize>>,
    graph_dump: Option<&Path>,
) -> Result<u8> {
    let inst = io::parse_instance(&read(input)?)?;
    let config = EngineConfig { trace_cap: if trace.is_some() { usize::MAX } else { 0 }, ..EngineConfig::default() };
    let out = solve_with(&inst, &SolveOptions { config, order })?;

    let (ef1, pef1, mbb) = verify_fast(&inst, &out.solution)?;
    if !(ef1 && pef1 && mbb) {
        return Err(Error::Invariant(format!("self-check failed: ef1={ef1} pef1={pef1} mbb={mbb}")).into());
    }
    emit(output, &io::solution_to_json(&out.solution))?;
    if let Some(path) = trace {
        fs::write(path, out.trace.to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = graph_dump {
        let graph = build_graph(&out.core_instance, &out.core_solution)?;
        let n = out.core_instance.agents();
        let reach = n.checked_sub(1).map(|k| reach_from(&graph, &[k], n));
        let text = serde_json::to_string_pretty(&graph.dump(reach.as_ref()))?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn cmd_verify(instance: &Path, solution: &Path, brute_cap: u64) -> Result<u8> {
    let inst = io::parse_instance(&read(instance)?)?;
    let sol = io::parse_solution(&read(solution)?)?;
    let report = verify(&inst, &sol, &BruteConfig::with_cap(brute_cap))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.all_passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_gen(params: GenParams, output: Option<&Path>) -> Result<u8> {
    emit(output, &io::instance_to_json(&generate(&params)?))?;
    Ok(0)
}

fn cmd_bench(spec: &Path, output: Option<&Path>, sequential: bool) -> Result<u8> {
    let mut spec: BenchSpec =
        serde_json::from_str(&read(spec)?).map_err(|e| Error::InvalidInput(format!("malformed bench spec: {e}")))?;
    if sequential {
        spec.parallelism = Parallelism::Sequential;
    }
    let report = run_spec(&spec)?;
    let csv = output.is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")));
    let text = if csv { report.to_csv() } else { serde_json::to_string_pretty(&report)? + "\n" };
    emit(output, &text)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { input, output, trace, order, graph_dump } => {
            cmd_solve(&input, output.as_deref(), trace.as_deref(), order, graph_dump.as_deref())
        }
        Command::Verify { instance, solution, brute_cap } => cmd_verify(&instance, &solution, brute_cap),
        Command::Gen { agents, goods, max, seed, output } => {
            cmd_gen(GenParams { agents, goods, max, seed }, output.as_deref())
        }
        Command::Bench { spec, output, sequential } => cmd_bench(&spec, output.as_deref(), sequential),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            // I/O and JSON failures count as bad input
            let (code, reason) = match err.downcast_ref::<Error>() {
                Some(e) => (e.exit_code(), e.reason()),
                None => (1, "invalid_input"),
            };
            let msg = serde_json::json!({ "error": reason, "message": format!("{err:#}") });
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
